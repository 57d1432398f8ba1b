#pragma once

// Checks of the asymptotic machinery: the splitting M = A + B + C of the
// field Jacobian, oscillatory-integral decay, and monodromy convergence to
// the integrable limit [[1,0],[2,1]].

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "vortwist/errors.hpp"
#include "vortwist/flow.hpp"
#include "vortwist/model.hpp"
#include "vortwist/numerics.hpp"
#include "vortwist/parallel.hpp"

namespace vortwist {

struct SplittingSample {
    double t = 0.0;
    double r = 0.0;
    double theta = 0.0;
    Mat2 A = kIntegrableJacobian;
    /// the only nonzero entry of B, from the leading terms alone
    double b12 = 0.0;
    Mat2 c{};
    /// r^{3/2}|c11|, r^{1/2}|c12|, r^2|c21|, r|c22|
    std::array<double, 4> scaled_norms{};
    /// |b12 + c12 - M12| against the full Jacobian
    double split_defect = 0.0;
};

/// M = A + B + C at (t, r, theta). b12 is the second theta-derivative of
/// T4(t, cos theta, -sin theta). c11, c12 come from the remainder terms, c21,
/// c22 from all terms.
inline SplittingSample splitting(const Perturbation& p, double t, double r, double theta) {
    if (!(r > p.r_star())) throw DomainError("splitting needs r > r*");
    SplittingSample s;
    s.t = t;
    s.r = r;
    s.theta = theta;
    const ComposedJet lead = compose_perturbation(p, t, r, theta, TermSet::leading);
    const ComposedJet rem = compose_perturbation(p, t, r, theta, TermSet::remainder);
    const ComposedJet all = compose_perturbation(p, t, r, theta, TermSet::all);
    const double r2 = r * r;
    s.b12 = 4.0 * r2 * lead.d_thetatheta;
    s.c[0][0] = 8.0 * r * rem.d_theta + 4.0 * r2 * rem.d_rtheta;
    s.c[0][1] = 4.0 * r2 * rem.d_thetatheta;
    s.c[1][0] = -8.0 * r * all.d_r - 4.0 * r2 * all.d_rr;
    s.c[1][1] = -4.0 * r2 * all.d_rtheta;
    s.scaled_norms = {std::pow(r, 1.5) * std::abs(s.c[0][0]), std::sqrt(r) * std::abs(s.c[0][1]),
                      r2 * std::abs(s.c[1][0]), r * std::abs(s.c[1][1])};
    const Mat2 m = field_jacobian_from_jet(all, r);
    s.split_defect = std::abs(s.b12 + s.c[0][1] - m[0][1]);
    return s;
}

struct SplittingScan {
    std::vector<double> r_grid;
    /// sup over the (t, theta) grid of each scaled norm, per radius
    std::vector<std::array<double, 4>> sup_scaled;
    /// max/min over radii of each sup; 1 when the entry vanishes identically
    std::array<double, 4> ratio{1.0, 1.0, 1.0, 1.0};
    double max_split_defect = 0.0;
    /// max change of b12 between radii at equal (t, theta)
    double b12_r_drift = 0.0;

    bool bounded(double factor) const {
        return std::all_of(ratio.begin(), ratio.end(), [&](double v) { return v < factor; });
    }
};

inline SplittingScan splitting_scan(const Perturbation& p, const std::vector<double>& r_list,
                                    const std::vector<double>& t_grid, const std::vector<double>& theta_grid) {
    SplittingScan scan;
    scan.r_grid = r_list;
    std::vector<double> b12_first;
    for (std::size_t i = 0; i < r_list.size(); ++i) {
        std::array<double, 4> sup{};
        std::size_t k = 0;
        for (double t : t_grid) {
            for (double th : theta_grid) {
                const SplittingSample s = splitting(p, t, r_list[i], th);
                for (int e = 0; e < 4; ++e) sup[e] = std::max(sup[e], s.scaled_norms[e]);
                scan.max_split_defect = std::max(scan.max_split_defect, s.split_defect);
                if (i == 0)
                    b12_first.push_back(s.b12);
                else
                    scan.b12_r_drift = std::max(scan.b12_r_drift, std::abs(s.b12 - b12_first[k]));
                ++k;
            }
        }
        scan.sup_scaled.push_back(sup);
    }
    for (int e = 0; e < 4; ++e) {
        double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
        for (const auto& sup : scan.sup_scaled) {
            lo = std::min(lo, sup[e]);
            hi = std::max(hi, sup[e]);
        }
        if (hi == 0.0)
            scan.ratio[e] = 1.0;
        else
            scan.ratio[e] = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
    }
    return scan;
}

/// Integrand data for I(lambda) = int_0^1 q(s, cos(lambda s + beta(s)), sin(lambda s + beta(s))) phi(s) ds,
/// where q(t, eta, xi) = sum c_ij(t) eta^i xi^j.
struct OscillatoryProbe {
    std::vector<Monomial> poly;
    TimeCoefficient beta;
    TimeCoefficient phi = TimeCoefficient::constant(1.0);
    std::vector<double> lambdas;
    /// fit range for the exponent; defaults to the upper decade of lambdas
    std::optional<double> fit_from;

    int degree() const {
        int n = 0;
        for (const auto& m : poly) n = std::max(n, m.i + m.j);
        return n;
    }

    double q(double t, double eta, double xi) const {
        double v = 0.0;
        for (const auto& m : poly) v += m.coef.value(t) * std::pow(eta, m.i) * std::pow(xi, m.j);
        return v;
    }

    /// the probe of the decay check: q = cos theta, beta = 0.1 sin(2 pi s), phi = 1
    static OscillatoryProbe standard() {
        OscillatoryProbe p;
        p.poly = {Monomial{1, 0, TimeCoefficient::constant(1.0)}};
        p.beta = TimeCoefficient{0.0, {}, {0.1}};
        p.lambdas = geometric_points(1e2, 1e4, 9);
        p.fit_from = 1e2;
        return p;
    }
};

struct OscillatoryResult {
    std::vector<double> lambdas;
    /// signed I(lambda)
    std::vector<double> integrals;
    /// max |I| over lambda + 2 pi j/8, j = 0..7
    std::vector<double> envelope;
    double fitted_exponent = std::nan("");
    /// slope of log|I| itself, which oscillates with lambda
    double raw_exponent = std::nan("");
    double C_RL_hat = 0.0;
    /// sup |beta'| on [0, 1]
    double beta_dot_sup = 0.0;
    double max_circular_mean = 0.0;
};

/// max over sampled t of |(1/2pi) int q(t, cos theta, sin theta) dtheta|,
/// trapezoid rule, exact for the polynomial degrees involved.
inline double circular_mean_defect(const OscillatoryProbe& probe, std::size_t t_samples = 32) {
    const std::size_t m = static_cast<std::size_t>(2 * probe.degree() + 8);
    double worst = 0.0;
    for (std::size_t k = 0; k < t_samples; ++k) {
        const double t = static_cast<double>(k) / static_cast<double>(t_samples);
        double sum = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
            const double th = kTwoPi * static_cast<double>(j) / static_cast<double>(m);
            sum += probe.q(t, std::cos(th), std::sin(th));
        }
        worst = std::max(worst, std::abs(sum / static_cast<double>(m)));
    }
    return worst;
}

namespace detail {

struct GaussLegendre10 {
    std::array<double, 10> x{}, w{};
    GaussLegendre10() {
        constexpr int n = 10;
        for (int i = 0; i < n; ++i) {
            double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
            double dp = 0.0;
            for (int it = 0; it < 100; ++it) {
                double p0 = 1.0, p1 = 0.0;
                for (int k = 1; k <= n; ++k) {
                    const double p2 = p1;
                    p1 = p0;
                    p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
                }
                dp = n * (z * p0 - p1) / (z * z - 1.0);
                const double dz = p0 / dp;
                z -= dz;
                if (std::abs(dz) < 1e-16) break;
            }
            x[i] = z;
            w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        }
    }
};

inline const GaussLegendre10& gauss_legendre10() {
    static const GaussLegendre10 rule;
    return rule;
}

}  // namespace detail

/// I(lambda) by 10-point Gauss-Legendre on panels no wider than one period
/// 2 pi/(N lambda), doubling the panel count until two passes agree.
inline double oscillatory_integral(const OscillatoryProbe& probe, double lambda, double rel_tol = 1e-10) {
    const auto& gl = detail::gauss_legendre10();
    const double freq = std::max(1, probe.degree()) * std::abs(lambda) + kTwoPi * probe.beta.sup_bound();
    std::size_t panels = static_cast<std::size_t>(std::ceil(std::max(1.0, freq / kTwoPi)));
    auto integrate = [&](std::size_t np) {
        const double hw = 0.5 / static_cast<double>(np);
        double sum = 0.0;
        for (std::size_t k = 0; k < np; ++k) {
            const double mid = (2.0 * static_cast<double>(k) + 1.0) * hw;
            double part = 0.0;
            for (int i = 0; i < 10; ++i) {
                const double s = mid + hw * gl.x[i];
                const double ph = lambda * s + probe.beta.value(s);
                part += gl.w[i] * probe.q(s, std::cos(ph), std::sin(ph)) * probe.phi.value(s);
            }
            sum += part * hw;
        }
        return sum;
    };
    double prev = integrate(panels);
    for (int pass = 0; pass < 8; ++pass) {
        panels *= 2;
        const double cur = integrate(panels);
        if (std::abs(cur - prev) <= 1e-15 + rel_tol * std::abs(cur)) return cur;
        prev = cur;
    }
    throw QuadratureError("oscillatory quadrature did not converge at lambda = " + std::to_string(lambda));
}

/// Decay of I(lambda). Rejects probes whose circular mean is not zero.
inline OscillatoryResult oscillatory_decay(const OscillatoryProbe& probe) {
    OscillatoryResult res;
    res.max_circular_mean = circular_mean_defect(probe);
    if (res.max_circular_mean > 1e-10)
        throw HypothesisError("q has nonzero circular mean " + std::to_string(res.max_circular_mean));
    if (probe.lambdas.size() < 2) throw ConfigError("at least two lambda values are needed");
    for (double l : probe.lambdas)
        if (!(l > 0.0)) throw ConfigError("lambda values must be positive");
    res.lambdas = probe.lambdas;
    for (double l : probe.lambdas) {
        const double v = oscillatory_integral(probe, l);
        res.integrals.push_back(v);
        double env = std::abs(v);
        res.C_RL_hat = std::max(res.C_RL_hat, l * std::abs(v));
        for (int j = 1; j < 8; ++j) {
            const double lj = l + kTwoPi * j / 8.0;
            const double vj = std::abs(oscillatory_integral(probe, lj));
            env = std::max(env, vj);
            res.C_RL_hat = std::max(res.C_RL_hat, lj * vj);
        }
        res.envelope.push_back(env);
    }
    const double lmax = *std::max_element(res.lambdas.begin(), res.lambdas.end());
    const double from = probe.fit_from.value_or(lmax / 10.0);
    std::vector<double> fl, fe, fi;
    for (std::size_t k = 0; k < res.lambdas.size(); ++k) {
        if (res.lambdas[k] >= from * (1.0 - 1e-12)) {
            fl.push_back(res.lambdas[k]);
            fe.push_back(res.envelope[k]);
            fi.push_back(res.integrals[k]);
        }
    }
    res.fitted_exponent = loglog_slope(fl, fe);
    res.raw_exponent = loglog_slope(fl, fi);
    for (int k = 0; k <= 1000; ++k) res.beta_dot_sup = std::max(res.beta_dot_sup, std::abs(probe.beta.derivative(k / 1000.0)));
    return res;
}

struct MonodromyScan {
    std::vector<double> r0;
    double theta0 = 0.0;
    /// max-norm distance of Y(1) from [[1,0],[2,1]], in input order
    std::vector<double> deviations;
    /// strictly decreasing when sorted by r0
    bool monotone_decay = false;
    /// sup over the trajectory of |beta'| = |theta' - 2 r0|, per r0
    std::vector<double> beta_dot_sup;
};

inline MonodromyScan monodromy_limit_scan(const VortexFlow& flow, const std::vector<double>& r0_list, double theta0,
                                          unsigned jobs = 1) {
    MonodromyScan scan;
    scan.r0 = r0_list;
    scan.theta0 = theta0;
    scan.deviations.resize(r0_list.size());
    scan.beta_dot_sup.resize(r0_list.size());
    const Mat2 limit{{{1.0, 0.0}, {2.0, 1.0}}};
    parallel_for(r0_list.size(), jobs, [&](std::size_t k) {
        const double r0 = r0_list[k];
        const Trajectory tr = flow.integrate(AugmentedState{r0, theta0}, 0.0, 1.0, true);
        scan.deviations[k] = max_abs_diff(tr.final_state.Y, limit);
        double bd = 0.0;
        for (const auto& pt : tr.points) {
            const ComposedJet jet = compose_perturbation(flow.perturbation(), pt.t, pt.state.r, pt.state.theta);
            const RegularizedField f = regularized_field_from_jet(jet, pt.state.r);
            bd = std::max(bd, std::abs(2.0 * (pt.state.r - r0) + f.G));
        }
        scan.beta_dot_sup[k] = bd;
    });
    std::vector<std::size_t> order(r0_list.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return r0_list[a] < r0_list[b]; });
    scan.monotone_decay = true;
    for (std::size_t k = 1; k < order.size(); ++k)
        if (!(scan.deviations[order[k]] < scan.deviations[order[k - 1]])) scan.monotone_decay = false;
    return scan;
}

/// max/min of the monodromy deviation over n_theta equally spaced theta0.
inline double monodromy_theta_spread(const VortexFlow& flow, double r0, std::size_t n_theta = 8, unsigned jobs = 1) {
    std::vector<double> dev(n_theta);
    const std::vector<double> th = uniform_angles(n_theta);
    const Mat2 limit{{{1.0, 0.0}, {2.0, 1.0}}};
    parallel_for(n_theta, jobs, [&](std::size_t k) { dev[k] = max_abs_diff(flow.poincare(r0, th[k]).Y1, limit); });
    const auto [lo, hi] = std::minmax_element(dev.begin(), dev.end());
    return *lo > 0.0 ? *hi / *lo : std::numeric_limits<double>::infinity();
}

}  // namespace vortwist
