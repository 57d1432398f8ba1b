#pragma once

// Grid scans of the Poincare map: twist profile, exactness residuals, the
// growth constant K, boundary frequencies and the working strip.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <vector>

#include "vortwist/errors.hpp"
#include "vortwist/flow.hpp"
#include "vortwist/numerics.hpp"
#include "vortwist/parallel.hpp"

namespace vortwist {

struct TwistFdCheck {
    double r0 = 0.0;
    double theta0 = 0.0;
    double variational = 0.0;
    double finite_difference = 0.0;
};

struct TwistScan {
    std::vector<double> r_grid;
    std::vector<double> theta_grid;
    /// dG_dr0[i][j] at (r_grid[i], theta_grid[j]); NaN where the orbit left D.
    std::vector<std::vector<double>> dG_dr0;
    /// sup over theta of |dG/dr0 - 2|, per radius
    std::vector<double> sup_dev_by_r;
    double sup_dev = 0.0;
    double min_twist = std::numeric_limits<double>::infinity();
    std::size_t missing = 0;
    std::vector<TwistFdCheck> fd_checks;
    double fd_max_discrepancy = 0.0;
    /// log-log slope of sup_dev_by_r against r; exploratory only
    double decay_exponent = std::nan("");

    bool strictly_decreasing() const {
        for (std::size_t i = 1; i < sup_dev_by_r.size(); ++i)
            if (!(sup_dev_by_r[i] < sup_dev_by_r[i - 1])) return false;
        return true;
    }
};

namespace detail {

inline double fd_step_for(const VortexFlow& flow, double r0, double rel) {
    double h = rel * std::max(1.0, r0);
    return std::min(h, 0.5 * (r0 - flow.a_star()));
}

// Central difference of theta1 in r0 on the fixed-step map.
inline double twist_fd(const VortexFlow& flow, double r0, double theta0) {
    const double h = fd_step_for(flow, r0, 1e-4);
    const std::size_t n = flow.smooth_step_count(r0 + h);
    const double tp = flow.poincare_smooth(r0 + h, theta0, n).theta1;
    const double tm = flow.poincare_smooth(r0 - h, theta0, n).theta1;
    return (tp - tm) / (2.0 * h);
}

}  // namespace detail

/// dG/dr0 = Y1[1][0] on the tensor grid, with `fd_points` randomly chosen grid
/// points cross-checked by central differences of theta1.
inline TwistScan twist_scan(const VortexFlow& flow, const std::vector<double>& r_list,
                            const std::vector<double>& theta_list, unsigned jobs = 1, std::size_t fd_points = 3,
                            unsigned seed = 1) {
    TwistScan scan;
    scan.r_grid = r_list;
    scan.theta_grid = theta_list;
    const std::size_t nr = r_list.size(), nt = theta_list.size();
    scan.dG_dr0.assign(nr, std::vector<double>(nt, std::nan("")));
    parallel_for(nr * nt, jobs, [&](std::size_t k) {
        const auto res = flow.try_poincare(r_list[k / nt], theta_list[k % nt]);
        if (!res.domain_exit) scan.dG_dr0[k / nt][k % nt] = res.twist();
    });
    scan.sup_dev_by_r.assign(nr, 0.0);
    for (std::size_t i = 0; i < nr; ++i) {
        for (std::size_t j = 0; j < nt; ++j) {
            const double v = scan.dG_dr0[i][j];
            if (std::isnan(v)) {
                ++scan.missing;
                continue;
            }
            scan.sup_dev_by_r[i] = std::max(scan.sup_dev_by_r[i], std::abs(v - 2.0));
            scan.min_twist = std::min(scan.min_twist, v);
        }
        scan.sup_dev = std::max(scan.sup_dev, scan.sup_dev_by_r[i]);
    }
    if (nr >= 2) scan.decay_exponent = loglog_slope(scan.r_grid, scan.sup_dev_by_r);

    if (nr * nt > 0 && fd_points > 0) {
        std::mt19937_64 rng(seed);
        std::uniform_int_distribution<std::size_t> pick(0, nr * nt - 1);
        std::vector<std::size_t> chosen;
        for (std::size_t m = 0; m < fd_points; ++m) chosen.push_back(pick(rng));
        scan.fd_checks.resize(chosen.size());
        parallel_for(chosen.size(), jobs, [&](std::size_t m) {
            const std::size_t k = chosen[m];
            TwistFdCheck c{r_list[k / nt], theta_list[k % nt], scan.dG_dr0[k / nt][k % nt], std::nan("")};
            if (!std::isnan(c.variational)) {
                try {
                    c.finite_difference = detail::twist_fd(flow, c.r0, c.theta0);
                } catch (const DomainExit&) {
                }
            }
            scan.fd_checks[m] = c;
        });
        for (const auto& c : scan.fd_checks)
            if (!std::isnan(c.finite_difference))
                scan.fd_max_discrepancy = std::max(scan.fd_max_discrepancy, std::abs(c.variational - c.finite_difference));
    }
    return scan;
}

struct ExactnessPoint {
    double r0 = 0.0;
    double theta0 = 0.0;
    double residual_r = 0.0;
    double residual_theta = 0.0;
};

struct ExactnessReport {
    double max_residual = 0.0;
    double at_r0 = 0.0;
    double at_theta0 = 0.0;
    std::vector<ExactnessPoint> points;
};

/// max over the grid of |FD(S) - (f(r1) grad theta1 - f(r0) grad theta0)|,
/// with grad theta1 read from Y1. With `richardson`, the central differences
/// at h and h/2 are combined to cancel the O(h^2) term.
inline ExactnessReport exactness_residual(const VortexFlow& flow, const std::vector<double>& r_list,
                                          const std::vector<double>& theta_list, double fd_step,
                                          bool richardson = true, unsigned jobs = 1) {
    if (!(fd_step >= 1e-7 && fd_step <= 1e-3)) throw ConfigError("fd_step must lie in [1e-7, 1e-3]");
    const std::size_t nr = r_list.size(), nt = theta_list.size();
    ExactnessReport rep;
    rep.points.resize(nr * nt);
    parallel_for(nr * nt, jobs, [&](std::size_t k) {
        const double r0 = r_list[k / nt], th0 = theta_list[k % nt];
        const PoincareResult c = flow.poincare(r0, th0);
        auto central = [&](double h) {
            const double sr = (flow.poincare(r0 + h, th0).S - flow.poincare(r0 - h, th0).S) / (2.0 * h);
            const double st = (flow.poincare(r0, th0 + h).S - flow.poincare(r0, th0 - h).S) / (2.0 * h);
            return std::array<double, 2>{sr, st};
        };
        std::array<double, 2> d = central(fd_step);
        if (richardson) {
            const std::array<double, 2> d2 = central(0.5 * fd_step);
            for (int i = 0; i < 2; ++i) d[i] = (4.0 * d2[i] - d[i]) / 3.0;
        }
        const double f1 = SymplecticWeight::f(c.r1), f0 = SymplecticWeight::f(r0);
        rep.points[k] = {r0, th0, d[0] - f1 * c.Y1[1][0], d[1] - (f1 * c.Y1[1][1] - f0)};
    });
    for (std::size_t k = 0; k < rep.points.size(); ++k) {
        const auto& p = rep.points[k];
        const double m = std::max(std::abs(p.residual_r), std::abs(p.residual_theta));
        if (k == 0 || m > rep.max_residual) {
            rep.max_residual = m;
            rep.at_r0 = p.r0;
            rep.at_theta0 = p.theta0;
        }
    }
    return rep;
}

struct KEstimate {
    double K_hat = 0.0;
    double at_r0 = 0.0;
    double at_theta0 = 0.0;
    /// max over the r-grid, per theta0
    std::vector<double> K_by_theta;
    /// min of theta-dot = 2r + G over all sampled trajectory points
    double min_theta_dot = std::numeric_limits<double>::infinity();
};

/// sup of |r(t) - r0| + |theta(t) - theta0 - 2 r0 t| over the grid and over
/// every accepted step of each trajectory on [0, 1].
inline KEstimate estimate_K(const VortexFlow& flow, const std::vector<double>& r_list,
                            const std::vector<double>& theta_list, unsigned jobs = 1) {
    const std::size_t nr = r_list.size(), nt = theta_list.size();
    std::vector<double> kvals(nr * nt, 0.0), thdot(nr * nt, std::numeric_limits<double>::infinity());
    parallel_for(nr * nt, jobs, [&](std::size_t k) {
        const double r0 = r_list[k / nt], th0 = theta_list[k % nt];
        const Trajectory tr = flow.integrate(AugmentedState{r0, th0}, 0.0, 1.0, true);
        for (const auto& pt : tr.points) {
            const double dev = std::abs(pt.state.r - r0) + std::abs(pt.state.theta - th0 - 2.0 * r0 * pt.t);
            kvals[k] = std::max(kvals[k], dev);
            const ComposedJet jet = compose_perturbation(flow.perturbation(), pt.t, pt.state.r, pt.state.theta);
            const RegularizedField f = regularized_field_from_jet(jet, pt.state.r);
            thdot[k] = std::min(thdot[k], 2.0 * pt.state.r + f.G);
        }
    });
    KEstimate est;
    est.K_by_theta.assign(nt, 0.0);
    for (std::size_t k = 0; k < nr * nt; ++k) {
        if (kvals[k] > est.K_hat) {
            est.K_hat = kvals[k];
            est.at_r0 = r_list[k / nt];
            est.at_theta0 = theta_list[k % nt];
        }
        est.K_by_theta[k % nt] = std::max(est.K_by_theta[k % nt], kvals[k]);
        est.min_theta_dot = std::min(est.min_theta_dot, thdot[k]);
    }
    return est;
}

/// Analytic bound 2 C1 + C1 / (2 (r0 - C1)) on K for trajectories from r0.
inline double K_bound(double c1, double r0_min) { return 2.0 * c1 + c1 / (2.0 * (r0_min - c1)); }

struct FrequencyWindow {
    double r_bar = 0.0;
    std::vector<double> theta_grid;
    /// alpha^-(x) = (theta1(r_bar, x) - x) / (2 pi), rotation units
    std::vector<double> alpha_minus;
    /// max of alpha_minus; c = 2 pi W_minus in angle units
    double W_minus = 0.0;
    /// (c + 2) / (2 pi), the admissibility threshold for rotation numbers
    double alpha_threshold = 0.0;
    /// (c + 4 pi) / (2 pi): lower edge of the window 2 pi alpha > W^- + 4 pi
    double theorem_threshold = 0.0;
    /// max |alpha^-(x + 2 pi) - alpha^-(x)| over the grid
    double periodicity_defect = 0.0;
    /// W^+ is infinite for this system
    bool W_plus_unbounded = true;
    std::optional<double> r_cap;
    /// (theta1(r_cap, x) - x) / (2 pi) on theta_grid, when r_cap is set
    std::vector<double> alpha_cap;

    double c() const { return kTwoPi * W_minus; }

    /// Periodic piecewise-linear interpolation of `samples` on theta_grid.
    double interpolate(const std::vector<double>& samples, double x) const {
        const std::size_t n = theta_grid.size();
        if (n == 0) throw ConfigError("empty frequency window");
        if (n == 1) return samples[0];
        const double x0 = theta_grid.front();
        const double u = x0 + wrap_2pi(x - x0);
        auto it = std::upper_bound(theta_grid.begin(), theta_grid.end(), u);
        const std::size_t hi = static_cast<std::size_t>(it - theta_grid.begin());
        const std::size_t lo = hi == 0 ? n - 1 : hi - 1;
        double xl = theta_grid[lo], xh = hi == n ? x0 + kTwoPi : theta_grid[hi];
        if (u < xl) xl -= kTwoPi;
        const double w = xh > xl ? (u - xl) / (xh - xl) : 0.0;
        return samples[lo] + w * (samples[hi % n] - samples[lo]);
    }

    double alpha_minus_at(double x) const { return interpolate(alpha_minus, x); }
};

/// Samples alpha^- at the lower strip edge r_bar. theta_grid must be sorted
/// and lie inside one period [theta_grid[0], theta_grid[0] + 2 pi).
inline FrequencyWindow boundary_frequencies(const VortexFlow& flow, double r_bar,
                                            const std::vector<double>& theta_grid,
                                            std::optional<double> r_cap = std::nullopt, unsigned jobs = 1) {
    if (!(r_bar > flow.a_star())) throw DomainExit("r_bar must exceed a*");
    if (theta_grid.empty()) throw ConfigError("theta grid must not be empty");
    for (std::size_t k = 1; k < theta_grid.size(); ++k)
        if (!(theta_grid[k] > theta_grid[k - 1])) throw ConfigError("theta grid must be strictly increasing");
    if (!(theta_grid.back() < theta_grid.front() + kTwoPi)) throw ConfigError("theta grid must span less than 2 pi");
    if (r_cap && !(*r_cap > r_bar)) throw ConfigError("r_cap must exceed r_bar");
    FrequencyWindow w;
    w.r_bar = r_bar;
    w.theta_grid = theta_grid;
    w.r_cap = r_cap;
    const std::size_t n = theta_grid.size();
    w.alpha_minus.resize(n);
    std::vector<double> shifted(n);
    if (r_cap) w.alpha_cap.resize(n);
    parallel_for(n, jobs, [&](std::size_t k) {
        const double x = theta_grid[k];
        w.alpha_minus[k] = (flow.poincare(r_bar, x).theta1 - x) / kTwoPi;
        shifted[k] = (flow.poincare(r_bar, x + kTwoPi).theta1 - x - kTwoPi) / kTwoPi;
        if (r_cap) w.alpha_cap[k] = (flow.poincare(*r_cap, x).theta1 - x) / kTwoPi;
    });
    w.W_minus = *std::max_element(w.alpha_minus.begin(), w.alpha_minus.end());
    for (std::size_t k = 0; k < n; ++k)
        w.periodicity_defect = std::max(w.periodicity_defect, std::abs(shifted[k] - w.alpha_minus[k]));
    w.alpha_threshold = (w.c() + 2.0) / kTwoPi;
    w.theorem_threshold = (w.c() + 2.0 * kTwoPi) / kTwoPi;
    return w;
}

struct StripOptions {
    /// probe grid for a2 and K
    std::size_t probe_r = 10;
    std::size_t probe_theta = 16;
    /// probe radii run from the base radius to base * probe_span
    double probe_span = 50.0;
    std::optional<double> r_bar_override;
};

struct WorkingStrip {
    double a_star = 0.0;
    /// 2r - C1/(2r) > 0 for r > a1
    double a1 = 0.0;
    /// smallest probe radius above which every probed twist is positive
    double a2 = 0.0;
    double K = 0.0;
    double r_bar = 0.0;
    bool overridden = false;
    std::vector<double> probe_radii;
    std::vector<double> probe_min_twist;
};

/// r_bar = max{a*, a1, a2} + K, with a2 and K taken from a probe grid.
inline WorkingStrip working_strip(const VortexFlow& flow, const StripOptions& opt = {}, unsigned jobs = 1) {
    WorkingStrip s;
    const double c1 = flow.bounds().c1;
    s.a_star = flow.a_star();
    s.a1 = 0.5 * std::sqrt(c1);
    const double base0 = std::max(s.a_star, s.a1) * (1.0 + 1e-3) + 1e-6;
    s.probe_radii = geometric_points(base0, base0 * opt.probe_span, opt.probe_r);
    const std::vector<double> thetas = uniform_angles(opt.probe_theta);
    const TwistScan scan = twist_scan(flow, s.probe_radii, thetas, jobs, 0);
    s.probe_min_twist.resize(s.probe_radii.size());
    std::size_t first_good = s.probe_radii.size();
    for (std::size_t i = s.probe_radii.size(); i-- > 0;) {
        double m = std::numeric_limits<double>::infinity();
        for (double v : scan.dG_dr0[i]) m = std::min(m, std::isnan(v) ? -1.0 : v);
        s.probe_min_twist[i] = m;
        if (m > 0.0 && first_good == i + 1) first_good = i;
    }
    if (first_good == s.probe_radii.size()) throw DomainError("no twist region found on the probe grid");
    s.a2 = s.probe_radii[first_good];
    const double base = std::max({s.a_star, s.a1, s.a2});
    std::vector<double> k_radii;
    for (double r : s.probe_radii)
        if (r >= base) k_radii.push_back(r);
    s.K = estimate_K(flow, k_radii, thetas, jobs).K_hat;
    s.r_bar = base + s.K;
    if (opt.r_bar_override) {
        if (!(*opt.r_bar_override > s.a_star)) throw ConfigError("r_bar override must exceed a*");
        s.r_bar = *opt.r_bar_override;
        s.overridden = true;
    }
    return s;
}

}  // namespace vortwist
