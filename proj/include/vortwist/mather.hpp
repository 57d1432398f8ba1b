#pragma once

// (s,q)-periodic orbits from the discrete Euler-Lagrange equations
//   d1h(x_n, x_{n+1}) + d2h(x_{n-1}, x_n) = 0,  x_{n+q} = x_n + 2 pi s,
// rotation numbers, convergent families for irrational alpha, hull functions.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "vortwist/errors.hpp"
#include "vortwist/generating.hpp"
#include "vortwist/numerics.hpp"
#include "vortwist/parallel.hpp"
#include "vortwist/poincare.hpp"

namespace vortwist {

struct OrbitOptions {
    double newton_tol = 1e-10;
    int max_iter = 60;
    /// cap on the max-norm of one Newton update
    double max_step = 0.5;
    /// initial Newton step fraction
    double damping = 1.0;
    int fallback_iters = 200;
    /// first configuration point of the equispaced start
    double x0 = 0.0;
    unsigned jobs = 1;
};

struct Orbit {
    long s = 0;
    long q = 1;
    /// q + 1 lifted angles, x[q] = x[0] + 2 pi s
    std::vector<double> x;
    /// q radii, r[n] = f^{-1}(-d1h(x_n, x_{n+1}))
    std::vector<double> r;
    double action = 0.0;
    double el_residual = 0.0;
    double map_residual = 0.0;
    int iterations = 0;
    bool used_fallback = false;
    /// number of trial iterates rejected for leaving B
    int clamp_events = 0;
    bool inside_theorem_window = false;

    double rotation() const { return static_cast<double>(s) / static_cast<double>(q); }

    /// x_n for any integer n via x_{n+q} = x_n + 2 pi s.
    double x_at(long n) const {
        const long m = ((n % q) + q) % q;
        const long k = (n - m) / q;
        return x[static_cast<std::size_t>(m)] + kTwoPi * static_cast<double>(s * k);
    }
};

namespace detail {

// Solves the cyclic tridiagonal system with diagonal d, coupling b[n] between
// n and n+1 (mod q), right-hand side rhs. Thomas algorithm plus
// Sherman-Morrison for the corner entries.
inline std::vector<double> solve_cyclic(const std::vector<double>& d, const std::vector<double>& b,
                                        const std::vector<double>& rhs) {
    const std::size_t q = d.size();
    auto thomas = [](std::vector<double> lo, std::vector<double> di, std::vector<double> up, std::vector<double> y) {
        const std::size_t n = di.size();
        for (std::size_t i = 1; i < n; ++i) {
            const double m = lo[i] / di[i - 1];
            di[i] -= m * up[i - 1];
            y[i] -= m * y[i - 1];
        }
        y[n - 1] /= di[n - 1];
        for (std::size_t i = n - 1; i-- > 0;) y[i] = (y[i] - up[i] * y[i + 1]) / di[i];
        return y;
    };
    std::vector<double> lo(q), up(q), di(d);
    for (std::size_t i = 0; i < q; ++i) {
        up[i] = b[i];
        lo[i] = b[(i + q - 1) % q];
    }
    const double corner = b[q - 1];  // A[0][q-1] = A[q-1][0]
    const double gamma = -di[0];
    di[0] -= gamma;
    di[q - 1] -= corner * corner / gamma;
    std::vector<double> u(q, 0.0);
    u[0] = gamma;
    u[q - 1] = corner;
    const std::vector<double> y = thomas(lo, di, up, rhs);
    const std::vector<double> z = thomas(lo, di, up, u);
    const double fact = (y[0] + corner * y[q - 1] / gamma) / (1.0 + z[0] + corner * z[q - 1] / gamma);
    std::vector<double> x(q);
    for (std::size_t i = 0; i < q; ++i) x[i] = y[i] - fact * z[i];
    return x;
}

inline std::vector<double> solve_dense(std::vector<std::vector<double>> a, std::vector<double> y) {
    const std::size_t n = y.size();
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t p = c;
        for (std::size_t r = c + 1; r < n; ++r)
            if (std::abs(a[r][c]) > std::abs(a[p][c])) p = r;
        std::swap(a[c], a[p]);
        std::swap(y[c], y[p]);
        for (std::size_t r = c + 1; r < n; ++r) {
            const double m = a[r][c] / a[c][c];
            for (std::size_t k = c; k < n; ++k) a[r][k] -= m * a[c][k];
            y[r] -= m * y[c];
        }
    }
    for (std::size_t c = n; c-- > 0;) {
        for (std::size_t k = c + 1; k < n; ++k) y[c] -= a[c][k] * y[k];
        y[c] /= a[c][c];
    }
    return y;
}

// Symmetric cyclic tridiagonal Jacobian J with J[n][n] = d[n] and the
// coupling b[n] added at (n, n+1) and (n+1, n), indices mod q.
inline std::vector<double> solve_el_jacobian(const std::vector<double>& d, const std::vector<double>& b,
                                             const std::vector<double>& rhs) {
    const std::size_t q = d.size();
    auto dense = [&] {
        std::vector<std::vector<double>> a(q, std::vector<double>(q, 0.0));
        for (std::size_t n = 0; n < q; ++n) {
            a[n][n] += d[n];
            a[n][(n + 1) % q] += b[n];
            a[(n + 1) % q][n] += b[n];
        }
        return solve_dense(a, rhs);
    };
    if (q <= 2) return dense();
    std::vector<double> x = solve_cyclic(d, b, rhs);
    for (double v : x)
        if (!std::isfinite(v)) return dense();
    return x;
}

struct ElState {
    std::vector<GeneratingSample> g;
    std::vector<double> E;
    double norm = 0.0;
};

}  // namespace detail

/// Configuration lift with x_q = x_0 + 2 pi s appended.
inline std::vector<double> close_configuration(const std::vector<double>& x_free, long s) {
    std::vector<double> x(x_free);
    x.push_back(x_free.front() + kTwoPi * static_cast<double>(s));
    return x;
}

/// Solves the periodic Euler-Lagrange system by damped Newton with an action
/// gradient-descent fallback. Refuses s/q at or below window.alpha_threshold.
inline Orbit periodic_orbit(const GeneratingFunction& gf, const FrequencyWindow& window, long s, long q,
                            std::optional<std::vector<double>> x_init = std::nullopt, const OrbitOptions& opt = {}) {
    if (q < 1) throw ConfigError("q must be at least 1");
    if (std::gcd(s, q) != 1) throw ConfigError("s and q must be coprime");
    const double alpha = static_cast<double>(s) / static_cast<double>(q);
    if (!(alpha > window.alpha_threshold))
        throw WindowError("rotation number " + std::to_string(alpha) + " is not above the threshold " +
                          std::to_string(window.alpha_threshold));
    const std::size_t nq = static_cast<std::size_t>(q);
    const double shift = kTwoPi * static_cast<double>(s);

    std::vector<double> x(nq);
    if (x_init) {
        if (x_init->size() != nq && x_init->size() != nq + 1) throw ConfigError("x_init must hold q or q+1 values");
        std::copy_n(x_init->begin(), nq, x.begin());
    } else {
        for (std::size_t n = 0; n < nq; ++n) x[n] = opt.x0 + shift * static_cast<double>(n) / static_cast<double>(q);
    }

    Orbit orbit;
    orbit.s = s;
    orbit.q = q;
    orbit.inside_theorem_window = alpha > window.theorem_threshold;

    auto next = [&](const std::vector<double>& v, std::size_t n) { return n + 1 < nq ? v[n + 1] : v[0] + shift; };
    auto evaluate = [&](const std::vector<double>& v) -> std::optional<detail::ElState> {
        for (std::size_t n = 0; n < nq; ++n)
            if (!domain_contains(v[n], next(v, n), window)) return std::nullopt;
        detail::ElState st;
        st.g.resize(nq);
        try {
            parallel_for(nq, opt.jobs, [&](std::size_t n) { st.g[n] = gf.h_eval(v[n], next(v, n)); });
        } catch (const BracketError&) {
            return std::nullopt;
        } catch (const DomainExit&) {
            return std::nullopt;
        }
        st.E.resize(nq);
        for (std::size_t n = 0; n < nq; ++n) {
            // h(x_{-1}, x_0) = h(x_{q-1}, x_q) by lift invariance
            st.E[n] = st.g[n].d1h + st.g[(n + nq - 1) % nq].d2h;
            st.norm = std::max(st.norm, std::abs(st.E[n]));
        }
        return st;
    };

    std::optional<detail::ElState> cur = evaluate(x);
    if (!cur) throw WindowError("initial configuration leaves the domain B");
    std::vector<double> best_x = x;
    double best_norm = cur->norm;

    int it = 0;
    for (; it < opt.max_iter && cur->norm >= opt.newton_tol; ++it) {
        std::vector<double> d(nq), b(nq), rhs(nq);
        double dmax = 0.0;
        for (std::size_t n = 0; n < nq; ++n) {
            d[n] = cur->g[n].d11h + cur->g[(n + nq - 1) % nq].d22h;
            b[n] = cur->g[n].d12h;
            rhs[n] = -cur->E[n];
            dmax = std::max(dmax, std::abs(d[n]) + 2.0 * std::abs(b[n]));
        }
        std::vector<double> dx = detail::solve_el_jacobian(d, b, rhs);
        double dx_norm = 0.0;
        bool finite = true;
        for (double v : dx) {
            finite = finite && std::isfinite(v);
            dx_norm = std::max(dx_norm, std::abs(v));
        }
        bool accepted = false;
        if (finite && dx_norm > 0.0) {
            double lambda = opt.damping * std::min(1.0, opt.max_step / dx_norm);
            for (int ls = 0; ls < 30 && !accepted; ++ls, lambda *= 0.5) {
                std::vector<double> trial(nq);
                for (std::size_t n = 0; n < nq; ++n) trial[n] = x[n] + lambda * dx[n];
                auto st = evaluate(trial);
                if (!st) {
                    ++orbit.clamp_events;
                    continue;
                }
                if (st->norm < (1.0 - 1e-4 * lambda) * cur->norm) {
                    x = std::move(trial);
                    cur = std::move(st);
                    accepted = true;
                }
            }
        }
        if (!accepted) {
            // Newton stalled: descend the action, whose gradient is E.
            orbit.used_fallback = true;
            const double tau = 0.5 / dmax;
            for (int k = 0; k < opt.fallback_iters; ++k) {
                std::vector<double> trial(nq);
                for (std::size_t n = 0; n < nq; ++n) trial[n] = x[n] - tau * cur->E[n];
                auto st = evaluate(trial);
                if (!st) {
                    ++orbit.clamp_events;
                    break;
                }
                x = std::move(trial);
                cur = std::move(st);
            }
        }
        if (cur->norm < best_norm) {
            best_norm = cur->norm;
            best_x = x;
        }
    }
    if (!(cur->norm < opt.newton_tol))
        throw NoConvergence("periodic orbit (" + std::to_string(s) + "," + std::to_string(q) +
                                ") did not converge",
                            close_configuration(best_x, s), best_norm);

    orbit.iterations = it;
    orbit.x = close_configuration(x, s);
    orbit.r.resize(nq);
    for (std::size_t n = 0; n < nq; ++n) {
        orbit.r[n] = cur->g[n].R;
        orbit.action += cur->g[n].h;
    }
    orbit.el_residual = cur->norm;
    // the actual (adaptive) Poincare map, independent of the root solves
    std::vector<double> dev(nq, 0.0);
    const VortexFlow& flow = gf.flow();
    parallel_for(nq, opt.jobs, [&](std::size_t n) {
        const PoincareResult p = flow.poincare(orbit.r[n], orbit.x[n]);
        dev[n] = std::max(std::abs(p.r1 - orbit.r[(n + 1) % nq]), std::abs(p.theta1 - orbit.x[n + 1]));
    });
    orbit.map_residual = *std::max_element(dev.begin(), dev.end());
    return orbit;
}

struct OrbitReport {
    double el = 0.0;
    double map = 0.0;
    double action = 0.0;
    /// max over one period of |x_n - x_0 - 2 pi n s/q|
    double translation = 0.0;
    bool translation_ok = false;
    bool increasing = false;
    bool comparable = false;
    std::size_t comparability_violations = 0;
};

/// Recomputes the residuals of `orbit` from scratch. Comparability is checked
/// for every translate x_{n+q'} + 2 pi s' with |s'| <= s and |q'| <= q.
inline OrbitReport orbit_residuals(const GeneratingFunction& gf, const Orbit& orbit, double tol = 1e-9) {
    OrbitReport rep;
    const std::size_t nq = static_cast<std::size_t>(orbit.q);
    std::vector<GeneratingSample> g(nq);
    for (std::size_t n = 0; n < nq; ++n) g[n] = gf.h_eval(orbit.x[n], orbit.x[n + 1]);
    for (std::size_t n = 0; n < nq; ++n) {
        rep.el = std::max(rep.el, std::abs(g[n].d1h + g[(n + nq - 1) % nq].d2h));
        rep.action += g[n].h;
        const PoincareResult p = gf.flow().poincare(g[n].R, orbit.x[n]);
        rep.map = std::max({rep.map, std::abs(p.r1 - g[(n + 1) % nq].R), std::abs(p.theta1 - orbit.x[n + 1])});
    }
    const double step = kTwoPi * orbit.rotation();
    rep.increasing = true;
    for (std::size_t n = 0; n <= nq; ++n) {
        rep.translation = std::max(rep.translation, std::abs(orbit.x[n] - orbit.x[0] - step * static_cast<double>(n)));
        if (n > 0 && !(orbit.x[n] > orbit.x[n - 1])) rep.increasing = false;
    }
    rep.translation_ok = rep.translation < kTwoPi;
    const long sa = std::max<long>(std::abs(orbit.s), 1);
    for (long qq = -orbit.q; qq <= orbit.q; ++qq) {
        for (long ss = -sa; ss <= sa; ++ss) {
            int sign = 0;
            bool ok = true;
            for (long n = 0; n < orbit.q && ok; ++n) {
                const double diff = orbit.x_at(n + qq) + kTwoPi * static_cast<double>(ss) - orbit.x_at(n);
                const int sg = diff > tol ? 1 : (diff < -tol ? -1 : 0);
                if (n == 0)
                    sign = sg;
                else if (sg != sign)
                    ok = false;
            }
            if (!ok) ++rep.comparability_violations;
        }
    }
    rep.comparable = rep.comparability_violations == 0;
    return rep;
}

/// Largest eigenvalue modulus of the period-q monodromy Y(r_{q-1}) ... Y(r_0)
/// along the orbit, from the adaptive map. 1 for elliptic or parabolic orbits.
inline double orbit_multiplier(const VortexFlow& flow, const Orbit& orbit) {
    Mat2 m = kIdentity2;
    for (long n = 0; n < orbit.q; ++n) {
        const auto k = static_cast<std::size_t>(n);
        const Mat2 y = flow.poincare(orbit.r[k], orbit.x[k]).Y1;
        Mat2 next{};
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) next[i][j] = y[i][0] * m[0][j] + y[i][1] * m[1][j];
        m = next;
    }
    const double half_tr = 0.5 * (m[0][0] + m[1][1]);
    const double disc = half_tr * half_tr - det(m);
    if (disc <= 0.0) return std::sqrt(std::abs(det(m)));
    return std::abs(half_tr) + std::sqrt(disc);
}

struct RotationEstimate {
    double alpha_hat = 0.0;
    /// standard error of the fitted slope
    double error = 0.0;
    std::vector<double> x;
    std::vector<double> r;
};

/// Iterates the adaptive Poincare map n_iter times and fits the slope of
/// x_n / (2 pi) against n over the last half. Leaving the strip r > r_floor
/// throws DomainExit carrying the escape index.
inline RotationEstimate rotation_number(const VortexFlow& flow, double r0, double theta0, std::size_t n_iter,
                                        std::optional<double> r_floor = std::nullopt) {
    if (n_iter < 2) throw ConfigError("rotation_number needs at least two iterates");
    RotationEstimate est;
    est.x.reserve(n_iter + 1);
    est.r.reserve(n_iter + 1);
    double r = r0, th = theta0;
    est.x.push_back(th);
    est.r.push_back(r);
    for (std::size_t n = 1; n <= n_iter; ++n) {
        PoincareResult p;
        try {
            p = flow.poincare(r, th);
        } catch (const DomainExit& e) {
            throw DomainExit(std::string("iterate left the domain: ") + e.what(), e.t_exit(), static_cast<long>(n));
        }
        r = p.r1;
        th = p.theta1;
        if (r_floor && !(r > *r_floor))
            throw DomainExit("iterate " + std::to_string(n) + " left the strip", 1.0, static_cast<long>(n));
        est.x.push_back(th);
        est.r.push_back(r);
    }
    const std::size_t start = n_iter / 2;
    std::vector<double> ns, xs;
    for (std::size_t n = start; n <= n_iter; ++n) {
        ns.push_back(static_cast<double>(n));
        xs.push_back(est.x[n] / kTwoPi);
    }
    const LineFit fit = fit_line(ns, xs);
    est.alpha_hat = fit.slope;
    est.error = fit.slope_stderr;
    return est;
}

struct Convergent {
    long s = 0;
    long q = 1;
};

/// Continued-fraction convergents of alpha. A convergent is dropped when the
/// next one has the same denominator (so the golden mean gives 2/1, 3/2, ...).
/// Throws DepthError when a needed denominator exceeds q_cap.
inline std::vector<Convergent> convergents(double alpha, std::size_t depth, long q_cap = 377) {
    if (!(alpha > 0.0) || !std::isfinite(alpha)) throw ConfigError("alpha must be positive and finite");
    std::vector<Convergent> out;
    long h2 = 0, h1 = 1, k2 = 1, k1 = 0;
    double rem = alpha;
    Convergent pending{};
    bool have_pending = false;
    for (int guard = 0; guard < 64; ++guard) {
        const double a = std::floor(rem);
        const long ai = static_cast<long>(a);
        const long h = ai * h1 + h2, k = ai * k1 + k2;
        h2 = h1;
        h1 = h;
        k2 = k1;
        k1 = k;
        if (have_pending && pending.q != k) {
            out.push_back(pending);
            if (out.size() == depth) return out;
        }
        if (k > q_cap)
            throw DepthError("convergent denominator " + std::to_string(k) + " exceeds the cap " + std::to_string(q_cap));
        pending = {h, k};
        have_pending = true;
        const double frac = rem - a;
        if (frac < 1e-12 * std::max(1.0, rem)) break;
        rem = 1.0 / frac;
    }
    if (have_pending && out.size() < depth) out.push_back(pending);
    if (out.size() < depth) throw ConfigError("alpha is rational to working precision: expansion ends before depth");
    return out;
}

struct HullSamples {
    long s = 0;
    long q = 1;
    /// xi_j = 2 pi j / q
    std::vector<double> xi;
    std::vector<double> phi;
    std::vector<double> eta;
    std::size_t monotonicity_violations = 0;
    /// largest step of phi between neighbouring samples (wrap included)
    double max_jump = 0.0;

    /// phi and eta at xi_j shifted by k whole samples, using phi(xi + 2 pi) = phi(xi) + 2 pi.
    double phi_at(long j) const {
        const long m = ((j % q) + q) % q;
        return phi[static_cast<std::size_t>(m)] + kTwoPi * static_cast<double>((j - m) / q);
    }
    double eta_at(long j) const { return eta[static_cast<std::size_t>(((j % q) + q) % q)]; }
};

/// Hull samples of a periodic orbit: xi_n = 2 pi n s/q mod 2 pi,
/// phi(xi_n) = x_n - 2 pi floor(n s/q), eta(xi_n) = r_n. Monotonicity is
/// checked, not enforced.
inline HullSamples hull_from_orbit(const Orbit& orbit) {
    HullSamples h;
    h.s = orbit.s;
    h.q = orbit.q;
    const std::size_t nq = static_cast<std::size_t>(orbit.q);
    h.xi.resize(nq);
    h.phi.resize(nq);
    h.eta.resize(nq);
    for (long n = 0; n < orbit.q; ++n) {
        const long ns = n * orbit.s;
        const long j = ((ns % orbit.q) + orbit.q) % orbit.q;
        const long wraps = (ns - j) / orbit.q;
        h.xi[static_cast<std::size_t>(j)] = kTwoPi * static_cast<double>(j) / static_cast<double>(orbit.q);
        h.phi[static_cast<std::size_t>(j)] = orbit.x[static_cast<std::size_t>(n)] - kTwoPi * static_cast<double>(wraps);
        h.eta[static_cast<std::size_t>(j)] = orbit.r[static_cast<std::size_t>(n)];
    }
    for (long j = 0; j < orbit.q; ++j) {
        const double step = h.phi_at(j + 1) - h.phi_at(j);
        if (step < 0.0) ++h.monotonicity_violations;
        h.max_jump = std::max(h.max_jump, step);
    }
    return h;
}

/// max over samples of |P(eta(xi), phi(xi)) - (eta(xi + 2 pi s/q), phi(xi + 2 pi s/q))|.
inline double hull_map_residual(const VortexFlow& flow, const HullSamples& h, unsigned jobs = 1) {
    std::vector<double> dev(static_cast<std::size_t>(h.q), 0.0);
    parallel_for(dev.size(), jobs, [&](std::size_t j) {
        const long jj = static_cast<long>(j);
        const PoincareResult p = flow.poincare(h.eta_at(jj), h.phi_at(jj));
        dev[j] = std::max(std::abs(p.r1 - h.eta_at(jj + h.s)), std::abs(p.theta1 - h.phi_at(jj + h.s)));
    });
    return *std::max_element(dev.begin(), dev.end());
}

enum class MatherClass { curve, cantor_candidate, inconclusive };

inline const char* to_string(MatherClass c) {
    switch (c) {
        case MatherClass::curve: return "curve";
        case MatherClass::cantor_candidate: return "cantor-candidate";
        default: return "inconclusive";
    }
}

struct MatherSet {
    double alpha = 0.0;
    std::vector<Convergent> convergents;
    std::vector<Orbit> orbits;
    /// largest spacing of {x_n mod 2 pi} per convergent
    std::vector<double> gaps;
    double largest_gap = 0.0;
    /// curve threshold 4 pi / q for the deepest convergent
    double gap_threshold = 0.0;
    MatherClass classification = MatherClass::inconclusive;
    HullSamples hull;
};

/// Largest spacing between consecutive points of {x_n mod 2 pi} on the circle.
inline double largest_circle_gap(const Orbit& orbit) {
    std::vector<double> u;
    for (long n = 0; n < orbit.q; ++n) u.push_back(wrap_2pi(orbit.x[static_cast<std::size_t>(n)]));
    std::sort(u.begin(), u.end());
    double gap = u.front() + kTwoPi - u.back();
    for (std::size_t k = 1; k < u.size(); ++k) gap = std::max(gap, u[k] - u[k - 1]);
    return gap;
}

/// Convergent orbits s_k/q_k of alpha, gap statistic and hull samples from the
/// deepest orbit. Classification: curve if the deepest gap is below 4 pi/q;
/// cantor-candidate if the last two gaps both exceed their thresholds and
/// agree within 25%; inconclusive otherwise.
inline MatherSet mather_set(const GeneratingFunction& gf, const FrequencyWindow& window, double alpha,
                            std::size_t depth, const OrbitOptions& opt = {}, long q_cap = 377) {
    if (depth < 1) throw ConfigError("depth must be at least 1");
    if (!(alpha > window.alpha_threshold)) throw WindowError("alpha is not above the admissibility threshold");
    MatherSet ms;
    ms.alpha = alpha;
    ms.convergents = convergents(alpha, depth, q_cap);
    for (const auto& c : ms.convergents) {
        ms.orbits.push_back(periodic_orbit(gf, window, c.s, c.q, std::nullopt, opt));
        ms.gaps.push_back(largest_circle_gap(ms.orbits.back()));
    }
    const Orbit& deep = ms.orbits.back();
    ms.largest_gap = ms.gaps.back();
    ms.gap_threshold = 2.0 * kTwoPi / static_cast<double>(deep.q);
    if (ms.largest_gap < ms.gap_threshold) {
        ms.classification = MatherClass::curve;
    } else if (ms.gaps.size() >= 2) {
        const double prev = ms.gaps[ms.gaps.size() - 2];
        const double prev_thr = 2.0 * kTwoPi / static_cast<double>(ms.orbits[ms.orbits.size() - 2].q);
        if (prev > prev_thr && std::abs(ms.largest_gap - prev) < 0.25 * ms.largest_gap)
            ms.classification = MatherClass::cantor_candidate;
    }
    ms.hull = hull_from_orbit(deep);
    return ms;
}

struct FamilyReport {
    /// max discrepancy of (r, theta)_{xi + 2 pi} = (r, theta)_xi + (0, 2 pi)
    double shift_discrepancy = 0.0;
    /// max discrepancy of (r, theta)_xi(t + 1) = (r, theta)_{xi + 2 pi alpha}(t)
    double time_discrepancy = 0.0;
    double min_theta_dot = std::numeric_limits<double>::infinity();
    /// max |r(t) - r(0)| over the sampled trajectories
    double max_r_excursion = 0.0;
    bool clockwise = true;
    /// largest distance from a requested xi to the hull sample used
    double max_xi_snap = 0.0;
    bool pass = false;
};

/// Integrates the flow from hull initial conditions and checks the two
/// translation relations of the solution family at every t in t_samples
/// (inside [0, 1]).
inline FamilyReport verify_solution_family(const VortexFlow& flow, const HullSamples& h,
                                           const std::vector<double>& xi_samples, const std::vector<double>& t_samples,
                                           double tol = 1e-5) {
    FamilyReport rep;
    std::vector<double> times, times2;
    for (double t : t_samples) {
        if (!(t > 0.0 && t <= 1.0)) throw ConfigError("t samples must lie in (0, 1]");
        times.push_back(t);
    }
    std::sort(times.begin(), times.end());
    times.erase(std::unique(times.begin(), times.end()), times.end());
    times2 = times;
    if (times2.back() != 1.0) times2.push_back(1.0);
    for (double t : times) times2.push_back(t + 1.0);
    const double dxi = kTwoPi / static_cast<double>(h.q);
    for (double xi : xi_samples) {
        const long j = std::lround(xi / dxi);
        rep.max_xi_snap = std::max(rep.max_xi_snap, std::abs(xi - dxi * static_cast<double>(j)));
        const AugmentedState s0{h.eta_at(j), h.phi_at(j)};
        const AugmentedState s_shift{h.eta_at(j + h.q), h.phi_at(j + h.q)};
        const AugmentedState s_next{h.eta_at(j + h.s), h.phi_at(j + h.s)};
        const Trajectory a = flow.integrate(s0, 0.0, 2.0, true, times2);
        const Trajectory b = flow.integrate(s_shift, 0.0, 1.0, false, times);
        const Trajectory c = flow.integrate(s_next, 0.0, 1.0, false, times);
        auto at = [](const Trajectory& tr, double t) -> const AugmentedState& {
            for (const auto& p : tr.points)
                if (p.t == t) return p.state;
            throw Error("sample time missing from trajectory");
        };
        for (double t : times) {
            const AugmentedState& ua = at(a, t);
            const AugmentedState& ub = at(b, t);
            rep.shift_discrepancy =
                std::max({rep.shift_discrepancy, std::abs(ub.r - ua.r), std::abs(ub.theta - ua.theta - kTwoPi)});
            const AugmentedState& ua1 = at(a, t + 1.0);
            const AugmentedState& uc = at(c, t);
            rep.time_discrepancy =
                std::max({rep.time_discrepancy, std::abs(ua1.r - uc.r), std::abs(ua1.theta - uc.theta)});
        }
        for (const auto& p : a.points) {
            if (p.t > 1.0) break;
            const ComposedJet jet = compose_perturbation(flow.perturbation(), p.t, p.state.r, p.state.theta);
            rep.min_theta_dot = std::min(rep.min_theta_dot, 2.0 * p.state.r + regularized_field_from_jet(jet, p.state.r).G);
            rep.max_r_excursion = std::max(rep.max_r_excursion, std::abs(p.state.r - s0.r));
        }
        if (!(at(a, 1.0).theta - s0.theta > 0.0)) rep.clockwise = false;
    }
    rep.pass = rep.shift_discrepancy < tol && rep.time_discrepancy < tol && rep.min_theta_dot > 0.0 && rep.clockwise;
    return rep;
}

}  // namespace vortwist
