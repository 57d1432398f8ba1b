#pragma once

// The invariant suite behind `verify` and the acceptance runner. Every check
// returns its measured values, the threshold it was held to, and pass/fail.

#include <chrono>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "vortwist/config.hpp"
#include "vortwist/diagnostics.hpp"
#include "vortwist/generating.hpp"
#include "vortwist/io.hpp"
#include "vortwist/mather.hpp"
#include "vortwist/poincare.hpp"

namespace vortwist {

inline constexpr double kGoldenMean = 1.6180339887498949;

/// Flow, strip, window and generating function built from one config.
struct Context {
    RunConfig config;
    VortexFlow flow;
    WorkingStrip strip;
    FrequencyWindow window;
    GeneratingFunction gf;
    unsigned jobs = 1;

    static Context build(const RunConfig& cfg, unsigned jobs) {
        VortexFlow flow(cfg.perturbation, cfg.integrator);
        WorkingStrip strip = working_strip(flow, cfg.strip, jobs);
        FrequencyWindow window = boundary_frequencies(flow, strip.r_bar, uniform_angles(cfg.window_theta), std::nullopt, jobs);
        GeneratingFunction gf(flow, strip.K);
        return Context{cfg, std::move(flow), std::move(strip), std::move(window), std::move(gf), jobs};
    }

    OrbitOptions orbit_options() const {
        OrbitOptions o = config.solver;
        o.jobs = jobs;
        return o;
    }
};

namespace detail {

/// Weyl sequence frac(k * a): deterministic, well spread on [0, 1).
inline double weyl(std::size_t k, double a) {
    const double v = static_cast<double>(k) * a;
    return v - std::floor(v);
}

inline double elapsed_s(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace detail

/// P, Y(1) and S of the unperturbed map against closed forms on an n x n grid.
inline Check check_integrable(const Context& ctx, std::size_t n = 10, double tol = 1e-9) {
    const VortexFlow flow(Perturbation::zero(ctx.config.perturbation.epsilon()), ctx.config.integrator);
    const auto rs = linear_points(5.0, 100.0, n);
    const auto ths = uniform_angles(n);
    std::vector<std::array<double, 3>> err(n * n);
    parallel_for(n * n, ctx.jobs, [&](std::size_t k) {
        const double r0 = rs[k / n], th0 = ths[k % n];
        const PoincareResult p = flow.poincare(r0, th0);
        const Mat2 y{{{1.0, 0.0}, {2.0, 1.0}}};
        err[k] = {std::max(std::abs(p.r1 - r0), std::abs(p.theta1 - (th0 + 2.0 * r0))), max_abs_diff(p.Y1, y),
                  std::abs(p.S - (-0.5 - 0.5 * std::log(2.0 * r0)))};
    });
    std::array<double, 3> m{};
    for (const auto& e : err)
        for (int i = 0; i < 3; ++i) m[i] = std::max(m[i], e[i]);
    return {"integrable_exactness",
            {{"max_map_error", m[0]}, {"max_monodromy_error", m[1]}, {"max_action_error", m[2]}, {"grid", n}},
            tol,
            m[0] < tol && m[1] < tol && m[2] < tol};
}

/// |det Y(1) - (r1/r0)^2| relative to (r1/r0)^2.
inline Check check_symplectic(const Context& ctx, std::size_t n = 20, double tol = 1e-8) {
    const auto rs = linear_points(5.0, 100.0, n);
    const auto ths = uniform_angles(n);
    std::vector<double> dev(n * n);
    parallel_for(n * n, ctx.jobs, [&](std::size_t k) {
        const double r0 = rs[k / n];
        const PoincareResult p = ctx.flow.poincare(r0, ths[k % n]);
        const double ref = (p.r1 / r0) * (p.r1 / r0);
        dev[k] = std::abs(det(p.Y1) - ref) / ref;
    });
    const double m = *std::max_element(dev.begin(), dev.end());
    return {"symplectic_defect", {{"max_relative_defect", m}, {"grid", n}}, tol, m < tol};
}

inline Check check_exactness(const Context& ctx, std::size_t n = 20, double tol = 1e-6) {
    const ExactnessReport rep =
        exactness_residual(ctx.flow, linear_points(5.0, 100.0, n), uniform_angles(n), 1e-3, true, ctx.jobs);
    return {"map_exactness",
            {{"max_residual", rep.max_residual}, {"at_r0", rep.at_r0}, {"at_theta0", rep.at_theta0}, {"grid", n}},
            tol,
            rep.max_residual < tol};
}

/// sup_theta |dG/dr0 - 2| strictly decreasing over r0 = 10, 100, 1000 and
/// below `tol` at the last radius. An unperturbed config must give zero.
inline Check check_twist(const Context& ctx, std::size_t n_theta = 64, double tol = 0.01) {
    const TwistScan scan = twist_scan(ctx.flow, {10.0, 100.0, 1000.0}, uniform_angles(n_theta), ctx.jobs, 3);
    const bool trivial = ctx.config.perturbation.is_zero();
    const bool pass = scan.missing == 0 && scan.sup_dev_by_r.back() < tol &&
                      (trivial ? scan.sup_dev < 1e-9 : scan.strictly_decreasing());
    return {"twist_limit",
            {{"r0", scan.r_grid},
             {"sup_dev", scan.sup_dev_by_r},
             {"strictly_decreasing", scan.strictly_decreasing()},
             {"fd_max_discrepancy", scan.fd_max_discrepancy},
             {"min_twist", scan.min_twist}},
            tol,
            pass};
}

/// At n points of B: d1h = -f(R), d2h = f(R1) against Richardson differences
/// of h, d12h < 0; and the unperturbed closed form of h.
inline Check check_generating(const Context& ctx, std::size_t n = 100, double tol = 1e-7, double tol_closed = 1e-9) {
    const GeneratingFunction gf0(VortexFlow(Perturbation::zero(ctx.config.perturbation.epsilon()), ctx.config.integrator), 0.0);
    const GeneratingFunction& gf = ctx.gf;
    std::vector<std::array<double, 4>> res(n);
    const double fd = 1e-3;
    parallel_for(n, ctx.jobs, [&](std::size_t k) {
        const double x = kTwoPi * detail::weyl(k + 1, 0.6180339887498949);
        const double lo = kTwoPi * ctx.window.alpha_minus_at(x) + 0.5;
        const double d = lo + (kTwoPi * 30.0 - lo) * detail::weyl(k + 1, 0.41421356237309515);
        const double x1 = x + d;
        const GeneratingSample g = gf.h_eval(x, x1);
        auto diff = [&](double hx, double hy) {
            auto c = [&](double s) {
                return (gf.h_eval(x + s * hx, x1 + s * hy).h - gf.h_eval(x - s * hx, x1 - s * hy).h) / (2.0 * s);
            };
            return (4.0 * c(0.5 * fd) - c(fd)) / 3.0;
        };
        const double e1 = std::abs(diff(1.0, 0.0) + SymplecticWeight::f(g.R));
        const double e2 = std::abs(diff(0.0, 1.0) - SymplecticWeight::f(g.R1));
        const double h0 = gf0.h_eval(x, x1).h;
        res[k] = {e1, e2, g.d12h, std::abs(h0 - (-0.5 - 0.5 * std::log(d)))};
    });
    double m1 = 0.0, m2 = 0.0, d12 = -std::numeric_limits<double>::infinity(), mc = 0.0;
    for (const auto& r : res) {
        m1 = std::max(m1, r[0]);
        m2 = std::max(m2, r[1]);
        d12 = std::max(d12, r[2]);
        mc = std::max(mc, r[3]);
    }
    return {"generating_identities",
            {{"max_d1h_error", m1},
             {"max_d2h_error", m2},
             {"max_d12h", d12},
             {"max_closed_form_error", mc},
             {"closed_form_threshold", tol_closed},
             {"points", n}},
            tol,
            m1 < tol && m2 < tol && d12 < 0.0 && mc < tol_closed};
}

/// Periodic orbits: residuals, rotation number of the orbit under P, and the
/// translation bound |x_n - x_0 - 2 pi n s/q| < 2 pi over three periods.
/// Iterates for the rotation number: at most `rotation_iterates`, fewer for a
/// hyperbolic orbit, always a whole number of double periods.
inline Check check_orbits(const Context& ctx, const std::vector<std::pair<long, long>>& sq = {{1, 1}, {3, 2}, {7, 2}, {22, 7}},
                          std::size_t rotation_iterates = 2000) {
    json per = json::array();
    bool pass = true;
    for (auto [s, q] : sq) {
        json e{{"s", s}, {"q", q}};
        try {
            const Orbit o = periodic_orbit(ctx.gf, ctx.window, s, q, std::nullopt, ctx.orbit_options());
            // per-iterate integration error (~1e-12) must stay small after growing by multiplier^n
            const double mult = orbit_multiplier(ctx.flow, o);
            std::size_t iters = rotation_iterates;
            if (mult > 1.0 + 1e-12)
                iters = std::min(iters, static_cast<std::size_t>(std::log(1e4) / std::log(mult)));
            const auto period2 = static_cast<std::size_t>(2 * q);
            iters = std::max(iters / period2, std::size_t{10}) * period2;
            const double rho = rotation_number(ctx.flow, o.r[0], o.x[0], iters).alpha_hat;
            double trans = 0.0;
            for (long n = -3 * q; n <= 3 * q; ++n)
                trans = std::max(trans, std::abs(o.x_at(n) - o.x_at(0) - kTwoPi * static_cast<double>(n * s) / static_cast<double>(q)));
            const bool ok = o.el_residual < 1e-10 && o.map_residual < 1e-6 && std::abs(rho - o.rotation()) < 1e-8 &&
                            trans < kTwoPi;
            e.update({{"el_residual", o.el_residual},
                      {"map_residual", o.map_residual},
                      {"rotation_error", std::abs(rho - o.rotation())},
                      {"rotation_iterates", iters},
                      {"multiplier", mult},
                      {"translation", trans},
                      {"inside_theorem_window", o.inside_theorem_window},
                      {"pass", ok}});
            pass = pass && ok;
        } catch (const Error& err) {
            e.update({{"error", err.what()}, {"pass", false}});
            pass = false;
        }
        per.push_back(e);
    }
    return {"orbit_correctness", {{"orbits", per}, {"el_tol", 1e-10}, {"map_tol", 1e-6}, {"rotation_tol", 1e-8}}, 1e-6, pass};
}

/// Golden-mean Mather set: hull samples are carried to their shifts by P.
inline Check check_hull(const Context& ctx, std::size_t depth = 6, double tol = 1e-5) {
    const MatherSet ms = mather_set(ctx.gf, ctx.window, kGoldenMean, depth, ctx.orbit_options());
    const double res = hull_map_residual(ctx.flow, ms.hull, ctx.jobs);
    json conv = json::array();
    for (const auto& c : ms.convergents) conv.push_back(std::to_string(c.s) + "/" + std::to_string(c.q));
    return {"hull_relation",
            {{"alpha", ms.alpha},
             {"convergents", conv},
             {"hull_residual", res},
             {"monotonicity_violations", ms.hull.monotonicity_violations},
             {"classification", to_string(ms.classification)}},
            tol,
            res < tol && ms.hull.monotonicity_violations == 0};
}

inline Check check_riemann_lebesgue(double slope_max = -0.9, double c_rl_max = 10.0) {
    const OscillatoryResult r = oscillatory_decay(OscillatoryProbe::standard());
    return {"riemann_lebesgue_decay",
            {{"lambdas", r.lambdas},
             {"integrals", r.integrals},
             {"envelope", r.envelope},
             {"fitted_exponent", r.fitted_exponent},
             {"raw_exponent", r.raw_exponent},
             {"C_RL_hat", r.C_RL_hat},
             {"C_RL_threshold", c_rl_max},
             {"beta_dot_sup", r.beta_dot_sup}},
            slope_max,
            r.fitted_exponent <= slope_max && r.C_RL_hat < c_rl_max};
}

inline Check check_splitting(const Context& ctx, double factor = 3.0) {
    const SplittingScan s = splitting_scan(ctx.config.perturbation, geometric_points(10.0, 1000.0, 5),
                                           linear_points(0.0, 0.95, 20), uniform_angles(36));
    return {"splitting_decay",
            {{"r", s.r_grid},
             {"sup_scaled", s.sup_scaled},
             {"ratio", s.ratio},
             {"b12_r_drift", s.b12_r_drift},
             {"max_split_defect", s.max_split_defect}},
            factor,
            s.bounded(factor) && s.b12_r_drift < 1e-12 && s.max_split_defect < 1e-10};
}

/// Monodromy approaches [[1,0],[2,1]]: strictly decreasing deviations and a
/// tenfold drop from first to last radius. Unperturbed: all below 1e-10.
inline Check check_monodromy(const Context& ctx) {
    const MonodromyScan m = monodromy_limit_scan(ctx.flow, {10.0, 100.0, 1000.0, 10000.0}, 0.3, ctx.jobs);
    const bool trivial = ctx.config.perturbation.is_zero();
    const double worst = *std::max_element(m.deviations.begin(), m.deviations.end());
    const bool pass = trivial ? worst < 1e-10
                              : m.monotone_decay && m.deviations.back() < m.deviations.front() / 10.0;
    return {"monodromy_limit",
            {{"r0", m.r0}, {"deviations", m.deviations}, {"monotone", m.monotone_decay}, {"beta_dot_sup", m.beta_dot_sup}},
            0.1,
            pass};
}

inline Check check_window(const Context& ctx, double tol = 1e-8) {
    const FrequencyWindow& w = ctx.window;
    return {"frequency_window",
            {{"r_bar", w.r_bar},
             {"W_minus", w.W_minus},
             {"alpha_threshold", w.alpha_threshold},
             {"theorem_threshold", w.theorem_threshold},
             {"periodicity_defect", w.periodicity_defect}},
            tol,
            w.periodicity_defect < tol};
}

struct TimedCheck {
    Check check;
    double seconds = 0.0;
};

/// Runs `fn`, turning library errors into a failed check.
inline TimedCheck run_check(const std::string& name, const std::function<Check()>& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    try {
        Check c = fn();
        return {std::move(c), detail::elapsed_s(t0)};
    } catch (const std::exception& e) {
        return {Check{name, {{"error", e.what()}}, 0.0, false}, detail::elapsed_s(t0)};
    }
}

/// The full suite in a fixed order.
inline std::vector<TimedCheck> run_suite(const Context& ctx) {
    std::vector<TimedCheck> out;
    out.push_back(run_check("integrable_exactness", [&] { return check_integrable(ctx); }));
    out.push_back(run_check("symplectic_defect", [&] { return check_symplectic(ctx); }));
    out.push_back(run_check("map_exactness", [&] { return check_exactness(ctx); }));
    out.push_back(run_check("twist_limit", [&] { return check_twist(ctx); }));
    out.push_back(run_check("frequency_window", [&] { return check_window(ctx); }));
    out.push_back(run_check("generating_identities", [&] { return check_generating(ctx); }));
    out.push_back(run_check("orbit_correctness", [&] { return check_orbits(ctx); }));
    out.push_back(run_check("hull_relation", [&] { return check_hull(ctx); }));
    out.push_back(run_check("riemann_lebesgue_decay", [] { return check_riemann_lebesgue(); }));
    out.push_back(run_check("splitting_decay", [&] { return check_splitting(ctx); }));
    out.push_back(run_check("monodromy_limit", [&] { return check_monodromy(ctx); }));
    return out;
}

}  // namespace vortwist
