#pragma once

// Time-1 map of the regularized system together with its variational matrix
// and the action primitive S, integrated as one 7-component system.

#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vortwist/errors.hpp"
#include "vortwist/integrator.hpp"
#include "vortwist/model.hpp"

namespace vortwist {

/// f(r) = -1/(4r): the area form dr ^ dtheta / (4 r^2) equals df ^ dtheta.
struct SymplecticWeight {
    static double f(double r) { return -1.0 / (4.0 * r); }
    static double df(double r) { return 1.0 / (4.0 * r * r); }
    static double inverse(double v) { return -1.0 / (4.0 * v); }
};

struct FlowOptions {
    double rtol = 1e-10;
    double atol = 1e-12;
    double max_step = 1e-2;
    std::size_t max_steps = 20'000'000;
    /// Fixed-step resolution of the smooth map: steps per period of the
    /// fastest angular harmonic.
    double smooth_steps_per_period = 64.0;
};

struct AugmentedState {
    double r = 0.0;
    double theta = 0.0;
    Mat2 Y = kIdentity2;
    double action = 0.0;
};

struct TrajectoryPoint {
    double t = 0.0;
    AugmentedState state;
};

struct Trajectory {
    std::vector<TrajectoryPoint> points;
    AugmentedState final_state;
    double final_advance = 0.0;
    OdeStats stats;
};

struct PoincareResult {
    double r0 = 0.0;
    double theta0 = 0.0;
    double r1 = 0.0;
    double theta1 = 0.0;
    /// theta1 - theta0 as integrated, free of the rounding in theta0 + advance
    double advance = 0.0;
    Mat2 Y1 = kIdentity2;
    double S = 0.0;
    bool domain_exit = false;

    /// dG/dr0, the twist derivative.
    double twist() const { return Y1[1][0]; }
};

class VortexFlow {
public:
    explicit VortexFlow(Perturbation p, FlowOptions opts = {}, std::optional<C1Estimate> bounds = std::nullopt)
        : p_(std::move(p)), opts_(opts),
          bounds_(bounds ? *bounds : bound_constant_C1(p_, C1Grid::standard(p_))) {
        if (!(opts_.rtol > 0.0 && opts_.atol > 0.0 && opts_.max_step > 0.0))
            throw ConfigError("integrator tolerances and max step must be positive");
    }

    const Perturbation& perturbation() const { return p_; }
    const FlowOptions& options() const { return opts_; }
    const C1Estimate& bounds() const { return bounds_; }
    double r_star() const { return p_.r_star(); }
    double a_star() const { return bounds_.a_star; }

    VortexFlow with_tolerances(double rtol, double atol) const {
        FlowOptions o = opts_;
        o.rtol = rtol;
        o.atol = atol;
        return VortexFlow(p_, o, bounds_);
    }

    /// Integrates from t0 to t1. With `dense`, every accepted step is
    /// recorded; times in `sample_times` are always hit exactly and recorded.
    Trajectory integrate(const AugmentedState& s0, double t0, double t1, bool dense = false,
                         std::span<const double> sample_times = {}) const {
        require_start(s0.r);
        Trajectory traj;
        const double theta_ref = s0.theta;
        State y = pack(s0, theta_ref);
        if (dense || !sample_times.empty()) traj.points.push_back({t0, s0});
        auto rhs = [this, theta_ref](double t, const State& u, State& du) { eval_rhs(t, u, theta_ref, du); };
        auto hook = [&](double t, const State& u, bool is_stop) {
            if (!(u[0] > p_.r_star()))
                throw DomainExit("trajectory left the domain r > r* at t = " + std::to_string(t), t);
            if (dense || is_stop) traj.points.push_back({t, unpack(u, theta_ref)});
        };
        OdeOptions o{opts_.rtol, opts_.atol, opts_.max_step, 1e-14, opts_.max_steps};
        traj.stats = integrate_adaptive<7>(rhs, t0, y, t1, o, sample_times, hook);
        traj.final_state = unpack(y, theta_ref);
        traj.final_advance = y[1];
        return traj;
    }

    /// Adaptive time-1 map. Throws DomainExit if r0 <= a* or the orbit exits.
    PoincareResult poincare(double r0, double theta0) const {
        AugmentedState s0{r0, theta0, kIdentity2, 0.0};
        const Trajectory tr = integrate(s0, 0.0, 1.0);
        return to_result(r0, theta0, tr.final_state, tr.final_advance);
    }

    /// Same as poincare() but reports a domain exit through the flag.
    PoincareResult try_poincare(double r0, double theta0) const {
        try {
            return poincare(r0, theta0);
        } catch (const DomainExit&) {
            PoincareResult res;
            res.r0 = r0;
            res.theta0 = theta0;
            res.domain_exit = true;
            return res;
        }
    }

    /// Time-1 map with `steps` uniform steps: a smooth function of (r0, theta0).
    PoincareResult poincare_smooth(double r0, double theta0, std::size_t steps) const {
        require_start(r0);
        AugmentedState s0{r0, theta0, kIdentity2, 0.0};
        State y = pack(s0, theta0);
        auto rhs = [this, theta0](double t, const State& u, State& du) { eval_rhs(t, u, theta0, du); };
        auto hook = [&](double t, const State& u, bool) {
            if (!(u[0] > p_.r_star()))
                throw DomainExit("trajectory left the domain r > r* at t = " + std::to_string(t), t);
        };
        integrate_fixed<7>(rhs, 0.0, y, 1.0, steps, hook);
        return to_result(r0, theta0, unpack(y, theta0), y[1]);
    }

    /// Step count for poincare_smooth() valid for all r0 <= r_max.
    std::size_t smooth_step_count(double r_max) const {
        const int k = std::max(1, p_.max_total_degree());
        const double omega = 2.0 * r_max * static_cast<double>(k) + kTwoPi * max_time_harmonic();
        const double periods = omega / kTwoPi;
        return static_cast<std::size_t>(std::ceil(std::max(64.0, periods * opts_.smooth_steps_per_period)));
    }

private:
    using State = std::array<double, 7>;

    void require_start(double r0) const {
        if (!(r0 > bounds_.a_star))
            throw DomainExit("initial radius " + std::to_string(r0) + " is not above a* = " +
                             std::to_string(bounds_.a_star));
    }

    double max_time_harmonic() const {
        std::size_t m = 0;
        for (const auto* terms : {&p_.leading(), &p_.remainder()})
            for (const auto& t : *terms) m = std::max({m, t.coef.cos_terms.size(), t.coef.sin_terms.size()});
        return static_cast<double>(m);
    }

    // State layout: r, theta - theta_ref, Y00, Y01, Y10, Y11, action.
    static State pack(const AugmentedState& s, double theta_ref) {
        return {s.r, s.theta - theta_ref, s.Y[0][0], s.Y[0][1], s.Y[1][0], s.Y[1][1], s.action};
    }
    static AugmentedState unpack(const State& u, double theta_ref) {
        return {u[0], theta_ref + u[1], Mat2{{{u[2], u[3]}, {u[4], u[5]}}}, u[6]};
    }

    static PoincareResult to_result(double r0, double theta0, const AugmentedState& s, double advance) {
        PoincareResult res;
        res.r0 = r0;
        res.theta0 = theta0;
        res.r1 = s.r;
        res.theta1 = s.theta;
        res.advance = advance;
        res.Y1 = s.Y;
        res.S = s.action;
        return res;
    }

    void eval_rhs(double t, const State& u, double theta_ref, State& du) const {
        const double r = u[0];
        if (!(r > 0.0)) {
            du.fill(std::numeric_limits<double>::quiet_NaN());
            return;
        }
        const ComposedJet jet = compose_perturbation(p_, t, r, theta_ref + u[1]);
        const RegularizedField f = regularized_field_from_jet(jet, r);
        const Mat2 m = field_jacobian_from_jet(jet, r);
        du[0] = f.F;
        du[1] = 2.0 * r + f.G;
        du[2] = m[0][0] * u[2] + m[0][1] * u[4];
        du[3] = m[0][0] * u[3] + m[0][1] * u[5];
        du[4] = m[1][0] * u[2] + m[1][1] * u[4];
        du[5] = m[1][0] * u[3] + m[1][1] * u[5];
        // -(f/f' dH/dr - H) with f/f' = -r and H = -ln(2r)/2 + p.
        du[6] = -0.5 * std::log(2.0 * r) - 0.5 + jet.value + r * jet.d_r;
    }

    Perturbation p_;
    FlowOptions opts_;
    C1Estimate bounds_;
};

struct ConjugacyReport {
    double discrepancy_r = 0.0;
    double discrepancy_theta = 0.0;
    /// max of the two, in regularized coordinates
    double discrepancy = 0.0;
};

/// Integrates the Cartesian system and the regularized system from the same
/// initial point over [0, 1] and compares them at 32 sample times in (r, theta).
/// `tol` is the relative tolerance of the regularized integration; the
/// Cartesian reference runs at min(tol, 1e-12).
inline ConjugacyReport conjugacy_check(const VortexFlow& flow, double x0, double y0, double tol) {
    const Perturbation& p = flow.perturbation();
    if (!p.in_disk(x0, y0)) throw DomainError("initial point outside the epsilon-disk");
    const RegularizedPoint reg0 = to_regularized(x0, y0);

    std::vector<double> samples;
    for (int k = 1; k <= 32; ++k) samples.push_back(static_cast<double>(k) / 32.0);

    const VortexFlow tuned = flow.with_tolerances(tol, tol * 1e-2);
    const Trajectory tr = tuned.integrate(AugmentedState{reg0.r, reg0.theta}, 0.0, 1.0, false, samples);

    // Cartesian side.
    const double singular_rho2 = 1e-14;
    std::vector<CartesianPoint> cart;
    auto rhs = [&p, singular_rho2](double t, const std::array<double, 2>& u, std::array<double, 2>& du) {
        const double rho2 = u[0] * u[0] + u[1] * u[1];
        if (rho2 < singular_rho2) throw SingularityError("Cartesian trajectory reached the vortex");
        if (!p.in_disk(u[0], u[1])) {
            du = {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
            return;
        }
        const Velocity v = cartesian_field(p, t, u[0], u[1]);
        du = {v.xdot, v.ydot};
    };
    auto hook = [&](double t, const std::array<double, 2>& u, bool is_stop) {
        if (!p.in_disk(u[0], u[1]))
            throw DomainExit("Cartesian trajectory left the epsilon-disk at t = " + std::to_string(t), t);
        if (is_stop) cart.push_back({u[0], u[1]});
    };
    std::array<double, 2> y{x0, y0};
    // Cartesian components are O(1/sqrt(2r)); scale atol accordingly.
    const double rho0 = std::sqrt(x0 * x0 + y0 * y0);
    const double ref_tol = std::min(tol, 1e-12);
    OdeOptions o{ref_tol, ref_tol * 1e-2 * rho0, flow.options().max_step, 1e-16, flow.options().max_steps};
    integrate_adaptive<2>(rhs, 0.0, y, 1.0, o, samples, hook);

    ConjugacyReport rep;
    for (std::size_t k = 0; k < samples.size(); ++k) {
        const auto& s = tr.points[k + 1].state;
        const RegularizedPoint rc = to_regularized(cart[k].x, cart[k].y);
        // lift the Cartesian angle next to the regularized lift
        const double theta_c = rc.theta + kTwoPi * std::round((s.theta - rc.theta) / kTwoPi);
        rep.discrepancy_r = std::max(rep.discrepancy_r, std::abs(rc.r - s.r));
        rep.discrepancy_theta = std::max(rep.discrepancy_theta, std::abs(theta_c - s.theta));
    }
    rep.discrepancy = std::max(rep.discrepancy_r, rep.discrepancy_theta);
    return rep;
}

}  // namespace vortwist
