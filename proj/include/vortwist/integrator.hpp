#pragma once

// Dormand-Prince 5(4) Runge-Kutta: adaptive with embedded error control, or
// fixed uniform steps (the latter gives a numerical flow that is a smooth
// function of the initial data).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <span>

#include "vortwist/errors.hpp"

namespace vortwist {

struct OdeOptions {
    double rtol = 1e-10;
    double atol = 1e-12;
    double max_step = 1e-2;
    double min_step = 1e-14;
    std::size_t max_steps = 20'000'000;
};

struct OdeStats {
    std::size_t accepted = 0;
    std::size_t rejected = 0;
    std::size_t rhs_evals = 0;
};

namespace dp54 {

inline constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
inline constexpr double a21 = 1.0 / 5;
inline constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
inline constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
inline constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                        a54 = -212.0 / 729;
inline constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                        a64 = 49.0 / 176, a65 = -5103.0 / 18656;
inline constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                        b6 = 11.0 / 84;
// b - b_hat
inline constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                        e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

template <std::size_t N>
struct Stages {
    std::array<double, N> k1, k2, k3, k4, k5, k6, k7, tmp;
};

/// One step from (t, y) with k1 = f(t, y) already in s.k1. Writes the
/// fifth-order solution to y_new and k7 = f(t + h, y_new).
template <std::size_t N, class Rhs>
void step(Rhs& rhs, double t, const std::array<double, N>& y, double h, Stages<N>& s,
          std::array<double, N>& y_new) {
    for (std::size_t i = 0; i < N; ++i) s.tmp[i] = y[i] + h * a21 * s.k1[i];
    rhs(t + c2 * h, s.tmp, s.k2);
    for (std::size_t i = 0; i < N; ++i) s.tmp[i] = y[i] + h * (a31 * s.k1[i] + a32 * s.k2[i]);
    rhs(t + c3 * h, s.tmp, s.k3);
    for (std::size_t i = 0; i < N; ++i)
        s.tmp[i] = y[i] + h * (a41 * s.k1[i] + a42 * s.k2[i] + a43 * s.k3[i]);
    rhs(t + c4 * h, s.tmp, s.k4);
    for (std::size_t i = 0; i < N; ++i)
        s.tmp[i] = y[i] + h * (a51 * s.k1[i] + a52 * s.k2[i] + a53 * s.k3[i] + a54 * s.k4[i]);
    rhs(t + c5 * h, s.tmp, s.k5);
    for (std::size_t i = 0; i < N; ++i)
        s.tmp[i] = y[i] + h * (a61 * s.k1[i] + a62 * s.k2[i] + a63 * s.k3[i] + a64 * s.k4[i] +
                               a65 * s.k5[i]);
    rhs(t + h, s.tmp, s.k6);
    for (std::size_t i = 0; i < N; ++i)
        y_new[i] = y[i] + h * (b1 * s.k1[i] + b3 * s.k3[i] + b4 * s.k4[i] + b5 * s.k5[i] + b6 * s.k6[i]);
    rhs(t + h, y_new, s.k7);
}

}  // namespace dp54

/// Adaptive integration of y' = rhs(t, y) from t0 to t1 > t0. The integrator
/// lands exactly on every time in `stops` (sorted, inside (t0, t1]) and calls
/// hook(t, y, is_stop) after each accepted step. rhs(t, y, dydt) must be
/// callable with std::array<double, N>.
template <std::size_t N, class Rhs, class Hook>
OdeStats integrate_adaptive(Rhs&& rhs, double t0, std::array<double, N>& y, double t1,
                            const OdeOptions& opt, std::span<const double> stops, Hook&& hook) {
    OdeStats stats;
    if (!(t1 > t0)) return stats;
    dp54::Stages<N> s;
    std::array<double, N> y_new;
    rhs(t0, y, s.k1);
    ++stats.rhs_evals;
    double t = t0;
    double h = std::min(opt.max_step, t1 - t0) * 0.1;
    std::size_t next_stop = 0;
    while (next_stop < stops.size() && stops[next_stop] <= t0) ++next_stop;

    while (t < t1) {
        if (stats.accepted + stats.rejected >= opt.max_steps)
            throw StepFailure("step budget exhausted at t = " + std::to_string(t));
        double target = t1;
        if (next_stop < stops.size()) target = std::min(target, stops[next_stop]);
        bool lands = false;
        double h_try = std::min(h, opt.max_step);
        if (t + h_try >= target || target - (t + h_try) < 1e-6 * h_try) {
            h_try = target - t;
            lands = true;
        }
        if (h_try < opt.min_step && !lands)
            throw StepFailure("step size underflow at t = " + std::to_string(t));

        dp54::step(rhs, t, y, h_try, s, y_new);
        stats.rhs_evals += 6;

        double err = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            const double sc = opt.atol + opt.rtol * std::max(std::abs(y[i]), std::abs(y_new[i]));
            const double e = h_try * (dp54::e1 * s.k1[i] + dp54::e3 * s.k3[i] + dp54::e4 * s.k4[i] +
                                      dp54::e5 * s.k5[i] + dp54::e6 * s.k6[i] + dp54::e7 * s.k7[i]);
            err = std::max(err, std::abs(e) / sc);
        }
        if (!std::isfinite(err)) err = 1e10;

        if (err <= 1.0) {
            t = lands ? target : t + h_try;
            y = y_new;
            s.k1 = s.k7;
            ++stats.accepted;
            bool is_stop = false;
            if (lands && next_stop < stops.size() && target == stops[next_stop]) {
                is_stop = true;
                ++next_stop;
            }
            hook(t, static_cast<const std::array<double, N>&>(y), is_stop);
            const double fac = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
            // A landing step may be artificially short; do not let it shrink h.
            h = lands ? std::max(h, h_try * fac) : h_try * fac;
        } else {
            ++stats.rejected;
            h = h_try * std::max(0.2, 0.9 * std::pow(err, -0.2));
            if (h < opt.min_step) throw StepFailure("step size underflow at t = " + std::to_string(t));
        }
    }
    return stats;
}

/// Fixed uniform steps of the fifth-order Dormand-Prince scheme.
template <std::size_t N, class Rhs, class Hook>
OdeStats integrate_fixed(Rhs&& rhs, double t0, std::array<double, N>& y, double t1, std::size_t steps,
                         Hook&& hook) {
    OdeStats stats;
    if (steps == 0) throw std::invalid_argument("fixed-step integration needs at least one step");
    dp54::Stages<N> s;
    std::array<double, N> y_new;
    const double h = (t1 - t0) / static_cast<double>(steps);
    rhs(t0, y, s.k1);
    ++stats.rhs_evals;
    for (std::size_t k = 0; k < steps; ++k) {
        const double t = t0 + h * static_cast<double>(k);
        dp54::step(rhs, t, y, h, s, y_new);
        stats.rhs_evals += 6;
        y = y_new;
        s.k1 = s.k7;
        ++stats.accepted;
        hook(k + 1 == steps ? t1 : t + h, static_cast<const std::array<double, N>&>(y), k + 1 == steps);
    }
    return stats;
}

}  // namespace vortwist
