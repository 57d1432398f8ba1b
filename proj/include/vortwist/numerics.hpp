#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "vortwist/model.hpp"

namespace vortwist {

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    /// standard error of the slope (0 for two points)
    double slope_stderr = 0.0;
    std::size_t n = 0;
};

/// Ordinary least squares y = intercept + slope * x.
inline LineFit fit_line(std::span<const double> x, std::span<const double> y) {
    LineFit fit;
    const std::size_t n = std::min(x.size(), y.size());
    fit.n = n;
    if (n < 2) return fit;
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx == 0.0) return fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    if (n > 2) {
        double ss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double e = y[i] - fit.intercept - fit.slope * x[i];
            ss += e * e;
        }
        fit.slope_stderr = std::sqrt(ss / static_cast<double>(n - 2) / sxx);
    }
    return fit;
}

/// Slope of log|y| against log x, skipping non-positive x and zero or
/// non-finite y. Returns NaN with fewer than two usable points.
inline double loglog_slope(std::span<const double> x, std::span<const double> y) {
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < std::min(x.size(), y.size()); ++i) {
        if (x[i] > 0.0 && std::isfinite(y[i]) && y[i] != 0.0) {
            lx.push_back(std::log(x[i]));
            ly.push_back(std::log(std::abs(y[i])));
        }
    }
    if (lx.size() < 2) return std::nan("");
    return fit_line(lx, ly).slope;
}

/// n points equally spaced on [0, 2pi).
inline std::vector<double> uniform_angles(std::size_t n, double offset = 0.0) {
    std::vector<double> v(n);
    for (std::size_t k = 0; k < n; ++k) v[k] = offset + kTwoPi * static_cast<double>(k) / static_cast<double>(n);
    return v;
}

/// n points in geometric progression from lo to hi inclusive.
inline std::vector<double> geometric_points(double lo, double hi, std::size_t n) {
    std::vector<double> v(n);
    if (n == 1) {
        v[0] = lo;
        return v;
    }
    for (std::size_t k = 0; k < n; ++k)
        v[k] = lo * std::pow(hi / lo, static_cast<double>(k) / static_cast<double>(n - 1));
    v.back() = hi;
    return v;
}

inline std::vector<double> linear_points(double lo, double hi, std::size_t n) {
    std::vector<double> v(n);
    if (n == 1) {
        v[0] = lo;
        return v;
    }
    for (std::size_t k = 0; k < n; ++k) v[k] = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(n - 1);
    v.back() = hi;
    return v;
}

/// Wraps an angle into [0, 2pi).
inline double wrap_2pi(double x) {
    double w = std::fmod(x, kTwoPi);
    if (w < 0.0) w += kTwoPi;
    if (w >= kTwoPi) w = 0.0;
    return w;
}

}  // namespace vortwist
