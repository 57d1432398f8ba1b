#pragma once

// Generating function h(x, x1) = S(R(x, x1), x) of the twist map, where R
// inverts x1 = theta1(R, x). Partials come from the monodromy matrix.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>

#include "vortwist/errors.hpp"
#include "vortwist/flow.hpp"
#include "vortwist/poincare.hpp"

namespace vortwist {

struct GeneratingSample {
    double x = 0.0;
    double x1 = 0.0;
    double R = 0.0;
    double R1 = 0.0;
    double h = 0.0;
    double d1h = 0.0;
    double d2h = 0.0;
    double d12h = 0.0;
    double d11h = 0.0;
    double d22h = 0.0;
    /// |theta1(R, x) - x1| at the returned root
    double root_residual = 0.0;
    int iterations = 0;
};

struct GeneratingOptions {
    double root_tol = 1e-10;
    int max_iter = 100;
    /// extra half-width added to C1 + K around the unperturbed root
    double bracket_margin = 0.5;
    /// number of cached samples; 0 disables the cache
    std::size_t cache_capacity = 1 << 16;
};

struct CacheStats {
    std::size_t hits = 0;
    std::size_t misses = 0;
};

class GeneratingFunction {
public:
    /// `K` is the growth constant of the strip, used to size root brackets.
    GeneratingFunction(VortexFlow flow, double K, GeneratingOptions opts = {})
        : flow_(std::move(flow)), K_(K), opts_(opts), cache_(std::make_shared<Cache>()) {
        if (!(opts_.root_tol > 0.0) || opts_.max_iter < 1) throw ConfigError("invalid root solver settings");
    }

    const VortexFlow& flow() const { return flow_; }
    const GeneratingOptions& options() const { return opts_; }
    double K() const { return K_; }

    /// Default bracket: the unperturbed root (x1 - x)/2 widened by C1 + K + margin,
    /// cut off just above a*.
    std::pair<double, double> default_bracket(double x, double x1) const {
        const double mid = 0.5 * (x1 - x);
        const double w = flow_.bounds().c1 + K_ + opts_.bracket_margin;
        const double floor = flow_.a_star() + 1e-9 * (1.0 + flow_.a_star());
        return {std::max(mid - w, floor), std::max(mid + w, floor * (1.0 + 1e-6))};
    }

    /// R with |theta1(R, x) - x1| < root_tol.
    double solve_R(double x, double x1, std::optional<std::pair<double, double>> bracket = std::nullopt) const {
        return solve(x, x1, bracket).R;
    }

    GeneratingSample h_eval(double x, double x1) const {
        const Key key{std::bit_cast<std::uint64_t>(x), std::bit_cast<std::uint64_t>(x1)};
        if (opts_.cache_capacity > 0) {
            std::lock_guard<std::mutex> lock(cache_->mutex);
            auto it = cache_->map.find(key);
            if (it != cache_->map.end()) {
                ++cache_->stats.hits;
                return it->second;
            }
            ++cache_->stats.misses;
        }
        const Root root = solve(x, x1, std::nullopt);
        const PoincareResult& p = root.map;
        GeneratingSample g;
        g.x = x;
        g.x1 = x1;
        g.R = root.R;
        g.R1 = p.r1;
        g.h = p.S;
        g.d1h = -SymplecticWeight::f(g.R);
        g.d2h = SymplecticWeight::f(g.R1);
        const double y21 = p.Y1[1][0];
        g.d12h = -SymplecticWeight::df(g.R) / y21;
        g.d11h = SymplecticWeight::df(g.R) * p.Y1[1][1] / y21;
        g.d22h = SymplecticWeight::df(g.R1) * p.Y1[0][0] / y21;
        g.root_residual = root.residual;
        g.iterations = root.iterations;
        if (opts_.cache_capacity > 0) {
            std::lock_guard<std::mutex> lock(cache_->mutex);
            if (cache_->map.size() >= opts_.cache_capacity) cache_->map.clear();
            cache_->map.emplace(key, g);
        }
        return g;
    }

    CacheStats cache_stats() const {
        std::lock_guard<std::mutex> lock(cache_->mutex);
        return cache_->stats;
    }

    void clear_cache() const {
        std::lock_guard<std::mutex> lock(cache_->mutex);
        cache_->map.clear();
        cache_->stats = {};
    }

private:
    struct Key {
        std::uint64_t a, b;
        bool operator==(const Key&) const = default;
    };
    struct KeyHash {
        std::size_t operator()(const Key& k) const {
            return std::hash<std::uint64_t>()(k.a * 0x9E3779B97F4A7C15ull ^ k.b);
        }
    };
    struct Cache {
        std::mutex mutex;
        std::unordered_map<Key, GeneratingSample, KeyHash> map;
        CacheStats stats;
    };

    struct Root {
        double R = 0.0;
        double residual = 0.0;
        int iterations = 0;
        PoincareResult map;
    };

    Root solve(double x, double x1, std::optional<std::pair<double, double>> bracket) const {
        auto [lo, hi] = bracket ? *bracket : default_bracket(x, x1);
        if (!(lo < hi)) throw BracketError("empty bracket for R");
        const double d = x1 - x;
        // one step count for the whole solve keeps the map smooth in r
        const std::size_t steps = flow_.smooth_step_count(hi);
        auto eval = [&](double r) {
            PoincareResult p = flow_.poincare_smooth(r, x, steps);
            return std::pair<double, PoincareResult>{p.advance - d, std::move(p)};
        };
        auto [glo, plo] = eval(lo);
        auto [ghi, phi] = eval(hi);
        if (!(glo < 0.0 && ghi > 0.0)) {
            if (std::abs(glo) < opts_.root_tol) return {lo, std::abs(glo), 0, plo};
            if (std::abs(ghi) < opts_.root_tol) return {hi, std::abs(ghi), 0, phi};
            throw BracketError("bracket [" + std::to_string(lo) + ", " + std::to_string(hi) +
                               "] does not straddle x1 = " + std::to_string(x1));
        }
        double r = std::clamp(0.5 * d, lo, hi);
        if (!(r > lo && r < hi)) r = 0.5 * (lo + hi);
        Root best{r, std::numeric_limits<double>::infinity(), 0, {}};
        for (int it = 1; it <= opts_.max_iter; ++it) {
            auto [g, p] = eval(r);
            if (std::abs(g) < best.residual) best = {r, std::abs(g), it, p};
            if (std::abs(g) < opts_.root_tol) return best;
            if (g < 0.0)
                lo = r;
            else
                hi = r;
            const double slope = p.Y1[1][0];
            double next = slope > 0.0 ? r - g / slope : lo;
            if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
            if (next == r || hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) break;
            r = next;
        }
        if (best.residual < opts_.root_tol) return best;
        throw NoConvergence("R(x, x1) root solve did not reach the tolerance", {best.R}, best.residual);
    }

    VortexFlow flow_;
    double K_ = 0.0;
    GeneratingOptions opts_;
    std::shared_ptr<Cache> cache_;
};

/// (x, x1) lies in B: x1 - x exceeds 2 pi alpha^-(x) + margin and, with an
/// r-cap configured, stays below 2 pi alpha_cap(x) - margin.
inline bool domain_contains(double x, double x1, const FrequencyWindow& window, double margin = 0.0) {
    const double d = x1 - x;
    if (!(d > kTwoPi * window.alpha_minus_at(x) + margin)) return false;
    if (window.r_cap && !(d < kTwoPi * window.interpolate(window.alpha_cap, x) - margin)) return false;
    return true;
}

}  // namespace vortwist
