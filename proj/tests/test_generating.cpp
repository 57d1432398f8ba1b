#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "vortwist/generating.hpp"

using namespace vortwist;

namespace {

const GeneratingFunction& integrable() {
    static const GeneratingFunction gf(VortexFlow(Perturbation::zero(1.0)), 0.0);
    return gf;
}

const GeneratingFunction& probe() {
    static const GeneratingFunction gf(VortexFlow(Perturbation::quartic_probe(0.01, 1.0)), 0.1);
    return gf;
}

}  // namespace

TEST(SolveR, IntegrableClosedForm) {
    EXPECT_NEAR(integrable().solve_R(0.0, kPi), kPi / 2, 1e-12);
    for (double x : {0.0, 1.3, -4.0}) {
        const double a = integrable().solve_R(x, x + 17.0);
        const double b = integrable().solve_R(x + kTwoPi, x + kTwoPi + 17.0);
        EXPECT_EQ(a, b);
    }
}

TEST(SolveR, PerturbedRootResidual) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> ux(0.0, kTwoPi), ud(20.0, 200.0);
    const VortexFlow& flow = probe().flow();
    for (int k = 0; k < 100; ++k) {
        const double x = ux(rng), x1 = x + ud(rng);
        const GeneratingSample g = probe().h_eval(x, x1);
        EXPECT_LT(g.root_residual, 1e-10);
        // the adaptive map is an independent evaluation of theta1
        EXPECT_NEAR(flow.poincare(g.R, x).theta1, x1, 1e-9);
        EXPECT_LT(g.d12h, 0.0);
    }
}

TEST(SolveR, Errors) {
    EXPECT_THROW(probe().solve_R(0.0, 30.0, std::pair{20.0, 25.0}), BracketError);
    EXPECT_THROW(probe().solve_R(0.0, 30.0, std::pair{25.0, 20.0}), BracketError);
    GeneratingOptions o;
    o.max_iter = 1;
    o.cache_capacity = 0;
    const GeneratingFunction gf(probe().flow(), 0.1, o);
    try {
        gf.solve_R(0.4, 30.0);
        FAIL() << "expected NoConvergence";
    } catch (const NoConvergence& e) {
        EXPECT_GT(e.best_residual(), 1e-10);
    }
}

TEST(HEval, IntegrableClosedForm) {
    for (double d : {kPi, 10.0, 123.0}) {
        const GeneratingSample g = integrable().h_eval(0.7, 0.7 + d);
        EXPECT_NEAR(g.h, -0.5 - 0.5 * std::log(d), 1e-9);
        EXPECT_NEAR(g.d1h, 1.0 / (2 * d), 1e-12);
        EXPECT_NEAR(g.d2h, -1.0 / (2 * d), 1e-12);
        EXPECT_NEAR(g.d12h, -1.0 / (2 * d * d), 1e-12);
        EXPECT_NEAR(g.d11h, 1.0 / (2 * d * d), 1e-12);
        EXPECT_NEAR(g.d22h, 1.0 / (2 * d * d), 1e-12);
    }
    EXPECT_NEAR(integrable().h_eval(0.0, kPi).d12h, -0.050660, 1e-6);
}

TEST(HEval, PerturbedFiniteDifferences) {
    const double h = 1e-4;
    for (auto [x, x1] : {std::pair{0.3, 25.0}, std::pair{2.0, 60.0}, std::pair{-1.0, 8.5}}) {
        const GeneratingSample g = probe().h_eval(x, x1);
        const auto xp = probe().h_eval(x + h, x1), xm = probe().h_eval(x - h, x1);
        const auto yp = probe().h_eval(x, x1 + h), ym = probe().h_eval(x, x1 - h);
        EXPECT_NEAR((xp.h - xm.h) / (2 * h), g.d1h, 1e-6);
        EXPECT_NEAR((yp.h - ym.h) / (2 * h), g.d2h, 1e-6);
        EXPECT_NEAR((yp.d1h - ym.d1h) / (2 * h), g.d12h, 1e-6);
        EXPECT_NEAR((xp.d2h - xm.d2h) / (2 * h), g.d12h, 1e-6);
        EXPECT_NEAR((xp.d1h - xm.d1h) / (2 * h), g.d11h, 1e-6);
        EXPECT_NEAR((yp.d2h - ym.d2h) / (2 * h), g.d22h, 1e-6);
    }
}

TEST(HEval, Invariants) {
    const VortexFlow& flow = probe().flow();
    for (auto [x, x1] : {std::pair{0.1, 12.0}, std::pair{4.0, 41.0}}) {
        const GeneratingSample g = probe().h_eval(x, x1);
        EXPECT_NEAR(SymplecticWeight::inverse(-g.d1h), g.R, 1e-8);
        const PoincareResult p = flow.poincare(g.R, x);
        EXPECT_NEAR(p.r1, SymplecticWeight::inverse(g.d2h), 1e-7);
        EXPECT_NEAR(p.theta1, x1, 1e-7);
        const GeneratingSample s = probe().h_eval(x + kTwoPi, x1 + kTwoPi);
        EXPECT_NEAR(s.h, g.h, 1e-9);
        EXPECT_NEAR(s.R, g.R, 1e-9);
        EXPECT_LT(g.d12h, 0.0);
    }
}

TEST(HEval, CacheAndConcurrency) {
    GeneratingOptions o;
    o.cache_capacity = 8;
    const GeneratingFunction gf(probe().flow(), 0.1, o);
    const auto a = gf.h_eval(0.5, 20.0);
    const auto b = gf.h_eval(0.5, 20.0);
    EXPECT_EQ(a.h, b.h);
    EXPECT_EQ(gf.cache_stats().hits, 1u);
    std::vector<double> hs(24);
    parallel_for(hs.size(), 4, [&](std::size_t i) { hs[i] = gf.h_eval(0.1 * static_cast<double>(i % 12), 20.0).h; });
    for (std::size_t i = 0; i < 12; ++i) EXPECT_EQ(hs[i], hs[i + 12]);
    gf.clear_cache();
    EXPECT_EQ(gf.cache_stats().hits, 0u);
}

TEST(DomainContains, IntegrableWindow) {
    const FrequencyWindow w = boundary_frequencies(integrable().flow(), 5.0, uniform_angles(16));
    EXPECT_TRUE(domain_contains(0.0, 12.0, w));
    EXPECT_FALSE(domain_contains(0.0, 9.0, w));
    EXPECT_FALSE(domain_contains(0.0, kTwoPi * w.alpha_minus_at(0.0), w));
    for (double x : {0.0, 1.1, 3.0})
        for (double d : {9.9, 10.1, 30.0})
            EXPECT_EQ(domain_contains(x, x + d, w), domain_contains(x + kTwoPi, x + kTwoPi + d, w));
}

TEST(DomainContains, RCap) {
    const FrequencyWindow w = boundary_frequencies(integrable().flow(), 5.0, uniform_angles(16), 20.0);
    EXPECT_TRUE(domain_contains(0.0, 30.0, w));
    EXPECT_FALSE(domain_contains(0.0, 41.0, w));
    EXPECT_FALSE(domain_contains(0.0, 30.0, w, 10.5));
}
