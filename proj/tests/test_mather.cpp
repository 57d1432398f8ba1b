#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "vortwist/mather.hpp"

using namespace vortwist;

namespace {

struct Setup {
    VortexFlow flow;
    WorkingStrip strip;
    FrequencyWindow window;
    GeneratingFunction gf;

    explicit Setup(Perturbation p)
        : flow(std::move(p)),
          strip(working_strip(flow)),
          window(boundary_frequencies(flow, strip.r_bar, uniform_angles(64))),
          gf(flow, strip.K) {}
};

const Setup& integrable() {
    static const Setup s(Perturbation::zero(1.0));
    return s;
}

const Setup& probe() {
    static const Setup s(Perturbation::quartic_probe(0.01, 1.0));
    return s;
}

const double kGolden = 0.5 * (1.0 + std::sqrt(5.0));

}  // namespace

TEST(CyclicSolver, MatchesDense) {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (std::size_t q : {3u, 4u, 7u, 12u}) {
        std::vector<double> d(q), b(q), rhs(q);
        for (std::size_t i = 0; i < q; ++i) {
            b[i] = u(rng);
            rhs[i] = u(rng);
        }
        for (std::size_t i = 0; i < q; ++i) d[i] = 2.5 + std::abs(b[i]) + std::abs(b[(i + q - 1) % q]);
        std::vector<std::vector<double>> a(q, std::vector<double>(q, 0.0));
        for (std::size_t n = 0; n < q; ++n) {
            a[n][n] += d[n];
            a[n][(n + 1) % q] += b[n];
            a[(n + 1) % q][n] += b[n];
        }
        const auto x = detail::solve_cyclic(d, b, rhs);
        const auto y = detail::solve_dense(a, rhs);
        for (std::size_t i = 0; i < q; ++i) EXPECT_NEAR(x[i], y[i], 1e-12);
    }
}

TEST(PeriodicOrbit, IntegrableClosedForms) {
    const Orbit o = periodic_orbit(integrable().gf, integrable().window, 1, 1);
    ASSERT_EQ(o.x.size(), 2u);
    EXPECT_NEAR(o.x[1] - o.x[0], kTwoPi, 1e-15);
    EXPECT_NEAR(o.r[0], kPi, 1e-10);
    EXPECT_EQ(o.el_residual, 0.0);
    const Orbit o2 = periodic_orbit(integrable().gf, integrable().window, 3, 2);
    EXPECT_NEAR(o2.x[1] - o2.x[0], 3 * kPi, 1e-14);
    for (double r : o2.r) EXPECT_NEAR(r, 1.5 * kPi, 1e-10);
}

TEST(PeriodicOrbit, PerturbedResiduals) {
    for (double x0 : {0.0, 0.3}) {
        OrbitOptions opt;
        opt.x0 = x0;
        const Orbit o = periodic_orbit(probe().gf, probe().window, 7, 2, std::nullopt, opt);
        EXPECT_LT(o.el_residual, 1e-10);
        EXPECT_LT(o.map_residual, 1e-6);
        EXPECT_EQ(o.inside_theorem_window, 3.5 > probe().window.theorem_threshold);
    }
    OrbitOptions opt;
    opt.x0 = 1.0;
    const Orbit o = periodic_orbit(probe().gf, probe().window, 1, 1, std::nullopt, opt);
    EXPECT_LT(o.el_residual, 1e-10);
    EXPECT_GT(o.iterations, 0);
    EXPECT_FALSE(o.inside_theorem_window);
}

TEST(PeriodicOrbit, ActionIsLocallyMinimalInEachCoordinate) {
    OrbitOptions opt;
    opt.x0 = 0.3;
    const Orbit o = periodic_orbit(probe().gf, probe().window, 22, 7, std::nullopt, opt);
    for (std::size_t n = 0; n < 7; ++n) {
        for (double dx : {-1e-4, 1e-4}) {
            std::vector<double> x(o.x.begin(), o.x.end() - 1);
            x[n] += dx;
            const std::vector<double> xc = close_configuration(x, o.s);
            double w = 0.0;
            for (std::size_t k = 0; k < 7; ++k) w += probe().gf.h_eval(xc[k], xc[k + 1]).h;
            EXPECT_GE(w, o.action - 1e-9);
        }
    }
}

TEST(PeriodicOrbit, TranslationEquivariance) {
    OrbitOptions opt;
    opt.x0 = 0.4;
    const Orbit a = periodic_orbit(probe().gf, probe().window, 5, 3, std::nullopt, opt);
    std::vector<double> init;
    for (long n = 0; n < 3; ++n) init.push_back(0.4 + kTwoPi + kTwoPi * 5.0 * static_cast<double>(n) / 3.0);
    const Orbit b = periodic_orbit(probe().gf, probe().window, 5, 3, init, opt);
    for (std::size_t n = 0; n < a.x.size(); ++n) EXPECT_NEAR(b.x[n] - kTwoPi, a.x[n], 1e-8);
}

TEST(PeriodicOrbit, Refusals) {
    EXPECT_THROW(periodic_orbit(probe().gf, probe().window, 1, 3), WindowError);
    EXPECT_THROW(periodic_orbit(probe().gf, probe().window, 2, 2), ConfigError);
    EXPECT_THROW(periodic_orbit(probe().gf, probe().window, 1, 0), ConfigError);
    EXPECT_THROW(periodic_orbit(probe().gf, probe().window, 3, 2, std::vector<double>{0.0}), ConfigError);
}

TEST(OrbitResiduals, IntegrableAndInjectedDefect) {
    const Orbit o = periodic_orbit(integrable().gf, integrable().window, 3, 2);
    const OrbitReport rep = orbit_residuals(integrable().gf, o);
    EXPECT_LT(rep.el, 1e-15);
    EXPECT_LT(rep.map, 1e-9);
    EXPECT_LT(rep.translation, 1e-14);
    EXPECT_TRUE(rep.comparable);
    EXPECT_TRUE(rep.increasing);
    Orbit bad = o;
    bad.x[1] += 0.1;
    EXPECT_GT(orbit_residuals(integrable().gf, bad).el, 1e-4);
}

TEST(OrbitResiduals, TheoremBoundOnComputedOrbits) {
    for (auto [s, q] : {std::pair{1L, 1L}, std::pair{3L, 2L}, std::pair{7L, 2L}, std::pair{22L, 7L}}) {
        OrbitOptions opt;
        opt.x0 = 0.3;
        const Orbit o = periodic_orbit(probe().gf, probe().window, s, q, std::nullopt, opt);
        const OrbitReport rep = orbit_residuals(probe().gf, o);
        EXPECT_TRUE(rep.translation_ok);
        EXPECT_TRUE(rep.comparable);
        EXPECT_TRUE(rep.increasing);
        EXPECT_NEAR(rep.action, o.action, 1e-12);
        for (long n = -3 * q; n <= 3 * q; ++n)
            EXPECT_LT(std::abs(o.x_at(n) - o.x_at(0) - kTwoPi * static_cast<double>(n * s) / q), kTwoPi);
    }
}

TEST(RotationNumber, Integrable) {
    EXPECT_NEAR(rotation_number(integrable().flow, kPi, 0.2, 50).alpha_hat, 1.0, 1e-12);
    EXPECT_NEAR(rotation_number(integrable().flow, kPi * kGolden, 0.2, 50).alpha_hat, kGolden, 1e-9);
}

TEST(RotationNumber, PeriodicOrbitConsistency) {
    const Orbit o = periodic_orbit(probe().gf, probe().window, 7, 2);
    EXPECT_NEAR(rotation_number(probe().flow, o.r[0], o.x[0], 200).alpha_hat, 3.5, 1e-6);
    EXPECT_NEAR(rotation_number(probe().flow, o.r[0], o.x[0], 2000).alpha_hat, 3.5, 1e-8);
}

TEST(RotationNumber, EscapeIndex) {
    try {
        rotation_number(probe().flow, 3.0, 0.0, 10, 5.0);
        FAIL() << "expected DomainExit";
    } catch (const DomainExit& e) {
        EXPECT_EQ(e.escape_index(), 1);
    }
    EXPECT_THROW(rotation_number(probe().flow, 3.0, 0.0, 1), ConfigError);
}

TEST(Convergents, GoldenMeanAndSqrt2) {
    const auto g = convergents(kGolden, 5);
    const std::vector<std::pair<long, long>> expect{{2, 1}, {3, 2}, {5, 3}, {8, 5}, {13, 8}};
    ASSERT_EQ(g.size(), 5u);
    for (std::size_t k = 0; k < 5; ++k) {
        EXPECT_EQ(g[k].s, expect[k].first);
        EXPECT_EQ(g[k].q, expect[k].second);
    }
    const auto r2 = convergents(std::sqrt(2.0), 4);
    EXPECT_EQ(r2[0].s, 1);
    EXPECT_EQ(r2[0].q, 1);
    EXPECT_EQ(r2[3].s, 17);
    EXPECT_EQ(r2[3].q, 12);
    EXPECT_THROW(convergents(kGolden, 20), DepthError);
    EXPECT_THROW(convergents(1.5, 5), ConfigError);
}

TEST(MatherSet, IntegrableGapsShrink) {
    const MatherSet ms = mather_set(integrable().gf, integrable().window, kGolden, 5);
    ASSERT_EQ(ms.orbits.size(), 5u);
    for (std::size_t k = 0; k < ms.gaps.size(); ++k)
        EXPECT_NEAR(ms.gaps[k], kTwoPi / static_cast<double>(ms.convergents[k].q), 1e-9);
    EXPECT_EQ(ms.classification, MatherClass::curve);
    const HullSamples& h = ms.hull;
    for (std::size_t j = 0; j < h.xi.size(); ++j) {
        EXPECT_NEAR(h.phi[j] - h.xi[j], h.phi[0] - h.xi[0], 1e-10);
        EXPECT_NEAR(h.eta[j], kPi * 13.0 / 8.0, 1e-9);
    }
}

TEST(MatherSet, PerturbedGoldenMean) {
    const MatherSet ms = mather_set(probe().gf, probe().window, kGolden, 6);
    ASSERT_EQ(ms.orbits.size(), 6u);
    EXPECT_EQ(ms.convergents.back().q, 13);
    EXPECT_NE(ms.classification, MatherClass::cantor_candidate);
    for (const auto& o : ms.orbits) {
        EXPECT_LT(o.el_residual, 1e-10);
        EXPECT_LT(o.map_residual, 1e-6);
    }
    const HullSamples& h = ms.hull;
    EXPECT_EQ(h.monotonicity_violations, 0u);
    EXPECT_LT(hull_map_residual(probe().flow, h), 1e-5);
    for (long j = 0; j < h.q; ++j) {
        EXPECT_NEAR(h.phi_at(j + h.q), h.phi_at(j) + kTwoPi, 1e-8);
        EXPECT_EQ(h.eta_at(j + h.q), h.eta_at(j));
        // order is preserved by the rotation xi -> xi + 2 pi s/q
        EXPECT_LT(h.phi_at(j + h.s), h.phi_at(j + 1 + h.s));
    }
}

TEST(MatherSet, RefusesBelowThreshold) {
    EXPECT_THROW(mather_set(probe().gf, probe().window, 0.3, 3), WindowError);
}

TEST(SolutionFamily, Integrable) {
    const Orbit o = periodic_orbit(integrable().gf, integrable().window, 3, 2);
    const FamilyReport rep =
        verify_solution_family(integrable().flow, hull_from_orbit(o), {0.0, kPi}, {0.25, 0.5, 1.0});
    EXPECT_LT(rep.shift_discrepancy, 1e-9);
    EXPECT_LT(rep.time_discrepancy, 1e-9);
    EXPECT_TRUE(rep.pass);
}

TEST(SolutionFamily, PerturbedSevenTwo) {
    OrbitOptions opt;
    opt.x0 = 0.3;
    const Orbit o = periodic_orbit(probe().gf, probe().window, 7, 2, std::nullopt, opt);
    const FamilyReport rep = verify_solution_family(probe().flow, hull_from_orbit(o), {0.0, kPi, 7.0},
                                                    {0.1, 0.3, 0.5, 0.75, 1.0});
    EXPECT_LT(rep.time_discrepancy, 1e-5);
    EXPECT_LT(rep.shift_discrepancy, 1e-5);
    EXPECT_GT(rep.min_theta_dot, 0.0);
    EXPECT_TRUE(rep.clockwise);
    EXPECT_TRUE(rep.pass);
    EXPECT_LT(rep.max_r_excursion, probe().flow.bounds().c1);
}

TEST(OrbitMultiplier, IntegrableIsParabolic) {
    const Orbit o = periodic_orbit(integrable().gf, integrable().window, 3, 2);
    EXPECT_NEAR(orbit_multiplier(integrable().flow, o), 1.0, 1e-6);
}

TEST(OrbitMultiplier, MatchesTraceForQEqualsOne) {
    const Orbit o = periodic_orbit(probe().gf, probe().window, 1, 1);
    const Mat2 y = probe().flow.poincare(o.r[0], o.x[0]).Y1;
    const double mult = orbit_multiplier(probe().flow, o);
    EXPECT_GE(mult, 1.0);
    const double tr = std::abs(y[0][0] + y[1][1]);
    if (tr > 2.0) {
        EXPECT_NEAR(mult + 1.0 / mult, tr, 1e-9);
    }
}
