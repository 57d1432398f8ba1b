#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "vortwist/flow.hpp"

using namespace vortwist;

namespace {

const VortexFlow& integrable() {
    static const VortexFlow flow(Perturbation::zero(1.0));
    return flow;
}

const VortexFlow& probe() {
    static const VortexFlow flow(Perturbation::quartic_probe(0.01, 1.0));
    return flow;
}

}  // namespace

TEST(SymplecticWeight, ClosedForms) {
    for (double r : {0.6, 1.0, 10.0, 1e4}) {
        EXPECT_GT(SymplecticWeight::df(r), 0.0);
        EXPECT_NEAR(SymplecticWeight::inverse(SymplecticWeight::f(r)), r, 1e-14 * r);
    }
}

TEST(Integrate, IntegrableClosedForm) {
    const auto res = integrable().poincare(kPi, 0.0);
    EXPECT_NEAR(res.r1, kPi, 1e-12);
    EXPECT_NEAR(res.theta1, kTwoPi, 1e-12);
    EXPECT_NEAR(max_abs_diff(res.Y1, Mat2{{{1.0, 0.0}, {2.0, 1.0}}}), 0.0, 1e-12);
    EXPECT_NEAR(res.S, -0.5 - 0.5 * std::log(2.0 * kPi), 1e-12);
    EXPECT_NEAR(det(res.Y1), 1.0, 1e-12);
}

TEST(Integrate, IntegrableDeterminantIsOne) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> ur(1.0, 200.0), uth(-5.0, 5.0);
    for (int k = 0; k < 20; ++k) {
        const double r0 = ur(rng), th0 = uth(rng);
        const auto res = integrable().poincare(r0, th0);
        EXPECT_NEAR(det(res.Y1), 1.0, 1e-10);
        EXPECT_NEAR(res.r1, r0, 1e-12 * r0);
        EXPECT_NEAR(res.theta1, th0 + 2.0 * r0, 1e-9);
    }
}

TEST(Integrate, RadialDriftBoundedByC1) {
    const double c1 = probe().bounds().c1;
    EXPECT_LT(c1, 0.045);
    for (double th0 : {0.0, 0.7, 2.0, 4.5}) {
        const Trajectory tr = probe().integrate(AugmentedState{10.0, th0}, 0.0, 1.0, true);
        ASSERT_GT(tr.points.size(), 10u);
        for (const auto& pt : tr.points) EXPECT_LE(std::abs(pt.state.r - 10.0), c1 * pt.t + 1e-12);
    }
}

TEST(Integrate, DeterminantTracksSymplecticWeight) {
    for (double r0 : {1.0, 3.0, 10.0, 60.0}) {
        const Trajectory tr = probe().integrate(AugmentedState{r0, 0.4}, 0.0, 1.0, true);
        for (const auto& pt : tr.points) {
            const double expect = (pt.state.r / r0) * (pt.state.r / r0);
            EXPECT_NEAR(det(pt.state.Y), expect, 1e-8 * expect);
        }
    }
}

TEST(Integrate, SampleTimesAreHitExactly) {
    const std::vector<double> ts{0.1, 0.25, 0.5, 1.0};
    const Trajectory tr = probe().integrate(AugmentedState{5.0, 0.0}, 0.0, 1.0, false, ts);
    ASSERT_EQ(tr.points.size(), ts.size() + 1);
    for (std::size_t k = 0; k < ts.size(); ++k) EXPECT_EQ(tr.points[k + 1].t, ts[k]);
}

TEST(Integrate, RejectsStartBelowAStar) {
    EXPECT_THROW(probe().poincare(probe().a_star() * 0.999, 0.0), DomainExit);
    const auto res = probe().try_poincare(0.3, 0.0);
    EXPECT_TRUE(res.domain_exit);
}

TEST(Integrate, DomainExitMidTrajectory) {
    // Strong quartic field with a deliberately understated a*: F < 0 near
    // theta = pi/4 at t = 0 pushes r below r* = 0.5.
    const auto p = Perturbation::quartic_probe(1.0, 1.0);
    const VortexFlow flow(p, FlowOptions{}, C1Estimate{0.0, p.r_star(), p.r_star()});
    try {
        flow.integrate(AugmentedState{p.r_star() + 1e-3, kPi / 4}, 0.0, 1.0);
        FAIL() << "expected DomainExit";
    } catch (const DomainExit& e) {
        EXPECT_GT(e.t_exit(), 0.0);
        EXPECT_LT(e.t_exit(), 1.0);
    }
}

TEST(Poincare, LiftEquivariance) {
    for (double r0 : {2.0, 10.0, 40.0}) {
        const auto a = probe().poincare(r0, 0.3);
        const auto b = probe().poincare(r0, 0.3 + kTwoPi);
        EXPECT_NEAR(b.r1, a.r1, 1e-9);
        EXPECT_NEAR(b.theta1 - kTwoPi, a.theta1, 1e-9);
        EXPECT_NEAR(b.S, a.S, 1e-9);
    }
}

TEST(Poincare, TighterToleranceConverges) {
    for (double r0 : {3.0, 30.0}) {
        const auto a = probe().poincare(r0, 1.0);
        const auto b = probe().with_tolerances(0.5e-10, 0.5e-12).poincare(r0, 1.0);
        const double tol = probe().options().rtol;
        EXPECT_LT(std::abs(a.r1 - b.r1), 10.0 * tol * std::abs(a.r1));
        EXPECT_LT(std::abs(a.theta1 - b.theta1), 10.0 * tol * std::abs(a.theta1));
    }
}

TEST(Poincare, SmoothMapAgreesWithAdaptive) {
    for (double r0 : {1.0, 10.0, 80.0}) {
        const auto a = probe().poincare(r0, 2.0);
        const auto b = probe().poincare_smooth(r0, 2.0, probe().smooth_step_count(r0));
        EXPECT_NEAR(a.r1, b.r1, 1e-10);
        EXPECT_NEAR(a.theta1, b.theta1, 1e-10);
        EXPECT_NEAR(a.S, b.S, 1e-10);
        EXPECT_LT(max_abs_diff(a.Y1, b.Y1), 1e-10);
    }
}

TEST(Conjugacy, IntegrableCircle) {
    const CartesianPoint c = from_regularized(kPi, 0.8);
    EXPECT_LT(conjugacy_check(integrable(), c.x, c.y, 1e-10).discrepancy, 1e-9);
}

TEST(Conjugacy, PerturbedRandomStarts) {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> ur(10.0, 100.0), uth(0.0, kTwoPi);
    for (int k = 0; k < 6; ++k) {
        const CartesianPoint c = from_regularized(ur(rng), uth(rng));
        EXPECT_LT(conjugacy_check(probe(), c.x, c.y, 1e-10).discrepancy, 1e-6);
    }
    // the r0 = 100, theta0 = 0 example
    const CartesianPoint c = from_regularized(100.0, 0.0);
    EXPECT_LT(conjugacy_check(probe(), c.x, c.y, 1e-10).discrepancy, 1e-6);
}

TEST(Conjugacy, LooseToleranceStillBounded) {
    const CartesianPoint c = from_regularized(100.0, 1.0);
    const double tight = conjugacy_check(probe(), c.x, c.y, 1e-10).discrepancy;
    const double loose = conjugacy_check(probe(), c.x, c.y, 1e-4).discrepancy;
    EXPECT_LT(loose, 1e-3);
    EXPECT_GE(loose, tight);
}

TEST(Conjugacy, RejectsPointsOutsideDisk) {
    EXPECT_THROW(conjugacy_check(probe(), 2.0, 0.0, 1e-10), DomainError);
}
