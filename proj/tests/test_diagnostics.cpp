#include <gtest/gtest.h>

#include <cmath>

#include "vortwist/diagnostics.hpp"

using namespace vortwist;

namespace {

Perturbation with_quintic(double gamma) {
    return Perturbation({Monomial{4, 0, TimeCoefficient{0.0, {gamma}, {}}}},
                        {Monomial{3, 2, TimeCoefficient{0.5 * gamma, {}, {gamma}}},
                         Monomial{0, 6, TimeCoefficient::constant(gamma)}},
                        1.0);
}

}  // namespace

TEST(Splitting, ZeroPerturbation) {
    const SplittingSample s = splitting(Perturbation::zero(), 0.3, 7.0, 1.2);
    EXPECT_EQ(s.b12, 0.0);
    for (const auto& row : s.c)
        for (double v : row) EXPECT_EQ(v, 0.0);
    EXPECT_EQ(s.A, kIntegrableJacobian);
}

TEST(Splitting, LeadingEntryClosedForm) {
    // T4 = gamma cos(2 pi t) cos^4(theta); its second theta-derivative at 0 is -4 gamma
    const double gamma = 0.01;
    for (double r : {1.0, 10.0, 1000.0}) {
        const SplittingSample s = splitting(Perturbation::quartic_probe(gamma), 0.0, r, 0.0);
        EXPECT_NEAR(s.b12, -4.0 * gamma, 1e-14);
        EXPECT_LT(s.split_defect, 1e-10);
    }
    EXPECT_THROW(splitting(Perturbation::quartic_probe(gamma), 0.0, 0.5, 0.0), DomainError);
}

TEST(Splitting, ScaledEntriesBounded) {
    for (const Perturbation& p : {Perturbation::quartic_probe(0.01), with_quintic(0.01)}) {
        const SplittingScan scan = splitting_scan(p, {10.0, 100.0, 1000.0}, linear_points(0.0, 0.95, 20),
                                                  uniform_angles(36));
        EXPECT_TRUE(scan.bounded(3.0)) << scan.ratio[0] << " " << scan.ratio[1] << " " << scan.ratio[2] << " "
                                       << scan.ratio[3];
        EXPECT_LT(scan.b12_r_drift, 1e-12);
        EXPECT_LT(scan.max_split_defect, 1e-10);
    }
    // the quintic remainder makes c11 and c12 nonzero
    const SplittingScan q = splitting_scan(with_quintic(0.01), {10.0, 1000.0}, {0.1}, uniform_angles(12));
    EXPECT_GT(q.sup_scaled[0][0], 0.0);
    EXPECT_GT(q.sup_scaled[0][1], 0.0);
}

TEST(Oscillatory, ClosedForm) {
    OscillatoryProbe p;
    p.poly = {Monomial{1, 0, TimeCoefficient::constant(1.0)}};
    for (double l : {3.0, 50.0, 1234.5}) EXPECT_NEAR(oscillatory_integral(p, l), std::sin(l) / l, 1e-12);
    p.poly = {Monomial{0, 1, TimeCoefficient::constant(1.0)}};
    for (double l : {3.0, 50.0}) EXPECT_NEAR(oscillatory_integral(p, l), (1.0 - std::cos(l)) / l, 1e-12);
}

TEST(Oscillatory, DecayOfStandardProbe) {
    const OscillatoryResult res = oscillatory_decay(OscillatoryProbe::standard());
    EXPECT_LE(res.fitted_exponent, -0.9);
    EXPECT_GT(res.fitted_exponent, -1.1);
    EXPECT_GT(res.C_RL_hat, 0.0);
    EXPECT_NEAR(res.beta_dot_sup, 0.2 * kPi, 1e-3);
    for (std::size_t k = 0; k < res.lambdas.size(); ++k) EXPECT_LE(res.lambdas[k] * res.envelope[k], res.C_RL_hat);
}

TEST(Oscillatory, NonzeroMeanRejected) {
    OscillatoryProbe p = OscillatoryProbe::standard();
    p.poly.push_back(Monomial{0, 0, TimeCoefficient::constant(1.0)});
    EXPECT_THROW(oscillatory_decay(p), HypothesisError);
    // cos^2 + sin^2 - 1 has zero mean and is accepted
    OscillatoryProbe z = OscillatoryProbe::standard();
    z.poly = {Monomial{2, 0, TimeCoefficient::constant(1.0)}, Monomial{0, 2, TimeCoefficient::constant(1.0)},
              Monomial{0, 0, TimeCoefficient::constant(-1.0)}};
    EXPECT_LT(circular_mean_defect(z), 1e-14);
    OscillatoryProbe bad = OscillatoryProbe::standard();
    bad.lambdas = {10.0};
    EXPECT_THROW(oscillatory_decay(bad), ConfigError);
}

TEST(Monodromy, Integrable) {
    const VortexFlow flow(Perturbation::zero());
    const MonodromyScan s = monodromy_limit_scan(flow, {10.0, 100.0}, 0.4);
    for (double d : s.deviations) EXPECT_LT(d, 1e-10);
    for (double b : s.beta_dot_sup) EXPECT_LT(b, 1e-10);
}

TEST(Monodromy, ConvergesToLimit) {
    const VortexFlow flow(Perturbation::quartic_probe(0.01));
    const std::vector<double> r0{1e4, 10.0, 1e3, 100.0};
    const MonodromyScan s = monodromy_limit_scan(flow, r0, 0.3, 2);
    EXPECT_TRUE(s.monotone_decay);
    EXPECT_LT(s.deviations[0], s.deviations[1] / 10.0);
    EXPECT_GT(s.beta_dot_sup[1], s.beta_dot_sup[0]);
    EXPECT_LT(monodromy_theta_spread(flow, 100.0), 10.0);
}
