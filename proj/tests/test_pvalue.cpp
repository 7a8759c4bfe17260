#include "oracles.hpp"
#include "siclad/pvalue.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace siclad;

TEST(GaussianMass, TrivialValues) {
    EXPECT_DOUBLE_EQ(gaussian_interval_mass(-infinity, infinity, 1.0), 1.0);
    EXPECT_DOUBLE_EQ(gaussian_interval_mass(0.0, infinity, 1.0), 0.5);
    EXPECT_DOUBLE_EQ(gaussian_interval_mass(-infinity, 0.0, 3.0), 0.5);
    EXPECT_EQ(gaussian_interval_mass(1.0, 1.0, 1.0), 0.0);
}

TEST(GaussianMass, FarTailMatchesQuadrature) {
    const double got = gaussian_interval_mass(10.0, 11.0, 1.0);
    const double ref = oracle::mass_quadrature(10.0, 11.0, 1.0);
    EXPECT_NEAR(got / ref, 1.0, 1e-10);
    const double left = gaussian_interval_mass(-11.0, -10.0, 1.0);
    EXPECT_NEAR(left / ref, 1.0, 1e-10);
}

TEST(GaussianMass, ExtremeTailInLogSpace) {
    // Beyond double range for the mass itself, the log stays finite and accurate.
    const double lg = log_gaussian_interval_mass(40.0, infinity, 1.0);
    EXPECT_NEAR(lg, static_cast<double>(oracle::log_mass_quadrature(40.0, infinity)), 1e-9 * std::fabs(lg));
}

TEST(GaussianMass, RandomIntervalsMatchQuadrature) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> lo_draw(-15, 15), w_draw(0.0, 3.0), sd_draw(0.2, 4.0);
    for (int rep = 0; rep < 200; ++rep) {
        const double sd = sd_draw(rng);
        const double lo = lo_draw(rng) * sd;
        const double hi = lo + w_draw(rng) * sd;
        const double got = gaussian_interval_mass(lo, hi, sd);
        const double ref = oracle::mass_quadrature(lo, hi, sd);
        if (ref == 0.0) continue;
        EXPECT_NEAR(got / ref, 1.0, 1e-10) << lo << " " << hi << " " << sd;
    }
}

TEST(SelectiveP, UntruncatedEqualsNaive) {
    for (double z : {-3.0, -0.4, 0.0, 1.0, 2.5}) {
        EXPECT_NEAR(selective_p(z, 1.3, interval_set::real_line()), naive_p(z, 1.3), 1e-14);
    }
}

TEST(SelectiveP, ZeroStatisticGivesOne) {
    EXPECT_DOUBLE_EQ(selective_p(0.0, 1.0, interval_set{{-1, 2}}), 1.0);
}

TEST(SelectiveP, SymmetricRegionMatchesQuadrature) {
    const interval_set region{{-3, -1}, {1, 3}};
    const double got = selective_p(2.0, 1.0, region);
    EXPECT_NEAR(got, oracle::selective_p_quadrature(2.0, 1.0, region), 1e-9);
}

TEST(SelectiveP, OutsideRegionIsAnError) {
    EXPECT_THROW(selective_p(5.0, 1.0, interval_set{{-1, 1}}), numerical_error);
}

TEST(SelectiveP, VanishingMassIsUnderflow) {
    EXPECT_THROW(selective_p(60.0, 1.0, interval_set{{60.0, 60.0 + 1e-9}}), underflow_error);
}

TEST(SelectiveP, FarTailRegionStaysAccurate) {
    // Both masses ~1e-90; the ratio must still be well defined.
    const interval_set region{{20.0, 20.5}, {21.0, 22.0}};
    const double got = selective_p(21.5, 1.0, region);
    EXPECT_NEAR(got, oracle::selective_p_quadrature(21.5, 1.0, region), 1e-9);
    EXPECT_GT(got, 0.0);
}

TEST(SelectiveP, BoundaryStatisticIsDefined) {
    const double p = selective_p(3.0, 1.0, interval_set{{-3, 3}});
    EXPECT_GE(p, 0.0);
    EXPECT_LE(p, 1e-12);
}

TEST(SelectiveP, InvariantUnderJointRescaling) {
    const interval_set region{{-2.5, -0.5}, {0.7, 1.9}, {3.0, 4.0}};
    const double base = selective_p(1.2, 0.9, region);
    for (double c : {0.01, 3.0, 250.0}) {
        interval_set scaled;
        for (const auto& p : region) scaled.add({c * p.lo, c * p.hi});
        EXPECT_NEAR(selective_p(1.2 * c, 0.9 * c, scaled), base, 1e-12);
    }
}

TEST(NaiveP, KnownValues) {
    EXPECT_DOUBLE_EQ(naive_p(0.0, 2.0), 1.0);
    EXPECT_NEAR(naive_p(1.959964 * 2.0, 2.0), 0.05, 1e-6);
    EXPECT_NEAR(naive_p(-3.0, 3.0), 0.3173105, 1e-6);
}

TEST(BonferroniP, KnownValues) {
    EXPECT_EQ(bonferroni_p(0.0, 50), 0.0);
    EXPECT_EQ(bonferroni_p(0.3, 100), 1.0);
    EXPECT_DOUBLE_EQ(bonferroni_p(std::ldexp(0.5, -10), 10), 0.5);
    // 2^2000 overflows a double; the log form must not.
    EXPECT_EQ(bonferroni_p(1e-300, 2000), 1.0);
}

TEST(Methods, RoundTripNames) {
    for (auto m : {method::selective, method::oc, method::naive, method::bonferroni})
        EXPECT_EQ(parse_method(to_string(m)), m);
    EXPECT_THROW(parse_method("exact"), invalid_argument);
}

TEST(OcP, MatchesQuadratureOnRandomInstances) {
    std::mt19937_64 rng(21);
    for (int rep = 0; rep < 20; ++rep) {
        const std::size_t n = 10, d = 1 + rep % 2;
        auto x = oracle::random_instance(rng, n, d, 0.3);
        x(n - 1, 0) += 2.5;
        const dbscan_params params{0.4, 3};
        const auto obs = detect_anomalies(x, params).anomalies;
        if (obs.empty() || obs.size() >= n) continue;
        const auto lp = make_line_param(x, obs, obs.back(), build_covariance(covariance_request::scalar(1.0), n, d));
        const auto region = oc_region(lp, params.eps, obs);
        ASSERT_TRUE(region.contains(lp.z_obs));
        EXPECT_NEAR(oc_p(lp, params.eps, obs), oracle::selective_p_quadrature(lp.z_obs, lp.sd(), interval_set{region}), 1e-9);
    }
}

TEST(OcP, UnconstrainedLineEqualsNaive) {
    line_param lp;
    lp.n = 2;
    lp.index = 1;
    lp.a = {0.0, 5.0};
    lp.b = {0.0, 0.0};
    lp.z_obs = 1.1;
    lp.var = 2.0;
    EXPECT_NEAR(oc_p(lp, 0.5, {1}), naive_p(1.1, std::sqrt(2.0)), 1e-14);
}
