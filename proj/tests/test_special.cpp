#include "oracles.hpp"

#include <jumplab/rng.hpp>
#include <jumplab/special.hpp>

#include <gtest/gtest.h>

#include <vector>

using namespace jumplab;

TEST(Special, NormalCdfKnownValues) {
    EXPECT_NEAR(special::normal_cdf(0.0), 0.5, 1e-16);
    EXPECT_NEAR(special::normal_cdf(1.959963984540054), 0.975, 1e-15);
    EXPECT_NEAR(special::normal_sf(3.0), 1.3498980316300946e-3, 1e-17);
}

TEST(Special, NormalQuantileMatchesBisection) {
    for (double p : {1e-12, 1e-8, 1e-4, 0.001, 0.01, 0.05, 0.2, 0.5, 0.7, 0.95, 0.99, 0.999, 0.9999}) {
        SCOPED_TRACE(p);
        EXPECT_NEAR(special::normal_quantile(p), oracle::normal_quantile(p), 1e-9);
    }
}

TEST(Special, UpperQuantileFarTail) {
    for (double q : {1e-3, 1e-6, 6.979e-5, 1e-10, 1e-15, 1e-30}) {
        SCOPED_TRACE(q);
        const double x = special::normal_upper_quantile(q);
        EXPECT_NEAR(x, oracle::normal_upper_quantile(q), 1e-9 * std::max(1.0, x));
    }
    EXPECT_NEAR(special::normal_upper_quantile(0.01), 2.3263478740408408, 1e-12);
    EXPECT_NEAR(special::normal_upper_quantile(0.005), 2.5758293035489004, 1e-12);
}

TEST(Special, AbsoluteNormalMoments) {
    EXPECT_NEAR(special::abs_normal_moment(2.0), 1.0, 1e-14);
    EXPECT_NEAR(special::abs_normal_moment(4.0), 3.0, 1e-13);
    EXPECT_NEAR(special::abs_normal_moment(8.0), 105.0, 1e-11);
    EXPECT_NEAR(special::mu_43(), 0.83085, 1e-4);
    for (double p : {1.0, 4.0 / 3.0, 1.5, 3.0}) {
        SCOPED_TRACE(p);
        EXPECT_NEAR(special::abs_normal_moment(p), static_cast<double>(oracle::abs_moment(p)), 1e-9);
    }
}

TEST(Special, Mu43MonteCarlo) {
    RandomStream rng({2024, 0, 0}, StreamTag::Generic);
    const int n = 2'000'000;
    long double s = 0;
    for (int i = 0; i < n; ++i) s += std::pow(std::abs(rng.normal()), 4.0 / 3.0);
    const double mc = static_cast<double>(s / n);
    // s.d. of |U|^{4/3} is about 0.75; 5 standard errors
    EXPECT_NEAR(mc, special::mu_43(), 5 * 0.75 / std::sqrt(n));
}

TEST(Special, GumbelAndChiSquare) {
    EXPECT_NEAR(special::gumbel_upper_quantile(0.01), 4.6001492, 1e-6);
    EXPECT_NEAR(special::chi2_1_sf(3.841458820694124), 0.05, 1e-12);
    EXPECT_NEAR(special::chi2_1_sf(0.0), 1.0, 1e-15);
}

TEST(Special, KolmogorovSmirnov) {
    RandomStream rng({7, 0, 0}, StreamTag::Generic);
    std::vector<double> x(2000), shifted(2000);
    for (std::size_t i = 0; i < x.size(); ++i) {
        x[i] = rng.normal();
        shifted[i] = x[i] + 0.3;
    }
    EXPECT_GT(special::ks_pvalue(special::ks_distance_normal(x), x.size()), 0.001);
    EXPECT_LT(special::ks_pvalue(special::ks_distance_normal(shifted), shifted.size()), 1e-6);
    // the 5% critical distance for large n is about 1.358 / sqrt(n)
    EXPECT_NEAR(special::ks_pvalue(1.358 / std::sqrt(10000.0), 10000), 0.05, 0.003);
}
