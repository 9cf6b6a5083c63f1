#include "oracles.hpp"

#include <jumplab/jumpsize.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

using namespace jumplab;
using namespace jumplab::jumpsize;
using jumptest::Method;

TEST(JumpSize, SignedJumpVariationExamples) {
    EXPECT_EQ(signed_jump_variation(1e-4, 1e-4, 0.01), 0.0);
    EXPECT_NEAR(signed_jump_variation(5e-4, 1e-4, -0.02), -0.02, 1e-15);
    EXPECT_EQ(signed_jump_variation(1e-4, 2e-4, -0.02), -0.0);
    EXPECT_EQ(sign_of(0.0), 1);
    EXPECT_THROW(signed_jump_variation(-1.0, 0.0, 0.0), DomainError);
}

TEST(JumpSize, SignedJumpVariationIdentity) {
    for (double rv : {1e-4, 3e-4, 1.7e-3})
        for (double iv : {0.0, 5e-5, 9.9e-5}) {
            const double z = signed_jump_variation(rv, iv, 1.0);
            EXPECT_LE(z * z + iv, rv + 1e-15);
            EXPECT_NEAR(z * z + iv, rv, 1e-15);
        }
}

TEST(JumpSize, IntradayJumpSumExamples) {
    const std::vector<double> r{0.001, 0.04, -0.05, 0.0, 0.002, 0.0, -0.01, 0.003};
    EXPECT_NEAR(intraday_jump_sum(r, std::vector<std::size_t>{2}), -0.05, 1e-18);
    EXPECT_NEAR(intraday_jump_sum(r, std::vector<std::size_t>{1, 6}), 0.03, 1e-18);
    EXPECT_EQ(intraday_jump_sum(r, std::vector<std::size_t>{}), 0.0);
    EXPECT_THROW(intraday_jump_sum(r, std::vector<std::size_t>{8}), DomainError);
}

TEST(JumpSize, JoForwardMap) {
    for (double z : {-3.0, -0.5, -0.05, -1e-4, 1e-4, 0.05, 0.5, 3.0})
        EXPECT_NEAR(jo_f(z), static_cast<double>(oracle::jo_forward(z)), 1e-15 * std::max(1.0, std::abs(jo_f(z))));
    EXPECT_EQ(jo_f(0.0), 0.0);
}

TEST(JumpSize, JoSolveExamples) {
    EXPECT_EQ(jo_jump_size_solve(0.0), 0.0);
    EXPECT_NEAR(jo_jump_size_solve(static_cast<double>(oracle::jo_forward(0.1L))), 0.1, 1e-8);
    EXPECT_NEAR(jo_f(0.1), 3.4184e-4, 1e-8);
    EXPECT_NEAR(jo_jump_size_solve(-0.26424), -1.0, 1e-4);
    EXPECT_NEAR(jo_jump_size_solve(static_cast<double>(oracle::jo_forward(-1.0L))), -1.0, 1e-8);
    EXPECT_THROW(jo_jump_size_solve(1e30), DomainError);
    EXPECT_THROW(jo_jump_size_solve(-1e5), DomainError);
    EXPECT_THROW(jo_jump_size_solve(NAN), DomainError);
}

TEST(JumpSize, JoRoundTrip) {
    for (double z : {0.01, -0.01, 0.1, -0.1, 1.0, -1.0, 5.0, -5.0, 1e-3, -20.0, 12.0}) {
        SCOPED_TRACE(z);
        const double d = static_cast<double>(oracle::jo_forward(z));
        EXPECT_NEAR(jo_jump_size_solve(d), z, 1e-8);
        EXPECT_EQ(sign_of(jo_jump_size_solve(d)), sign_of(d));
    }
}

TEST(JumpSize, SplitMagnitudeSign) {
    const auto [lm, s] = split_magnitude_sign(-0.02, 5e-4, 1e-4);
    ASSERT_TRUE(lm.has_value());
    EXPECT_NEAR(*lm, -3.912, 1e-3);
    EXPECT_EQ(s, -1);
    const auto [lm0, s0] = split_magnitude_sign(0.0, 5e-4, 1e-4);
    EXPECT_FALSE(lm0.has_value());
    EXPECT_EQ(s0, 1);
    const auto [lm1, s1] = split_magnitude_sign(-0.0, 1e-4, 1e-4);
    EXPECT_FALSE(lm1.has_value());
    (void)s1;
}

TEST(JumpSize, IvEstimateTable) {
    const auto r = oracle::gaussian_returns(72, 1e-3, 40);
    const auto ms = measures::compute_measures(r);
    const jumptest::TuningConfig t;
    EXPECT_EQ(iv_estimate(Method::BNS, r, ms, t), ms.bv);
    EXPECT_EQ(iv_estimate(Method::CPR, r, ms, t), ms.ctbv);
    EXPECT_EQ(iv_estimate(Method::MINRV, r, ms, t), ms.minrv);
    EXPECT_EQ(iv_estimate(Method::MEDRV, r, ms, t), ms.medrv);
    EXPECT_EQ(iv_estimate(Method::ASJ, r, ms, t),
              measures::truncated_power_variation(r, 2.0, jumptest::asj_threshold(ms, t)));
    EXPECT_EQ(iv_estimate(Method::PZ4, r, ms, t),
              measures::truncated_power_variation(r, 2.0, jumptest::pz_threshold(ms, t)));
    EXPECT_THROW(iv_estimate(Method::LM, r, ms, t), DomainError);
}

TEST(JumpSize, ExtractOnJumpDay) {
    auto r = oracle::gaussian_returns(72, 1e-3, 41);
    r[25] -= 0.02;
    const jumptest::TuningConfig t;
    const auto res = analyze_day(r, jumptest::all_methods, t, {3, 0, 0});
    double daily = 0;
    for (double x : r) daily += x;
    for (const auto& mr : res) {
        SCOPED_TRACE(std::string(jumptest::method_name(mr.outcome.method)));
        const auto& j = mr.jump;
        EXPECT_EQ(j.indicator, mr.outcome.indicator);
        // the truncated power variation test has little power at 72 intervals
        if (mr.outcome.method != Method::ASJ) {
            EXPECT_EQ(j.indicator, 1);
        }
        EXPECT_LT(j.z, 0.0);
        EXPECT_EQ(j.sign, -1);
        ASSERT_TRUE(j.log_magnitude.has_value());
        EXPECT_NEAR(*j.log_magnitude, std::log(std::abs(j.z)), 1e-15);
        EXPECT_NEAR(std::abs(j.z), 0.02, 0.006);
        if (jumptest::is_variation_based(mr.outcome.method)) {
            EXPECT_EQ(j.sign, sign_of(daily));
            ASSERT_TRUE(j.iv_estimate.has_value());
        }
    }
}

TEST(JumpSize, ExtractOnQuietDay) {
    const auto r = oracle::gaussian_returns(72, 1e-3, 42);
    const jumptest::TuningConfig t;
    const auto res = analyze_day(r, jumptest::all_methods, t, {3, 0, 0});
    const auto ms = measures::compute_measures(r);
    double daily = 0;
    for (double x : r) daily += x;
    for (const auto& mr : res) {
        SCOPED_TRACE(std::string(jumptest::method_name(mr.outcome.method)));
        const auto m = mr.outcome.method;
        const auto& j = mr.jump;
        if (jumptest::is_variation_based(m)) {
            EXPECT_EQ(j.log_magnitude.has_value(), ms.rv > *j.iv_estimate);
            EXPECT_EQ(j.z == 0.0, ms.rv <= *j.iv_estimate);
            EXPECT_EQ(j.sign, sign_of(daily));
        } else if (m == Method::JO) {
            if (j.indicator == 0) {
                EXPECT_EQ(j.z, 0.0);
                EXPECT_EQ(j.sign, 0);
                EXPECT_FALSE(j.log_magnitude.has_value());
            }
        } else if (mr.outcome.flagged_intervals.empty()) {
            EXPECT_EQ(j.z, 0.0);
            EXPECT_FALSE(j.log_magnitude.has_value());
            EXPECT_EQ(j.sign, sign_of(daily));
        }
    }
}

TEST(JumpSize, FlaggedSumUsesFlags) {
    jumptest::TestOutcome o;
    o.method = Method::ABD;
    o.indicator = 1;
    o.flagged_intervals = {2, 7};
    std::vector<double> r(12, 0.0);
    r[2] = 0.04;
    r[7] = -0.01;
    r[9] = -0.5;
    const auto ms = measures::compute_measures(r);
    const auto j = extract(o, r, ms, {});
    EXPECT_NEAR(j.z, 0.03, 1e-15);
    EXPECT_EQ(j.sign, 1);
    EXPECT_NEAR(*j.log_magnitude, std::log(0.03), 1e-12);
}
