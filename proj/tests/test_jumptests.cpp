#include "fixtures.hpp"
#include "oracles.hpp"

#include <jumplab/jumptests.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

using namespace jumplab;
using namespace jumplab::jumptest;
using measures::compute_measures;
using measures::NeighbourKind;

namespace {

std::vector<double> scaled(std::span<const double> r, double c) {
    std::vector<double> out(r.begin(), r.end());
    for (auto& x : out) x *= c;
    return out;
}

std::vector<double> with_jump(std::vector<double> r, std::size_t at, double z) {
    r[at] += z;
    return r;
}

}  // namespace

TEST(JumpTests, MethodNamesAndTails) {
    for (Method m : all_methods) EXPECT_EQ(parse_method(method_name(m)), m);
    EXPECT_EQ(parse_method("medrv"), Method::MEDRV);
    EXPECT_EQ(parse_method("pz"), std::nullopt);
    EXPECT_EQ(tail_of(Method::ASJ), Tail::Lower);
    EXPECT_EQ(tail_of(Method::JO), Tail::TwoSidedNormal);
    EXPECT_EQ(tail_of(Method::LM), Tail::Gumbel);
    EXPECT_EQ(tail_of(Method::PZ4), Tail::Upper);
    EXPECT_TRUE(is_variation_based(Method::PZ2));
    EXPECT_FALSE(is_variation_based(Method::JO));
}

TEST(JumpTests, TuningValidation) {
    TuningConfig t;
    EXPECT_NO_THROW(t.validate());
    EXPECT_EQ(t.alpha, 0.01);
    EXPECT_EQ(t.c_theta, 3.0);
    EXPECT_EQ(t.asj.varpi, 0.48);
    EXPECT_EQ(t.pz.theta_scale, 2.3);
    EXPECT_EQ(t.lm.K, 10u);
    EXPECT_EQ(TuningConfig::conservative_abd().abd.alpha, 1e-5);
    t.asj.varpi = 0.2;  // below 1/2 - 1/p = 0.25
    EXPECT_THROW(t.validate(), DomainError);
    t = {};
    t.alpha = 1.0;
    EXPECT_THROW(t.validate(), DomainError);
    t = {};
    t.pz.tau = 0.0;
    EXPECT_THROW(t.validate(), DomainError);
}

TEST(JumpTests, DecideExamples) {
    EXPECT_EQ(decide(3.0, Tail::Upper, 0.01), 1);
    EXPECT_EQ(decide(2.3, Tail::Upper, 0.01), 0);
    EXPECT_EQ(decide(3.0, Tail::Lower, 0.01), 0);
    EXPECT_EQ(decide(-3.0, Tail::Lower, 0.01), 1);
    EXPECT_EQ(decide(-3.0, Tail::TwoSidedNormal, 0.01), 1);
    EXPECT_EQ(decide(2.55, Tail::TwoSidedNormal, 0.01), 0);
    EXPECT_EQ(decide(4.7, Tail::Gumbel, 0.01), 1);
    EXPECT_EQ(decide(4.5, Tail::Gumbel, 0.01), 0);
    EXPECT_EQ(decide(std::nan(""), Tail::Lower, 0.01), 0);
    EXPECT_THROW(decide(1.0, Tail::Upper, 0.0), DomainError);
}

TEST(JumpTests, RatioStatisticConstants) {
    const double pi = std::numbers::pi;
    EXPECT_NEAR(bns_variance_constant(), pi * pi / 4 + pi - 5, 1e-15);
    EXPECT_NEAR(bns_variance_constant(), 0.6089938, 1e-7);
}

TEST(JumpTests, RatioStatisticDegenerateCases) {
    measures::MeasureSet ms;
    ms.M = 72;
    EXPECT_EQ(bns_stat(ms), 0.0);
    EXPECT_EQ(cpr_stat(ms), 0.0);
    EXPECT_EQ(minmed_stat(ms, NeighbourKind::Min), 0.0);
    ms.rv = 1e-4;
    ms.bv = 1e-4;
    ms.tp = 1e-8;
    ms.minrv = ms.medrv = ms.ctbv = 1e-4;
    EXPECT_EQ(bns_stat(ms), 0.0);
    EXPECT_EQ(minmed_stat(ms, NeighbourKind::Min), 0.0);
    EXPECT_EQ(minmed_stat(ms, NeighbourKind::Med), 0.0);
    ms.bv = 0.0;  // bv = 0 with tp > 0
    EXPECT_EQ(bns_stat(ms), 0.0);
}

TEST(JumpTests, RatioStatisticFormula) {
    measures::MeasureSet ms;
    ms.M = 72;
    ms.rv = 2e-4;
    ms.bv = 1.5e-4;
    ms.tp = 3e-8;  // TP/BV^2 = 1.333
    ms.minrv = 1.6e-4;
    ms.minrq = 1e-8;  // ratio < 1, clamped
    const double expected = (1 - 0.75) / std::sqrt(0.6089938 / 72.0 * (3e-8 / (1.5e-4 * 1.5e-4)));
    EXPECT_NEAR(bns_stat(ms), expected, 1e-4 * expected);
    EXPECT_NEAR(minmed_stat(ms, NeighbourKind::Min), (1 - 0.8) / std::sqrt(1.81 / 72.0), 1e-12);
}

TEST(JumpTests, CprEqualsBnsWithoutTruncation) {
    const auto r = oracle::gaussian_returns(78, 1e-3, 21);
    const auto ms = compute_measures(r);
    ASSERT_EQ(ms.ctbv, ms.bv);
    EXPECT_EQ(cpr_stat(ms), bns_stat(ms));
}

TEST(JumpTests, MixedMomentsAgainstOracles) {
    EXPECT_EQ(mixed_moment(2, 4.0), 204.0);
    EXPECT_EQ(mixed_moment(2, 2.0), 4.0);
    EXPECT_EQ(mixed_moment(3, 4.0), 321.0);
    EXPECT_EQ(mixed_moment(4, 4.0), 456.0);
    EXPECT_NEAR(mixed_moment(2, 6.0), static_cast<double>(oracle::mixed_moment_quadrature(2, 6.0L, 900)),
                1e-6 * mixed_moment(2, 6.0));
    for (std::size_t k : {2u, 3u, 4u}) {
        SCOPED_TRACE(k);
        const double q = static_cast<double>(oracle::mixed_moment_quadrature(k, 4.0L, 900));
        EXPECT_NEAR(mixed_moment(k, 4.0), q, 1e-6 * q);
        EXPECT_NEAR(mixed_moment(k, 4.0), oracle::mixed_moment_monte_carlo_p4(k, 200000, 3 + k), 0.5);
    }
    EXPECT_NEAR(mixed_moment(2, 2.0), static_cast<double>(oracle::mixed_moment_quadrature(2, 2.0L, 900)), 1e-8);
    EXPECT_THROW(mixed_moment(2, 3.0), DomainError);
}

TEST(JumpTests, AsjVarianceFactor) { EXPECT_NEAR(asj_variance_factor(4.0, 2), 480.0 / 9.0, 1e-10); }

TEST(JumpTests, AsjNullRatioNearLimit) {
    // fine grid: the ratio approaches k^{p/2 - 1} = 2
    const auto days = fixture::null_days(40, 1440, 1, 22);
    double mean = 0;
    for (const auto& r : days) mean += asj_test(r, compute_measures(r), {}).ratio;
    mean /= static_cast<double>(days.size());
    EXPECT_NEAR(mean, 2.0, 0.1);
}

TEST(JumpTests, AsjJumpDayRejectsInLowerTail) {
    const auto r = with_jump(fixture::null_days(1, 720, 1, 23)[0], 300, 0.03);
    const auto res = asj_test(r, compute_measures(r), {});
    EXPECT_NEAR(res.ratio, 1.0, 0.1);
    EXPECT_LT(res.statistic, -3.0);
    EXPECT_EQ(decide(res.statistic, Tail::Lower, 0.01), 1);
}

TEST(JumpTests, AsjUndefinedWhenEverythingTruncated) {
    std::vector<double> r(72, 0.0);
    r[5] = 0.01;
    r[40] = -0.01;
    auto ms = compute_measures(r);
    const auto res = asj_test(r, ms, {});
    EXPECT_TRUE(std::isnan(res.statistic));
    EXPECT_FALSE(res.diagnostic.empty());
    const auto out = run_test(Method::ASJ, r, ms, {}, {1, 0, 0});
    EXPECT_EQ(out.indicator, 0);
    EXPECT_FALSE(out.diagnostic.empty());
}

TEST(JumpTests, PzExactCancellationAndDeterminism) {
    const auto r = oracle::gaussian_returns(72, 1e-3, 24);
    const auto ms = compute_measures(r);
    TuningConfig t;
    // eta = 1 everywhere and nothing above the threshold: numerator vanishes
    t.pz.theta_scale = 1e6;
    EXPECT_EQ(pz_stat(r, ms, t, 2.0, std::vector<double>(72, 1.0)), 0.0);
    const StreamKey key{5, 2, 9};
    const auto a = run_test(Method::PZ4, r, ms, {}, key);
    const auto b = run_test(Method::PZ4, r, ms, {}, key);
    EXPECT_EQ(a.statistic, b.statistic);
    const auto c = run_test(Method::PZ2, r, ms, {}, key);
    EXPECT_NE(a.statistic, c.statistic);
}

TEST(JumpTests, PzEtaLaw) {
    RandomStream rng({7, 0, 0}, StreamTag::Pz2);
    const auto eta = draw_eta(20000, 0.05, rng);
    double s = 0, s2 = 0;
    for (double e : eta) {
        ASSERT_TRUE(e == 0.95 || e == 1.05);
        s += e;
        s2 += e * e;
    }
    const double n = static_cast<double>(eta.size());
    EXPECT_NEAR(s / n, 1.0, 5 * 0.05 / std::sqrt(n));
    EXPECT_NEAR(s2 / n - (s / n) * (s / n), 0.0025, 1e-4);
}

TEST(JumpTests, PzRejectsLargeJump) {
    const auto r = with_jump(oracle::gaussian_returns(72, 1e-3, 25), 30, 0.02);
    const auto ms = compute_measures(r);
    const auto out = run_test(Method::PZ2, r, ms, {}, {1, 0, 0});
    EXPECT_GT(out.statistic, 10.0);
    EXPECT_EQ(out.indicator, 1);
}

TEST(JumpTests, AbdBonferroniExamples) {
    EXPECT_NEAR(bonferroni_level(0.01, 72), 1.3958e-4, 1e-8);
    EXPECT_NEAR(abd_critical_value(0.01, 72), oracle::normal_upper_quantile((1 - std::pow(0.99, 1.0 / 72)) / 2), 1e-6);
    EXPECT_NEAR(abd_critical_value(0.01, 72), 3.8089, 1e-4);
    EXPECT_NEAR(abd_critical_value(0.01, 72), 3.812, 5e-3);
    const std::vector<double> zeros(72, 0.0);
    const auto out = abd_scan(zeros, compute_measures(zeros), 0.01);
    EXPECT_EQ(out.indicator, 0);
    EXPECT_TRUE(out.flagged_intervals.empty());
}

TEST(JumpTests, AbdFlagsJumpInterval) {
    const auto r = with_jump(oracle::gaussian_returns(72, 1e-3, 26), 44, -0.015);
    const auto out = abd_scan(r, compute_measures(r), 0.01);
    EXPECT_EQ(out.indicator, 1);
    ASSERT_EQ(out.flagged_intervals.size(), 1u);
    EXPECT_EQ(out.flagged_intervals[0], 44u);
}

TEST(JumpTests, AbdZeroBipowerFlagsNonzeroReturns) {
    std::vector<double> r(72, 0.0);
    r[10] = 0.01;
    r[50] = 0.02;
    const auto out = abd_scan(r, compute_measures(r), 0.01);
    EXPECT_EQ(out.flagged_intervals, (std::vector<std::size_t>{10, 50}));
    EXPECT_FALSE(out.diagnostic.empty());
}

TEST(JumpTests, AbdMonotoneInAlpha) {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        auto r = oracle::gaussian_returns(72, 1e-3, 100 + seed);
        r[seed % 72] += 0.004 * static_cast<double>(seed % 4);
        const auto ms = compute_measures(r);
        std::size_t prev = 73;
        for (double a : {0.1, 0.05, 0.01, 1e-3, 1e-5}) {
            const auto n = abd_scan(r, ms, a).flagged_intervals.size();
            EXPECT_LE(n, prev);
            prev = n;
        }
    }
}

TEST(JumpTests, LmNormingConstants) {
    const auto paper = lm_norming(72, LmConstants::Paper);
    EXPECT_NEAR(paper.location, 2.5826, 1e-4);
    EXPECT_NEAR(paper.scale, 1.1015, 1e-4);
    const double c = std::sqrt(2 / std::numbers::pi), lm = std::log(72.0);
    const auto orig = lm_norming(72, LmConstants::Original);
    EXPECT_NEAR(orig.location,
                std::sqrt(2 * lm) / c - (std::log(std::numbers::pi) + std::log(lm)) / (2 * c * std::sqrt(2 * lm)),
                1e-12);
    EXPECT_NEAR(orig.scale, 1 / (c * std::sqrt(2 * lm)), 1e-12);
    EXPECT_NEAR(special::gumbel_upper_quantile(0.01), 4.6001, 1e-4);
}

TEST(JumpTests, LmZeroReturns) {
    TuningConfig t;
    for (auto v : {LmConstants::Paper, LmConstants::Original}) {
        t.lm.constants = v;
        const auto n = lm_norming(72, v);
        const auto res = lm_test(std::vector<double>(72, 0.0), t);
        EXPECT_NEAR(res.statistic, -n.location / n.scale, 1e-12);
        EXPECT_TRUE(res.flagged_intervals.empty());
    }
}

TEST(JumpTests, LmFlagsJumpInterval) {
    const auto r = with_jump(oracle::gaussian_returns(72, 1e-3, 27), 20, 0.02);
    const auto res = lm_test(r, {});
    ASSERT_FALSE(res.flagged_intervals.empty());
    EXPECT_EQ(res.flagged_intervals[0], 20u);
    EXPECT_GT(res.statistic, special::gumbel_upper_quantile(0.01));
}

TEST(JumpTests, LmZeroLocalVarianceIsInfinite) {
    std::vector<double> r(72, 0.0);
    r[30] = 0.01;
    const auto res = lm_test(r, {});
    EXPECT_TRUE(std::isinf(res.statistic));
    EXPECT_FALSE(res.diagnostic.empty());
}

TEST(JumpTests, JoDegenerateCases) {
    measures::MeasureSet ms;
    ms.M = 72;
    EXPECT_EQ(jo_stat(ms), 0.0);
    ms.rv = ms.swv = 1e-4;
    ms.bv = 1e-4;
    ms.jo_omega = 1e-10;
    EXPECT_EQ(jo_stat(ms), 0.0);
    const std::vector<double> zeros(72, 0.0);
    EXPECT_EQ(jo_stat(compute_measures(zeros)), 0.0);
}

TEST(JumpTests, JoSignFollowsJumpSign) {
    const auto base = oracle::gaussian_returns(72, 1e-3, 28);
    const auto up = with_jump(base, 30, 0.05);
    const auto down = with_jump(base, 30, -0.05);
    EXPECT_GT(jo_stat(compute_measures(up)), 0.0);  // SwV > RV for positive jumps
    EXPECT_LT(jo_stat(compute_measures(down)), 0.0);
}

TEST(JumpTests, ScaleEquivariance) {
    const auto r = with_jump(oracle::gaussian_returns(72, 1e-3, 29), 33, 0.006);
    const auto s = scaled(r, 3.7);
    const auto a = compute_measures(r), b = compute_measures(s);
    const TuningConfig t;
    EXPECT_NEAR(bns_stat(a), bns_stat(b), 1e-10);
    EXPECT_NEAR(cpr_stat(a), cpr_stat(b), 1e-10);
    EXPECT_NEAR(minmed_stat(a, NeighbourKind::Min), minmed_stat(b, NeighbourKind::Min), 1e-10);
    EXPECT_NEAR(minmed_stat(a, NeighbourKind::Med), minmed_stat(b, NeighbourKind::Med), 1e-10);
    EXPECT_NEAR(asj_stat(r, a, t), asj_stat(s, b, t), 1e-10);
    EXPECT_NEAR(lm_stat(r, t), lm_stat(s, t), 1e-10);
    for (Method m : {Method::BNS, Method::CPR, Method::MINRV, Method::MEDRV, Method::ASJ, Method::LM, Method::ABD})
        EXPECT_EQ(run_test(m, r, a, t, {1, 0, 0}).indicator, run_test(m, s, b, t, {1, 0, 0}).indicator);
}

TEST(JumpTests, IndicatorMatchesCriticalRegion) {
    const TuningConfig t;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        auto r = oracle::gaussian_returns(72, 1e-3, 300 + seed);
        if (seed % 2) r[seed] += 0.01;
        const auto ms = compute_measures(r);
        for (Method m : all_methods) {
            const auto out = run_test(m, r, ms, t, {seed, 0, 0});
            ASSERT_TRUE(out.indicator == 0 || out.indicator == 1);
            if (m == Method::ABD || m == Method::LM)
                EXPECT_EQ(out.indicator, out.flagged_intervals.empty() ? 0 : 1);
            else
                EXPECT_EQ(out.indicator, decide(out.statistic, out.tail, t.alpha));
        }
    }
}
