#pragma once

// The ten daily price-jump tests: statistics, critical regions and the daily
// jump-occurrence decision.

#include <jumplab/error.hpp>
#include <jumplab/measures.hpp>
#include <jumplab/panel.hpp>
#include <jumplab/rng.hpp>
#include <jumplab/special.hpp>

#include <array>
#include <cctype>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace jumplab::jumptest {

enum class Method { BNS, CPR, MINRV, MEDRV, ASJ, PZ2, PZ4, ABD, LM, JO };

inline constexpr std::array<Method, 10> all_methods = {Method::BNS, Method::CPR, Method::MINRV, Method::MEDRV,
                                                       Method::ASJ, Method::PZ2, Method::PZ4, Method::ABD,
                                                       Method::LM,  Method::JO};

inline constexpr std::string_view method_name(Method m) {
    switch (m) {
        case Method::BNS: return "BNS";
        case Method::CPR: return "CPR";
        case Method::MINRV: return "MINRV";
        case Method::MEDRV: return "MEDRV";
        case Method::ASJ: return "ASJ";
        case Method::PZ2: return "PZ2";
        case Method::PZ4: return "PZ4";
        case Method::ABD: return "ABD";
        case Method::LM: return "LM";
        case Method::JO: return "JO";
    }
    return "?";
}

/// Case-insensitive lookup of a method by name.
inline std::optional<Method> parse_method(std::string_view s) {
    for (Method m : all_methods) {
        const auto name = method_name(m);
        if (name.size() != s.size()) continue;
        bool same = true;
        for (std::size_t i = 0; i < s.size(); ++i)
            if (std::toupper(static_cast<unsigned char>(s[i])) != name[i]) same = false;
        if (same) return m;
    }
    return std::nullopt;
}

/// Methods whose jump size comes from a variation difference RV - IV.
inline constexpr bool is_variation_based(Method m) {
    return m != Method::ABD && m != Method::LM && m != Method::JO;
}

enum class Tail { Upper, Lower, TwoSidedNormal, Gumbel, BonferroniScan };

inline constexpr std::string_view tail_name(Tail t) {
    switch (t) {
        case Tail::Upper: return "upper";
        case Tail::Lower: return "lower";
        case Tail::TwoSidedNormal: return "two-sided";
        case Tail::Gumbel: return "gumbel";
        case Tail::BonferroniScan: return "bonferroni-scan";
    }
    return "?";
}

inline constexpr Tail tail_of(Method m) {
    switch (m) {
        case Method::ASJ: return Tail::Lower;
        case Method::ABD: return Tail::BonferroniScan;
        case Method::LM: return Tail::Gumbel;
        case Method::JO: return Tail::TwoSidedNormal;
        default: return Tail::Upper;
    }
}

enum class LmConstants { Paper, Original };

struct AsjTuning {
    double p = 4.0;
    std::size_t k = 2;
    double theta_scale = 3.0;
    double varpi = 0.48;
};

struct PzTuning {
    double theta_scale = 2.3;
    double varpi = 0.4;
    double tau = 0.05;
};

struct LmTuning {
    std::size_t K = 10;
    LmConstants constants = LmConstants::Original;
};

struct AbdTuning {
    double alpha = 0.01;
};

/// Tuning parameters of all tests. Defaults are the values used throughout
/// the Monte Carlo study: 1% nominal size, c_theta = 3, ASJ (4, 2, 3 sqrt(BV),
/// 0.48), PZ (2.3 sqrt(BV), 0.4, tau = 0.05), LM window 10.
struct TuningConfig {
    double alpha = 0.01;
    double c_theta = 3.0;
    std::size_t cpr_window = 50;
    AsjTuning asj;
    PzTuning pz;
    LmTuning lm;
    AbdTuning abd;

    /// Conservative intraday-scan preset (alpha = 1e-5 for ABD).
    static TuningConfig conservative_abd() {
        TuningConfig t;
        t.abd.alpha = 1e-5;
        return t;
    }

    measures::MeasureOptions measure_options() const { return {c_theta, cpr_window}; }

    void validate() const {
        auto fail = [](const std::string& what) { throw DomainError("tuning: " + what); };
        if (!(alpha > 0.0 && alpha < 1.0)) fail("alpha must lie in (0,1)");
        if (!(abd.alpha > 0.0 && abd.alpha < 1.0)) fail("abd.alpha must lie in (0,1)");
        if (!(c_theta > 0.0)) fail("c_theta must be positive");
        if (cpr_window < 3) fail("cpr_window must be at least 3");
        if (asj.k < 2) fail("asj.k must be an integer >= 2");
        if (!(asj.p > 2.0)) fail("asj.p must exceed 2");
        if (!(asj.varpi > 0.5 - 1.0 / asj.p && asj.varpi < 0.5)) fail("asj.varpi must lie in (1/2 - 1/p, 1/2)");
        if (!(asj.theta_scale > 0.0)) fail("asj.theta_scale must be positive");
        if (!(pz.varpi > 0.0 && pz.varpi < 0.5)) fail("pz.varpi must lie in (0, 1/2)");
        if (!(pz.tau > 0.0 && pz.tau < 1.0)) fail("pz.tau must lie in (0,1)");
        if (!(pz.theta_scale > 0.0)) fail("pz.theta_scale must be positive");
        if (lm.K < 3) fail("lm.K must be at least 3");
    }
};

/// Result of one test on one day.
struct TestOutcome {
    Method method = Method::BNS;
    double statistic = 0.0;  // NaN when undefined (see diagnostic)
    Tail tail = Tail::Upper;
    int indicator = 0;
    std::vector<std::size_t> flagged_intervals;  // 0-based, ABD and LM only
    std::string diagnostic;
};

// ---------------------------------------------------------------------------
// Critical regions
// ---------------------------------------------------------------------------

/// Daily indicator: 1 when the statistic lies in the critical region at level alpha.
/// Undefined (NaN) statistics never reject. Bonferroni scans decide internally.
inline int decide(double statistic, Tail tail, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("decide: alpha must lie in (0,1)");
    if (std::isnan(statistic)) return 0;
    switch (tail) {
        case Tail::Upper: return statistic > special::normal_upper_quantile(alpha) ? 1 : 0;
        case Tail::Lower: return statistic < -special::normal_upper_quantile(alpha) ? 1 : 0;
        case Tail::Gumbel: return statistic > special::gumbel_upper_quantile(alpha) ? 1 : 0;
        case Tail::TwoSidedNormal: return std::abs(statistic) > special::normal_upper_quantile(alpha / 2.0) ? 1 : 0;
        case Tail::BonferroniScan: break;
    }
    throw DomainError("decide: Bonferroni scans are decided inside abd_scan");
}

// ---------------------------------------------------------------------------
// Squared-variation tests
// ---------------------------------------------------------------------------

/// (pi/2)^2 + pi - 5, the asymptotic variance constant of the relative jump measure.
inline double bns_variance_constant() { return (special::pi / 2.0) * (special::pi / 2.0) + special::pi - 5.0; }

namespace detail {

// (1 - iv/rv) / sqrt(c M^{-1} max(1, iq/iv^2)), zero when the day has no variation.
inline double ratio_statistic(double rv, double iv, double iq, double c, std::size_t M) {
    if (!(rv > 0.0) || !(iv > 0.0)) return 0.0;
    const double rj = 1.0 - iv / rv;
    const double adj = std::max(1.0, iq / (iv * iv));
    return rj / std::sqrt(c / static_cast<double>(M) * adj);
}

}  // namespace detail

inline double bns_stat(const measures::MeasureSet& ms) {
    return detail::ratio_statistic(ms.rv, ms.bv, ms.tp, bns_variance_constant(), ms.M);
}

inline double cpr_stat(const measures::MeasureSet& ms) {
    return detail::ratio_statistic(ms.rv, ms.ctbv, ms.ctripv, bns_variance_constant(), ms.M);
}

inline double minmed_stat(const measures::MeasureSet& ms, measures::NeighbourKind kind) {
    if (kind == measures::NeighbourKind::Min) return detail::ratio_statistic(ms.rv, ms.minrv, ms.minrq, 1.81, ms.M);
    return detail::ratio_statistic(ms.rv, ms.medrv, ms.medrq, 0.96, ms.M);
}

// ---------------------------------------------------------------------------
// Power-variation tests
// ---------------------------------------------------------------------------

/// m_{k,p} = E(|U|^p |U + sqrt(k-1) V|^p) for independent standard normals, p even.
inline double mixed_moment(std::size_t k, double p) {
    // Stored values for the settings in use; other even powers expand binomially.
    if (p == 2.0 && k == 2) return 4.0;
    if (p == 4.0 && k == 2) return 204.0;
    if (p == 4.0 && k == 3) return 321.0;
    if (p == 4.0 && k == 4) return 456.0;
    const double rounded = std::round(p);
    if (rounded != p || static_cast<long>(rounded) % 2 != 0 || rounded < 2)
        throw DomainError("mixed_moment: only even integer powers are supported");
    const int P = static_cast<int>(rounded);
    auto even_moment = [](int n) {  // E U^n, n even
        double m = 1.0;
        for (int j = n - 1; j > 0; j -= 2) m *= j;
        return m;
    };
    const double c2 = static_cast<double>(k) - 1.0;
    double sum = 0.0;
    double binom = 1.0;
    for (int j = 0; j <= P; ++j) {
        if (j > 0) binom = binom * (P - j + 1) / j;
        if ((P - j) % 2 != 0) continue;
        sum += binom * std::pow(c2, (P - j) / 2.0) * even_moment(P + j) * even_moment(P - j);
    }
    return sum;
}

/// Asymptotic variance factor M(p, k) of the power-variation ratio.
inline double asj_variance_factor(double p, std::size_t k) {
    const double mp = special::abs_normal_moment(p);
    const double m2p = special::abs_normal_moment(2.0 * p);
    const double kk = static_cast<double>(k);
    return (std::pow(kk, p - 2.0) * (1.0 + kk) * m2p + std::pow(kk, p - 2.0) * (kk - 1.0) * mp * mp -
            2.0 * std::pow(kk, p / 2.0 - 1.0) * mixed_moment(k, p)) /
           (mp * mp);
}

inline double asj_threshold(const measures::MeasureSet& ms, const TuningConfig& t) {
    return measures::ThresholdSpec::daily(t.asj.theta_scale, t.asj.varpi, ms.bv).absolute_level(ms.M);
}

struct AsjResult {
    double statistic = std::numeric_limits<double>::quiet_NaN();
    double ratio = std::numeric_limits<double>::quiet_NaN();
    std::string diagnostic;
};

/// Power-variation ratio test across two sampling frequencies (lower tail).
inline AsjResult asj_test(std::span<const double> r, const measures::MeasureSet& ms, const TuningConfig& t) {
    AsjResult out;
    const double p = t.asj.p;
    const std::size_t k = t.asj.k;
    if (r.size() % k != 0) {
        out.diagnostic = "asj: k does not divide M";
        return out;
    }
    const double fine = measures::power_variation(r, p, 1);
    const double threshold = asj_threshold(ms, t);
    if (!(fine > 0.0) || !(threshold > 0.0)) {
        out.diagnostic = "asj: no variation";
        return out;
    }
    const double a_p = measures::truncated_power_variation(r, p, threshold);
    if (!(a_p > 0.0)) {
        out.diagnostic = "asj: every return truncated";
        return out;
    }
    const double a_2p = measures::truncated_power_variation(r, 2.0 * p, threshold);
    out.ratio = measures::power_variation(r, p, k) / fine;
    const double sigma = asj_variance_factor(p, k) * a_2p / (a_p * a_p) / static_cast<double>(r.size());
    out.statistic = (out.ratio - std::pow(static_cast<double>(k), p / 2.0 - 1.0)) / std::sqrt(sigma);
    return out;
}

inline double asj_stat(std::span<const double> r, const measures::MeasureSet& ms, const TuningConfig& t) {
    return asj_test(r, ms, t).statistic;
}

inline double pz_threshold(const measures::MeasureSet& ms, const TuningConfig& t) {
    return measures::ThresholdSpec::daily(t.pz.theta_scale, t.pz.varpi, ms.bv).absolute_level(ms.M);
}

/// Draws one auxiliary weight per return from the two-point law on {1 - tau, 1 + tau}.
inline std::vector<double> draw_eta(std::size_t M, double tau, RandomStream& rng) {
    std::vector<double> eta(M);
    for (auto& e : eta) e = (rng() >> 63) ? 1.0 + tau : 1.0 - tau;
    return eta;
}

/// Randomized truncated power-variation statistic (upper tail).
///
/// The numerator is the randomized truncated p-variation; the denominator is
/// Var(eta) times the truncated 2p-variation over the same indicator set,
/// scaled by M^{p-1} so both sides carry the same power of M.
inline double pz_stat(std::span<const double> r, const measures::MeasureSet& ms, const TuningConfig& t, double p,
                      std::span<const double> eta) {
    const double threshold = pz_threshold(ms, t);
    const double numerator = measures::randomized_truncated_pv(r, p, threshold, eta);
    double s2p = 0.0;
    for (double x : r)
        if (std::abs(x) < threshold) s2p += std::pow(std::abs(x), 2.0 * p);
    const double denom = measures::two_point_variance(t.pz.tau) * std::pow(static_cast<double>(r.size()), p - 1.0) * s2p;
    if (!(denom > 0.0)) return 0.0;
    return numerator / std::sqrt(denom);
}

inline double pz_stat(std::span<const double> r, const measures::MeasureSet& ms, const TuningConfig& t, double p,
                      RandomStream& rng) {
    const auto eta = draw_eta(r.size(), t.pz.tau, rng);
    return pz_stat(r, ms, t, p, eta);
}

// ---------------------------------------------------------------------------
// Standardized-return tests
// ---------------------------------------------------------------------------

/// Bonferroni-adjusted per-interval level 1 - (1 - alpha)^{1/M}.
inline double bonferroni_level(double alpha, std::size_t M) {
    return -std::expm1(std::log1p(-alpha) / static_cast<double>(M));
}

inline double abd_critical_value(double alpha, std::size_t M) {
    return special::normal_upper_quantile(bonferroni_level(alpha, M) / 2.0);
}

/// Intraday scan of returns standardized by sqrt(BV / M).
inline TestOutcome abd_scan(std::span<const double> r, const measures::MeasureSet& ms, double alpha) {
    TestOutcome out;
    out.method = Method::ABD;
    out.tail = Tail::BonferroniScan;
    const double crit = abd_critical_value(alpha, r.size());
    if (!(ms.bv > 0.0)) {
        for (std::size_t i = 0; i < r.size(); ++i)
            if (r[i] != 0.0) out.flagged_intervals.push_back(i);
        out.statistic = out.flagged_intervals.empty() ? 0.0 : std::numeric_limits<double>::infinity();
        if (!out.flagged_intervals.empty()) out.diagnostic = "abd: zero bipower variation with nonzero returns";
    } else {
        const double scale = std::sqrt(ms.bv / static_cast<double>(r.size()));
        double max_abs = 0.0;
        for (std::size_t i = 0; i < r.size(); ++i) {
            const double z = std::abs(r[i]) / scale;
            max_abs = std::max(max_abs, z);
            if (z > crit) out.flagged_intervals.push_back(i);
        }
        out.statistic = max_abs;
    }
    out.indicator = out.flagged_intervals.empty() ? 0 : 1;
    return out;
}

struct GumbelNorming {
    double location = 0.0;  // C_M
    double scale = 1.0;     // S_M
};

/// Centering and scaling constants of the maximum standardized return.
inline GumbelNorming lm_norming(std::size_t M, LmConstants variant) {
    const double logm = std::log(static_cast<double>(M));
    const double logpi = std::log(special::pi);
    if (variant == LmConstants::Paper) {
        const double root_pi = std::sqrt(2.0 * logpi);
        return {std::sqrt(2.0 * logm) / 0.8 - (logpi + std::log(logm)) / (1.6 * root_pi), 1.0 / (0.6 * root_pi)};
    }
    const double c = std::sqrt(2.0 / special::pi);
    const double root_m = std::sqrt(2.0 * logm);
    return {root_m / c - (logpi + std::log(logm)) / (2.0 * c * root_m), 1.0 / (c * root_m)};
}

struct LmResult {
    double statistic = 0.0;
    std::vector<std::size_t> flagged_intervals;
    std::string diagnostic;
};

/// Maximum of returns standardized by a rolling local variance, Gumbel-normed.
/// Intervals whose own normed value exceeds the Gumbel critical value are flagged.
inline LmResult lm_test(std::span<const double> r, const TuningConfig& t) {
    const auto v = measures::local_variance(r, measures::LocalVarianceScheme::LM, t.lm.K);
    const auto norming = lm_norming(r.size(), t.lm.constants);
    const double crit = special::gumbel_upper_quantile(t.alpha);
    LmResult out;
    double max_t = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) {
        double ti = 0.0;
        if (v[i] > 0.0) {
            ti = std::abs(r[i]) / std::sqrt(v[i]);
        } else if (r[i] != 0.0) {
            ti = std::numeric_limits<double>::infinity();
            out.diagnostic = "lm: zero local variance with nonzero return";
        }
        max_t = std::max(max_t, ti);
        if ((ti - norming.location) / norming.scale > crit) out.flagged_intervals.push_back(i);
    }
    out.statistic = (max_t - norming.location) / norming.scale;
    return out;
}

inline double lm_stat(std::span<const double> r, const TuningConfig& t) { return lm_test(r, t).statistic; }

// ---------------------------------------------------------------------------
// Swap-variance test
// ---------------------------------------------------------------------------

inline double jo_stat(const measures::MeasureSet& ms) {
    if (!(ms.swv > 0.0) || !(ms.jo_omega > 0.0)) return 0.0;
    return ms.bv / (std::sqrt(ms.jo_omega) / static_cast<double>(ms.M)) * (1.0 - ms.rv / ms.swv);
}

// ---------------------------------------------------------------------------
// Dispatch
// ---------------------------------------------------------------------------

inline StreamTag pz_stream_tag(Method m) { return m == Method::PZ2 ? StreamTag::Pz2 : StreamTag::Pz4; }

/// Runs one test on one day. PZ draws its auxiliary weights from the stream
/// (key, PZ tag), so identical keys reproduce identical statistics.
inline TestOutcome run_test(Method m, std::span<const double> r, const measures::MeasureSet& ms,
                            const TuningConfig& t, const StreamKey& key) {
    TestOutcome out;
    out.method = m;
    out.tail = tail_of(m);
    switch (m) {
        case Method::BNS: out.statistic = bns_stat(ms); break;
        case Method::CPR: out.statistic = cpr_stat(ms); break;
        case Method::MINRV: out.statistic = minmed_stat(ms, measures::NeighbourKind::Min); break;
        case Method::MEDRV: out.statistic = minmed_stat(ms, measures::NeighbourKind::Med); break;
        case Method::ASJ: {
            auto res = asj_test(r, ms, t);
            out.statistic = res.statistic;
            out.diagnostic = std::move(res.diagnostic);
            break;
        }
        case Method::PZ2:
        case Method::PZ4: {
            RandomStream rng(key, pz_stream_tag(m));
            out.statistic = pz_stat(r, ms, t, m == Method::PZ2 ? 2.0 : 4.0, rng);
            break;
        }
        case Method::ABD: return abd_scan(r, ms, t.abd.alpha);
        case Method::LM: {
            auto res = lm_test(r, t);
            out.statistic = res.statistic;
            out.flagged_intervals = std::move(res.flagged_intervals);
            out.diagnostic = std::move(res.diagnostic);
            out.indicator = out.flagged_intervals.empty() ? 0 : 1;
            return out;
        }
        case Method::JO: out.statistic = jo_stat(ms); break;
    }
    out.indicator = decide(out.statistic, out.tail, t.alpha);
    return out;
}

}  // namespace jumplab::jumptest
