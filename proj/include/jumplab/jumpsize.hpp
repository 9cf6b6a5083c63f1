#pragma once

// Daily jump occurrence, signed size, log-magnitude and sign measures
// extracted from test outcomes and realized measures.

#include <jumplab/error.hpp>
#include <jumplab/jumptests.hpp>
#include <jumplab/measures.hpp>
#include <jumplab/panel.hpp>

#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace jumplab::jumpsize {

/// Sign with the tie-break sign(0) = +1.
inline int sign_of(double x) { return x < 0.0 ? -1 : 1; }

struct JumpMeasures {
    int indicator = 0;
    double z = 0.0;                       // signed jump size, log-return units
    std::optional<double> log_magnitude;  // ln|z| when a jump size was measured
    int sign = 1;                         // 0 when the method assigns no sign (JO without rejection)
    std::optional<double> iv_estimate;    // variation-based methods only
};

/// sign(daily return) * sqrt(max(rv - iv, 0)).
inline double signed_jump_variation(double rv, double iv_estimate, double daily_return) {
    if (rv < 0.0 || iv_estimate < 0.0) throw DomainError("signed_jump_variation: variations must be nonnegative");
    return sign_of(daily_return) * std::sqrt(std::max(rv - iv_estimate, 0.0));
}

/// Sum of the returns in the flagged intervals (0-based indices).
inline double intraday_jump_sum(std::span<const double> r, std::span<const std::size_t> flagged) {
    double s = 0.0;
    for (std::size_t i : flagged) {
        if (i >= r.size()) throw DomainError("intraday_jump_sum: flagged interval out of range");
        s += r[i];
    }
    return s;
}

/// f(Z) = 2(e^Z - Z - 1) - Z^2, the swap-minus-realized variance of a single jump Z.
inline double jo_f(double z) {
    if (std::abs(z) < 0.1) {
        // 2 sum_{n>=3} z^n / n!
        double term = z * z * z / 6.0;
        double s = 0.0;
        for (int n = 3; n < 20; ++n) {
            s += term;
            term *= z / (n + 1);
        }
        return 2.0 * s;
    }
    return 2.0 * (std::expm1(z) - z) - z * z;
}

inline double jo_f_prime(double z) { return 2.0 * (std::expm1(z) - z); }

/// Inverts f(Z) = d by bracketed bisection with Newton refinement.
inline double jo_jump_size_solve(double d) {
    if (!std::isfinite(d)) throw DomainError("jo_jump_size_solve: non-finite input");
    if (d == 0.0) return 0.0;
    double lo = -10.0, hi = 10.0;
    while (jo_f(lo) > d && lo > -50.0) lo = std::max(lo * 2.0, -50.0);
    while (jo_f(hi) < d && hi < 50.0) hi = std::min(hi * 2.0, 50.0);
    if (jo_f(lo) > d || jo_f(hi) < d)
        throw DomainError("jo_jump_size_solve: no root with |Z| <= 50 for d = " + std::to_string(d));
    if (d > 0.0) lo = 0.0; else hi = 0.0;

    double x = std::cbrt(3.0 * d);  // leading term of f near zero
    if (!(x > lo && x < hi)) x = 0.5 * (lo + hi);
    for (int iter = 0; iter < 200; ++iter) {
        const double fx = jo_f(x) - d;
        if (fx == 0.0) break;
        if (fx < 0.0) lo = x; else hi = x;
        const double slope = jo_f_prime(x);
        double next = slope > 0.0 ? x - fx / slope : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        const double step = std::abs(next - x);
        x = next;
        if (std::abs(fx) < 1e-12 && step <= 1e-15 * std::max(1.0, std::abs(x))) break;
        if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(x))) break;
    }
    return x;
}

/// ln|z| when the method measured a jump (`measured`) and z != 0, and sign(z).
inline std::pair<std::optional<double>, int> split_magnitude_sign(double z, bool measured) {
    std::optional<double> lm;
    if (measured && z != 0.0) lm = std::log(std::abs(z));
    return {lm, sign_of(z)};
}

/// Variation-based split: the magnitude exists when rv exceeds the IV estimate.
inline std::pair<std::optional<double>, int> split_magnitude_sign(double z, double rv, double iv_estimate) {
    return split_magnitude_sign(z, rv > iv_estimate);
}

/// Integrated-variance estimate paired with each variation-based method.
inline double iv_estimate(jumptest::Method m, std::span<const double> r, const measures::MeasureSet& ms,
                          const jumptest::TuningConfig& t) {
    using jumptest::Method;
    switch (m) {
        case Method::BNS: return ms.bv;
        case Method::CPR: return ms.ctbv;
        case Method::MINRV: return ms.minrv;
        case Method::MEDRV: return ms.medrv;
        case Method::ASJ:
        case Method::PZ2:
        case Method::PZ4: {
            const double thr = m == Method::ASJ ? jumptest::asj_threshold(ms, t) : jumptest::pz_threshold(ms, t);
            if (!(thr > 0.0)) return 0.0;
            return measures::truncated_power_variation(r, 2.0, thr);
        }
        default: break;
    }
    throw DomainError("iv_estimate: method has no integrated-variance estimate");
}

/// Jump measures for one method on one day.
///
/// Methods that measure no size on a day report z = 0. Without a flagged
/// interval ABD and LM fall back to the sign of the daily return; JO sizes
/// exist only on rejection days, so other days carry no sign.
inline JumpMeasures extract(const jumptest::TestOutcome& outcome, std::span<const double> r,
                            const measures::MeasureSet& ms, const jumptest::TuningConfig& t) {
    using jumptest::Method;
    JumpMeasures jm;
    jm.indicator = outcome.indicator;
    double daily = 0.0;
    for (double x : r) daily += x;

    if (jumptest::is_variation_based(outcome.method)) {
        const double iv = iv_estimate(outcome.method, r, ms, t);
        jm.iv_estimate = iv;
        jm.z = signed_jump_variation(ms.rv, iv, daily);
        jm.log_magnitude = split_magnitude_sign(jm.z, ms.rv, iv).first;
        jm.sign = sign_of(daily);
        return jm;
    }

    bool measured = false;
    if (outcome.method == Method::JO) {
        if (outcome.indicator == 1) {
            jm.z = jo_jump_size_solve(ms.swv - ms.rv);
            measured = true;
        }
    } else if (!outcome.flagged_intervals.empty()) {
        jm.z = intraday_jump_sum(r, outcome.flagged_intervals);
        measured = true;
    }
    jm.log_magnitude = split_magnitude_sign(jm.z, measured).first;
    if (measured)
        jm.sign = sign_of(jm.z);
    else
        jm.sign = outcome.method == Method::JO ? 0 : sign_of(daily);
    return jm;
}

struct MethodResult {
    jumptest::TestOutcome outcome;
    JumpMeasures jump;
};

/// Runs the requested methods on one day and extracts their jump measures.
inline std::vector<MethodResult> analyze_day(std::span<const double> r, std::span<const jumptest::Method> methods,
                                             const jumptest::TuningConfig& t, const StreamKey& key) {
    const auto ms = measures::compute_measures(r, t.measure_options());
    std::vector<MethodResult> out;
    out.reserve(methods.size());
    for (auto m : methods) {
        auto outcome = jumptest::run_test(m, r, ms, t, key);
        auto jump = extract(outcome, r, ms, t);
        out.push_back({std::move(outcome), std::move(jump)});
    }
    return out;
}

}  // namespace jumplab::jumpsize
