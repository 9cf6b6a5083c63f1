#pragma once

// Daily realized measures of variation: total, jump-robust, quarticity,
// power-variation and swap-variance measures.

#include <jumplab/error.hpp>
#include <jumplab/panel.hpp>
#include <jumplab/special.hpp>

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

namespace jumplab::measures {

using special::pi;

/// All daily realized measures used by the tests.
struct MeasureSet {
    double rv = 0.0;
    double bv = 0.0;
    double tp = 0.0;
    double ctbv = 0.0;
    double ctripv = 0.0;
    double minrv = 0.0;
    double medrv = 0.0;
    double minrq = 0.0;
    double medrq = 0.0;
    double swv = 0.0;
    double jo_omega = 0.0;  // quarticity-type estimator of the integrated cubed variance
    std::size_t M = 0;
};

/// Truncation threshold description.
///
/// Two shapes are in use: a per-return local variance (CPR: the squared
/// threshold is scale^2 * base[i]) and a daily scalar variance (ASJ, PZ: the
/// absolute-return threshold is scale * sqrt(base[0]) * (1/M)^root).
struct ThresholdSpec {
    double scale = 3.0;
    double root = 0.0;
    std::vector<double> base;

    static ThresholdSpec local(double c_theta, std::vector<double> local_variance) {
        return ThresholdSpec{c_theta, 0.0, std::move(local_variance)};
    }
    static ThresholdSpec daily(double scale, double root, double daily_variance) {
        return ThresholdSpec{scale, root, {daily_variance}};
    }

    /// Squared threshold for return i (local shape).
    double squared_level(std::size_t i) const { return scale * scale * base[i]; }

    /// Absolute-return threshold for a day of M returns (daily shape).
    double absolute_level(std::size_t M) const {
        return scale * std::sqrt(base.front()) * std::pow(1.0 / static_cast<double>(M), root);
    }

    void validate_local(std::size_t M) const {
        if (!(scale > 0.0)) throw DomainError("threshold scale must be positive");
        if (base.size() != M)
            throw DataError("threshold: need one local variance per return (" + std::to_string(M) + "), got " +
                            std::to_string(base.size()));
        for (double b : base)
            if (!(b >= 0.0)) throw DomainError("threshold: local variance must be nonnegative");
    }
};

namespace detail {

inline void require(std::size_t M, std::size_t need, const char* what) {
    if (M < need)
        throw InsufficientData(std::string(what) + ": need at least " + std::to_string(need) + " returns, got " +
                               std::to_string(M));
}

inline double median3(double a, double b, double c) { return std::max(std::min(a, b), std::min(std::max(a, b), c)); }

}  // namespace detail

inline double realized_variance(std::span<const double> r) {
    detail::require(r.size(), 1, "realized_variance");
    double s = 0.0;
    for (double x : r) s += x * x;
    return s;
}

inline double bipower_variation(std::span<const double> r) {
    const std::size_t M = r.size();
    detail::require(M, 2, "bipower_variation");
    double s = 0.0;
    for (std::size_t i = 1; i < M; ++i) s += std::abs(r[i]) * std::abs(r[i - 1]);
    return (pi / 2.0) * (static_cast<double>(M) / static_cast<double>(M - 1)) * s;
}

inline double tripower_quarticity(std::span<const double> r) {
    const std::size_t M = r.size();
    detail::require(M, 3, "tripower_quarticity");
    constexpr double e = 4.0 / 3.0;
    double s = 0.0;
    for (std::size_t i = 2; i < M; ++i)
        s += std::pow(std::abs(r[i - 2]), e) * std::pow(std::abs(r[i - 1]), e) * std::pow(std::abs(r[i]), e);
    const double m = static_cast<double>(M);
    return std::pow(special::mu_43(), -3.0) * (m * m / (m - 2.0)) * s;
}

/// Truncating function for |r|: replaced by 1.094 sqrt(theta) when r^2 > theta.
inline double tau_1(double r, double theta) { return r * r > theta ? 1.094 * std::sqrt(theta) : std::abs(r); }

/// Truncating function for |r|^{4/3}: replaced by 1.129 theta^{2/3} when r^2 > theta.
inline double tau_43(double r, double theta) {
    return r * r > theta ? 1.129 * std::pow(theta, 2.0 / 3.0) : std::pow(std::abs(r), 4.0 / 3.0);
}

/// Threshold bipower variation CTBV.
inline double threshold_bipower(std::span<const double> r, const ThresholdSpec& spec) {
    const std::size_t M = r.size();
    detail::require(M, 2, "threshold_bipower");
    spec.validate_local(M);
    double s = 0.0;
    for (std::size_t i = 1; i < M; ++i)
        s += tau_1(r[i], spec.squared_level(i)) * tau_1(r[i - 1], spec.squared_level(i - 1));
    return (pi / 2.0) * (static_cast<double>(M) / static_cast<double>(M - 1)) * s;
}

/// Threshold tripower quarticity CTriPV.
inline double threshold_tripower_quarticity(std::span<const double> r, const ThresholdSpec& spec) {
    const std::size_t M = r.size();
    detail::require(M, 3, "threshold_tripower_quarticity");
    spec.validate_local(M);
    double s = 0.0;
    for (std::size_t i = 2; i < M; ++i)
        s += tau_43(r[i], spec.squared_level(i)) * tau_43(r[i - 1], spec.squared_level(i - 1)) *
             tau_43(r[i - 2], spec.squared_level(i - 2));
    const double m = static_cast<double>(M);
    return std::pow(special::mu_43(), -3.0) * (m * m / (m - 2.0)) * s;
}

enum class NeighbourKind { Min, Med };

/// MinRV / MedRV: squared minimum (median) of adjacent absolute returns.
inline double min_med_rv(std::span<const double> r, NeighbourKind kind) {
    const std::size_t M = r.size();
    const double m = static_cast<double>(M);
    double s = 0.0;
    if (kind == NeighbourKind::Min) {
        detail::require(M, 2, "MinRV");
        for (std::size_t i = 1; i < M; ++i) {
            const double v = std::min(std::abs(r[i]), std::abs(r[i - 1]));
            s += v * v;
        }
        return pi / (pi - 2.0) * (m / (m - 1.0)) * s;
    }
    detail::require(M, 3, "MedRV");
    for (std::size_t i = 2; i < M; ++i) {
        const double v = detail::median3(std::abs(r[i]), std::abs(r[i - 1]), std::abs(r[i - 2]));
        s += v * v;
    }
    return pi / (pi + 6.0 - 4.0 * std::sqrt(3.0)) * (m / (m - 2.0)) * s;
}

/// MinRQ / MedRQ: quarticity analogues built from fourth powers.
inline double min_med_rq(std::span<const double> r, NeighbourKind kind) {
    const std::size_t M = r.size();
    const double m = static_cast<double>(M);
    double s = 0.0;
    if (kind == NeighbourKind::Min) {
        detail::require(M, 2, "MinRQ");
        for (std::size_t i = 1; i < M; ++i) s += std::pow(std::min(std::abs(r[i]), std::abs(r[i - 1])), 4);
        return pi / (3.0 * pi - 8.0) * (m * m / (m - 1.0)) * s;
    }
    detail::require(M, 3, "MedRQ");
    for (std::size_t i = 2; i < M; ++i)
        s += std::pow(detail::median3(std::abs(r[i]), std::abs(r[i - 1]), std::abs(r[i - 2])), 4);
    return 3.0 * pi / (9.0 * pi + 72.0 - 52.0 * std::sqrt(3.0)) * (m * m / (m - 2.0)) * s;
}

/// Swap variance 2 * sum(R - r) with R = exp(r) - 1 the arithmetic return.
inline double swap_variance(std::span<const double> r) {
    detail::require(r.size(), 1, "swap_variance");
    double s = 0.0;
    for (double x : r) s += std::expm1(x) - x;
    return 2.0 * s;
}

/// Estimator of the integrated cubed variance used by the swap-variance test.
/// The sum starts at the fourth return, the first with all four factors defined.
inline double jo_omega(std::span<const double> r) {
    const std::size_t M = r.size();
    detail::require(M, 4, "jo_omega");
    double s = 0.0;
    for (std::size_t i = 3; i < M; ++i) {
        double prod = 1.0;
        for (std::size_t k = 0; k < 4; ++k) prod *= std::pow(std::abs(r[i - k]), 1.5);
        s += prod;
    }
    const double m = static_cast<double>(M);
    return 3.05 * (m * m * m / (m - 3.0)) * s;
}

/// Power variation sum |r|^p over the grid coarsened by k.
inline double power_variation(std::span<const double> r, double p, std::size_t k = 1) {
    if (!(p > 0.0)) throw DomainError("power_variation: p must be positive");
    double s = 0.0;
    if (k == 1) {
        if (p == 2.0)
            for (double x : r) s += x * x;
        else
            for (double x : r) s += std::pow(std::abs(x), p);
        return s;
    }
    for (double x : thin(r, k)) s += std::pow(std::abs(x), p);
    return s;
}

/// Truncated power variation: Delta^{1-p/2}/m_p * sum |r|^p 1{|r| < threshold}.
inline double truncated_power_variation(std::span<const double> r, double p, double threshold) {
    if (!(p > 0.0)) throw DomainError("truncated_power_variation: p must be positive");
    if (!(threshold > 0.0)) throw DomainError("truncated_power_variation: threshold must be positive");
    double s = 0.0;
    for (double x : r)
        if (std::abs(x) < threshold) s += std::pow(std::abs(x), p);
    const double delta = 1.0 / static_cast<double>(r.size());
    return std::pow(delta, 1.0 - p / 2.0) / special::abs_normal_moment(p) * s;
}

/// Randomized truncated power variation M^{(p-1)/2} sum |r|^p (1 - eta 1{|r| < threshold}).
inline double randomized_truncated_pv(std::span<const double> r, double p, double threshold,
                                      std::span<const double> eta) {
    if (eta.size() != r.size())
        throw DataError("randomized_truncated_pv: need one eta draw per return (" + std::to_string(r.size()) +
                        "), got " + std::to_string(eta.size()));
    double s = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) {
        const double a = std::pow(std::abs(r[i]), p);
        s += a * (1.0 - (std::abs(r[i]) < threshold ? eta[i] : 0.0));
    }
    return std::pow(static_cast<double>(r.size()), (p - 1.0) / 2.0) * s;
}

/// Variance of the symmetric two-point law 1/2 (delta_{1-tau} + delta_{1+tau}).
inline double two_point_variance(double tau) { return 0.5 * (tau * tau) + 0.5 * (tau * tau); }

/// Rolling-window bipower estimate of the local (per-interval) variance.
///
/// V[i] = (pi/2) (K/(K-1)) sum_{j=i-K+2}^{i} |r_j||r_{j-1}| / (K-2). Entries
/// before the first complete window take its value.
inline std::vector<double> local_variance_window(std::span<const double> r, std::size_t K) {
    const std::size_t M = r.size();
    if (K < 3) throw DomainError("local_variance: window K must be at least 3");
    if (M < K)
        throw InsufficientData("local_variance: need M >= K (M=" + std::to_string(M) + ", K=" + std::to_string(K) + ")");
    const double k = static_cast<double>(K);
    const double scale = (pi / 2.0) * (k / (k - 1.0)) / (k - 2.0);
    std::vector<double> v(M);
    for (std::size_t i = K - 1; i < M; ++i) {
        double s = 0.0;
        for (std::size_t j = i + 2 - K; j <= i; ++j) s += std::abs(r[j]) * std::abs(r[j - 1]);
        v[i] = scale * s;
    }
    std::fill(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(K - 1), v[K - 1]);
    return v;
}

enum class LocalVarianceScheme { LM, CPR };

/// Local variance for the standardized-return (LM) or threshold (CPR) tests.
///
/// The CPR scheme runs the rolling window twice: returns whose square exceeds
/// c_theta^2 times the first-pass estimate are capped at that level before the
/// second pass.
inline std::vector<double> local_variance(std::span<const double> r, LocalVarianceScheme scheme, std::size_t K,
                                          double c_theta = 3.0) {
    auto v = local_variance_window(r, K);
    if (scheme == LocalVarianceScheme::LM) return v;
    std::vector<double> capped(r.begin(), r.end());
    for (std::size_t i = 0; i < capped.size(); ++i) {
        const double level = c_theta * c_theta * v[i];
        if (capped[i] * capped[i] > level) capped[i] = std::copysign(std::sqrt(level), capped[i]);
    }
    return local_variance_window(capped, K);
}

struct MeasureOptions {
    double c_theta = 3.0;
    std::size_t cpr_window = 50;
};

/// Local variance used for the CPR threshold; the window shrinks to M on short days.
inline std::vector<double> cpr_local_variance(std::span<const double> r, const MeasureOptions& opt) {
    const std::size_t K = std::min(opt.cpr_window, r.size());
    return local_variance(r, LocalVarianceScheme::CPR, K, opt.c_theta);
}

/// Computes every measure of the set for one day.
inline MeasureSet compute_measures(std::span<const double> r, const MeasureOptions& opt = {}) {
    detail::require(r.size(), 4, "compute_measures");
    MeasureSet ms;
    ms.M = r.size();
    ms.rv = realized_variance(r);
    ms.bv = bipower_variation(r);
    ms.tp = tripower_quarticity(r);
    const auto spec = ThresholdSpec::local(opt.c_theta, cpr_local_variance(r, opt));
    ms.ctbv = threshold_bipower(r, spec);
    ms.ctripv = threshold_tripower_quarticity(r, spec);
    ms.minrv = min_med_rv(r, NeighbourKind::Min);
    ms.medrv = min_med_rv(r, NeighbourKind::Med);
    ms.minrq = min_med_rq(r, NeighbourKind::Min);
    ms.medrq = min_med_rq(r, NeighbourKind::Med);
    ms.swv = swap_variance(r);
    ms.jo_omega = jo_omega(r);
    return ms;
}

inline MeasureSet compute_measures(const IntradayDay& day, const MeasureOptions& opt = {}) {
    return compute_measures(day.returns(), opt);
}

}  // namespace jumplab::measures
