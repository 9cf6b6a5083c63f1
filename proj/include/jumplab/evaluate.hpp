#pragma once

// Accuracy metrics and the two Monte Carlo experiments: the single-day power
// surface and the multi-day accuracy battery.

#include <jumplab/error.hpp>
#include <jumplab/jumpsize.hpp>
#include <jumplab/jumptests.hpp>
#include <jumplab/parallel.hpp>
#include <jumplab/simulate.hpp>
#include <jumplab/special.hpp>

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace jumplab::evaluate {

namespace detail {

inline void require_same_length(std::size_t a, std::size_t b, const char* what) {
    if (a != b)
        throw DomainError(std::string(what) + ": length mismatch (" + std::to_string(a) + " vs " + std::to_string(b) + ")");
}

inline double xlogy(double x, double y) { return x == 0.0 ? 0.0 : x * std::log(y); }

}  // namespace detail

struct DetectionRates {
    std::optional<double> dj;   // undefined without true jumps
    std::optional<double> ndj;  // undefined without jump-free days
};

/// Conditional hit rates on jump days (DJ) and on jump-free days (NDJ).
inline DetectionRates detection_rates(std::span<const int> indicators, std::span<const int> dN) {
    detail::require_same_length(indicators.size(), dN.size(), "detection_rates");
    std::size_t jumps = 0, hits = 0, quiet = 0, quiet_hits = 0;
    for (std::size_t t = 0; t < dN.size(); ++t) {
        if (dN[t] == 1) {
            ++jumps;
            hits += indicators[t] == 1;
        } else {
            ++quiet;
            quiet_hits += indicators[t] == 0;
        }
    }
    DetectionRates out;
    if (jumps > 0) out.dj = static_cast<double>(hits) / static_cast<double>(jumps);
    if (quiet > 0) out.ndj = static_cast<double>(quiet_hits) / static_cast<double>(quiet);
    return out;
}

/// Likelihood-ratio p-value of a first-order Markov chain against independent
/// Bernoulli draws for a 0/1 error sequence. Degenerate sequences give p = 1.
inline double independence_test(std::span<const int> errors) {
    if (errors.size() < 2) throw DomainError("independence_test: need at least 2 observations");
    double n[2][2] = {{0.0, 0.0}, {0.0, 0.0}};
    for (std::size_t t = 1; t < errors.size(); ++t) n[errors[t - 1] != 0][errors[t] != 0] += 1.0;
    const double from0 = n[0][0] + n[0][1];
    const double from1 = n[1][0] + n[1][1];
    const double ones = n[0][1] + n[1][1];
    const double total = from0 + from1;
    if (from0 == 0.0 || from1 == 0.0 || ones == 0.0 || ones == total) return 1.0;
    const double pi = ones / total;
    const double pi01 = n[0][1] / from0;
    const double pi11 = n[1][1] / from1;
    const double ll_iid = detail::xlogy(total - ones, 1.0 - pi) + detail::xlogy(ones, pi);
    const double ll_markov = detail::xlogy(n[0][0], 1.0 - pi01) + detail::xlogy(n[0][1], pi01) +
                             detail::xlogy(n[1][0], 1.0 - pi11) + detail::xlogy(n[1][1], pi11);
    const double lr = std::max(0.0, -2.0 * (ll_iid - ll_markov));
    return special::chi2_1_sf(lr);
}

/// Days with a true jump lying in a maximal run of consecutive jump days of length >= min_run.
inline std::vector<bool> qualifying_days(std::span<const int> dN, std::size_t min_run) {
    if (min_run == 0) throw DomainError("qualifying_days: min_run must be positive");
    std::vector<bool> q(dN.size(), false);
    std::size_t t = 0;
    while (t < dN.size()) {
        if (dN[t] != 1) {
            ++t;
            continue;
        }
        std::size_t end = t;
        while (end < dN.size() && dN[end] == 1) ++end;
        if (end - t >= min_run)
            for (std::size_t s = t; s < end; ++s) q[s] = true;
        t = end;
    }
    return q;
}

struct SquaredErrorSum {
    double sum = 0.0;
    std::size_t count = 0;

    SquaredErrorSum& operator+=(const SquaredErrorSum& o) {
        sum += o.sum;
        count += o.count;
        return *this;
    }
    std::optional<double> mean() const {
        if (count == 0) return std::nullopt;
        return sum / static_cast<double>(count);
    }
};

/// Sum and count of (|z_measured| - |z_true|)^2 over qualifying jump days.
inline SquaredErrorSum jump_size_squared_errors(std::span<const double> z_measured, std::span<const double> z_true,
                                                std::span<const int> dN, std::size_t min_run) {
    detail::require_same_length(z_measured.size(), z_true.size(), "jump_size_mse");
    detail::require_same_length(z_measured.size(), dN.size(), "jump_size_mse");
    const auto q = qualifying_days(dN, min_run);
    SquaredErrorSum out;
    for (std::size_t t = 0; t < dN.size(); ++t) {
        if (!q[t]) continue;
        const double e = std::abs(z_measured[t]) - std::abs(z_true[t]);
        out.sum += e * e;
        ++out.count;
    }
    return out;
}

inline std::optional<double> jump_size_mse(std::span<const double> z_measured, std::span<const double> z_true,
                                           std::span<const int> dN, std::size_t min_run = 1) {
    return jump_size_squared_errors(z_measured, z_true, dN, min_run).mean();
}

/// Fraction of jump days whose measured sign matches the true sign.
inline std::optional<double> sign_concordance(std::span<const int> sign_measured, std::span<const int> sign_true,
                                              std::span<const int> dN) {
    detail::require_same_length(sign_measured.size(), sign_true.size(), "sign_concordance");
    detail::require_same_length(sign_measured.size(), dN.size(), "sign_concordance");
    std::size_t jumps = 0, agree = 0;
    for (std::size_t t = 0; t < dN.size(); ++t) {
        if (dN[t] != 1) continue;
        ++jumps;
        agree += sign_measured[t] == sign_true[t];
    }
    if (jumps == 0) return std::nullopt;
    return static_cast<double>(agree) / static_cast<double>(jumps);
}

// ---------------------------------------------------------------------------
// Power surface
// ---------------------------------------------------------------------------

/// n equally spaced points on [lo, hi].
inline std::vector<double> linspace(double lo, double hi, std::size_t n) {
    if (n == 0) return {};
    if (n == 1) return {lo};
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i)
        v[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    if (n % 2 == 1 && lo == -hi) v[n / 2] = 0.0;
    return v;
}

struct PowerSurface {
    std::vector<double> zp_grid;
    std::vector<double> zv_grid;
    std::vector<jumptest::Method> methods;
    std::size_t reps = 0;
    // rejection_rate[method][i_zp][i_zv]
    std::vector<std::vector<std::vector<double>>> rejection_rate;

    double rate(std::size_t m, std::size_t izp, std::size_t izv) const { return rejection_rate[m][izp][izv]; }
};

struct PowerGrid {
    std::vector<double> zp;
    std::vector<double> zv;

    /// Z^p on [-10 sqrt(theta), 10 sqrt(theta)], Z^v on [0, 20 theta].
    static PowerGrid standard(double theta, std::size_t n_zp = 11, std::size_t n_zv = 11) {
        const double a = 10.0 * std::sqrt(theta);
        return {linspace(-a, a, n_zp), linspace(0.0, 20.0 * theta, n_zv)};
    }
};

/// Rejection frequencies over a (Z^p, Z^v) grid of forced single-day jumps.
///
/// Replication r uses the same Brownian path and jump times in every cell, so
/// differences between cells reflect the jump sizes alone.
inline PowerSurface power_surface(const simulate::DgpConfig& config, const PowerGrid& grid, std::size_t reps,
                                  std::span<const jumptest::Method> methods, const jumptest::TuningConfig& tuning,
                                  std::uint64_t seed, unsigned threads = 1) {
    if (reps == 0) throw DomainError("power_surface: reps must be at least 1");
    config.validate();
    tuning.validate();
    const std::size_t nzp = grid.zp.size(), nzv = grid.zv.size(), nm = methods.size();
    const std::size_t cells = nzp * nzv;
    // counts[cell][method]
    std::vector<std::vector<std::uint32_t>> counts(cells, std::vector<std::uint32_t>(nm, 0));
    parallel_for(cells, threads, [&](std::size_t cell) {
        const double zp = grid.zp[cell / nzv];
        const double zv = grid.zv[cell % nzv];
        for (std::size_t r = 0; r < reps; ++r) {
            const StreamKey key{seed, static_cast<std::uint32_t>(r), 0};
            const auto sim = simulate::simulate_forced_day(config, zp, zv, key);
            const auto res = jumpsize::analyze_day(sim.day.returns(), methods, tuning, key);
            for (std::size_t m = 0; m < nm; ++m) counts[cell][m] += static_cast<std::uint32_t>(res[m].outcome.indicator);
        }
    });
    PowerSurface out;
    out.zp_grid = grid.zp;
    out.zv_grid = grid.zv;
    out.methods.assign(methods.begin(), methods.end());
    out.reps = reps;
    out.rejection_rate.assign(nm, std::vector<std::vector<double>>(nzp, std::vector<double>(nzv, 0.0)));
    for (std::size_t cell = 0; cell < cells; ++cell)
        for (std::size_t m = 0; m < nm; ++m)
            out.rejection_rate[m][cell / nzv][cell % nzv] =
                static_cast<double>(counts[cell][m]) / static_cast<double>(reps);
    return out;
}

/// Configuration of the single-day power experiment: intensities are
/// irrelevant because jumps are forced, variance starts at theta.
inline simulate::DgpConfig power_experiment_config(simulate::UnitConvention units = simulate::UnitConvention::SqrtDay) {
    simulate::DgpConfig c;
    c.unit_convention = units;
    c.v0 = c.theta;
    return c;
}

// ---------------------------------------------------------------------------
// Accuracy experiment
// ---------------------------------------------------------------------------

struct MethodAccuracy {
    jumptest::Method method = jumptest::Method::BNS;
    std::optional<double> dj_bar, ndj_bar, scd_bar, sde;
    std::optional<double> dj_se, ndj_se, scd_se;  // Monte Carlo standard errors of the averages
    std::optional<double> mse, mse_ge2, mse_ge3;
    std::size_t dj_reps = 0;  // replications with at least one jump
};

struct AccuracyReport {
    std::string scenario;
    std::size_t reps = 0;
    std::size_t T = 0;
    double sde_level = 0.05;
    std::vector<MethodAccuracy> methods;
    simulate::SimulationStats stats;
    double jump_frequency = 0.0;  // realized fraction of jump days

    const MethodAccuracy& at(jumptest::Method m) const {
        for (const auto& a : methods)
            if (a.method == m) return a;
        throw DomainError("AccuracyReport: method not in report");
    }
};

/// Per-replication metrics for one method.
struct ReplicationMetrics {
    DetectionRates rates;
    std::optional<double> scd;
    double independence_p = 1.0;
    SquaredErrorSum mse[3];
};

struct ReplicationResult {
    std::vector<ReplicationMetrics> per_method;
    simulate::SimulationStats stats;
    std::size_t jump_days = 0;
    std::size_t days = 0;
};

/// Simulates replication `rep` and scores every method on it.
inline ReplicationResult run_replication(const simulate::DgpConfig& config, std::size_t T,
                                         std::span<const jumptest::Method> methods,
                                         const jumptest::TuningConfig& tuning, std::uint64_t seed,
                                         std::uint32_t rep) {
    const auto sim = simulate::simulate_sequence(config, T, seed, rep);
    const std::size_t nm = methods.size();
    std::vector<int> dN(T), true_sign(T);
    std::vector<double> z_true(T);
    std::vector<std::vector<int>> ind(nm, std::vector<int>(T)), sgn(nm, std::vector<int>(T));
    std::vector<std::vector<double>> z(nm, std::vector<double>(T));
    ReplicationResult out;
    out.stats = sim.stats;
    out.days = T;
    for (std::size_t t = 0; t < T; ++t) {
        const auto& day = sim.panel[t];
        const auto& truth = *day.truth();
        dN[t] = truth.dN_p;
        z_true[t] = truth.z_p;
        true_sign[t] = jumpsize::sign_of(truth.z_p);
        out.jump_days += static_cast<std::size_t>(truth.dN_p);
        const StreamKey key{seed, rep, static_cast<std::uint32_t>(t)};
        const auto res = jumpsize::analyze_day(day.returns(), methods, tuning, key);
        for (std::size_t m = 0; m < nm; ++m) {
            ind[m][t] = res[m].outcome.indicator;
            z[m][t] = res[m].jump.z;
            sgn[m][t] = res[m].jump.sign;
        }
    }
    out.per_method.resize(nm);
    std::vector<int> err(T);
    for (std::size_t m = 0; m < nm; ++m) {
        auto& pm = out.per_method[m];
        pm.rates = detection_rates(ind[m], dN);
        pm.scd = sign_concordance(sgn[m], true_sign, dN);
        for (std::size_t t = 0; t < T; ++t) err[t] = ind[m][t] != dN[t];
        pm.independence_p = T >= 2 ? independence_test(err) : 1.0;
        for (std::size_t k = 0; k < 3; ++k) pm.mse[k] = jump_size_squared_errors(z[m], z_true, dN, k + 1);
    }
    return out;
}

namespace detail {

struct MeanAccumulator {
    double sum = 0.0, sum_sq = 0.0;
    std::size_t n = 0;

    void add(const std::optional<double>& x) {
        if (!x) return;
        sum += *x;
        sum_sq += *x * *x;
        ++n;
    }
    std::optional<double> mean() const {
        if (n == 0) return std::nullopt;
        return sum / static_cast<double>(n);
    }
    std::optional<double> standard_error() const {
        if (n < 2) return std::nullopt;
        const double m = sum / static_cast<double>(n);
        const double var = std::max(0.0, (sum_sq - static_cast<double>(n) * m * m) / static_cast<double>(n - 1));
        return std::sqrt(var / static_cast<double>(n));
    }
};

}  // namespace detail

/// N replications of T days; DJ, NDJ and SCD are averaged over replications
/// where they are defined, SDE is the fraction of replications rejecting
/// independence at `sde_level`, and MSEs pool squared errors over all
/// qualifying days of all replications.
inline AccuracyReport accuracy_experiment(const simulate::DgpConfig& config, const std::string& label, std::size_t reps,
                                          std::size_t T, std::span<const jumptest::Method> methods,
                                          const jumptest::TuningConfig& tuning, std::uint64_t seed,
                                          unsigned threads = 1, double sde_level = 0.05) {
    if (reps == 0) throw DomainError("accuracy_experiment: reps must be at least 1");
    if (T < 2) throw DomainError("accuracy_experiment: T must be at least 2");
    config.validate();
    tuning.validate();
    std::vector<ReplicationResult> results(reps);
    parallel_for(reps, threads, [&](std::size_t r) {
        results[r] = run_replication(config, T, methods, tuning, seed, static_cast<std::uint32_t>(r));
    });

    AccuracyReport report;
    report.scenario = label;
    report.reps = reps;
    report.T = T;
    report.sde_level = sde_level;
    std::size_t jump_days = 0, days = 0;
    for (const auto& r : results) {
        report.stats += r.stats;
        jump_days += r.jump_days;
        days += r.days;
    }
    report.jump_frequency = static_cast<double>(jump_days) / static_cast<double>(days);
    for (std::size_t m = 0; m < methods.size(); ++m) {
        detail::MeanAccumulator dj, ndj, scd;
        std::size_t rejections = 0;
        SquaredErrorSum mse[3];
        for (const auto& r : results) {
            const auto& pm = r.per_method[m];
            dj.add(pm.rates.dj);
            ndj.add(pm.rates.ndj);
            scd.add(pm.scd);
            rejections += pm.independence_p < sde_level;
            for (std::size_t k = 0; k < 3; ++k) mse[k] += pm.mse[k];
        }
        MethodAccuracy a;
        a.method = methods[m];
        a.dj_bar = dj.mean();
        a.ndj_bar = ndj.mean();
        a.scd_bar = scd.mean();
        a.dj_se = dj.standard_error();
        a.ndj_se = ndj.standard_error();
        a.scd_se = scd.standard_error();
        a.dj_reps = dj.n;
        a.sde = static_cast<double>(rejections) / static_cast<double>(reps);
        a.mse = mse[0].mean();
        a.mse_ge2 = mse[1].mean();
        a.mse_ge3 = mse[2].mean();
        report.methods.push_back(a);
    }
    return report;
}

}  // namespace jumplab::evaluate
