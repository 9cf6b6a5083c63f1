#pragma once

// Euler simulation of the bivariate jump diffusion with dynamic jump
// intensities, scenario presets and an optional noise injector.

#include <jumplab/error.hpp>
#include <jumplab/panel.hpp>
#include <jumplab/rng.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace jumplab::simulate {

/// Trading days per year; converts annualized variance to daily units.
inline constexpr double trading_days = 252.0;

enum class IntensityKind { None, Constant, Hawkes, StateDependent, MirrorPrice };

struct IntensitySpec {
    IntensityKind kind = IntensityKind::None;
    double delta0 = 0.0;     // Constant level, or Hawkes starting value
    double alpha = 0.0;      // Hawkes mean reversion
    double beta = 0.0;       // Hawkes excitation
    double delta_inf = 0.0;  // Hawkes steady-state level
    double beta0 = 0.0;      // state-dependent intercept
    double beta1 = 0.0;      // state-dependent slope on start-of-day variance

    static IntensitySpec none() { return {}; }
    static IntensitySpec constant(double d) { return {IntensityKind::Constant, d}; }
    static IntensitySpec hawkes(double alpha, double beta, double delta_inf, double delta0) {
        return {IntensityKind::Hawkes, delta0, alpha, beta, delta_inf};
    }
    static IntensitySpec state_dependent(double b0, double b1) {
        IntensitySpec s;
        s.kind = IntensityKind::StateDependent;
        s.beta0 = b0;
        s.beta1 = b1;
        return s;
    }
    static IntensitySpec mirror_price() { return {IntensityKind::MirrorPrice}; }
};

inline std::string_view intensity_kind_name(IntensityKind k) {
    switch (k) {
        case IntensityKind::None: return "none";
        case IntensityKind::Constant: return "constant";
        case IntensityKind::Hawkes: return "hawkes";
        case IntensityKind::StateDependent: return "state_dependent";
        case IntensityKind::MirrorPrice: return "mirror_price";
    }
    return "?";
}

/// How a jump size drawn in reported (annualized) units maps to a daily log-return.
enum class UnitConvention { SqrtDay, RawAnnual, PerDay };

inline std::string_view unit_convention_name(UnitConvention u) {
    switch (u) {
        case UnitConvention::SqrtDay: return "SqrtDay";
        case UnitConvention::RawAnnual: return "RawAnnual";
        case UnitConvention::PerDay: return "PerDay";
    }
    return "?";
}

inline double unit_scale(UnitConvention u) {
    switch (u) {
        case UnitConvention::SqrtDay: return 1.0 / std::sqrt(trading_days);
        case UnitConvention::RawAnnual: return 1.0 / trading_days;
        case UnitConvention::PerDay: return 1.0;
    }
    return 1.0;
}

enum class NoiseKind { IID, AR1 };

struct NoiseConfig {
    NoiseKind kind = NoiseKind::IID;
    double phi = 0.0;
    double noise_ratio = 0.0;
};

struct PriceJumpLaw {
    double pi_p = 0.5;     // probability of a negative sign
    double mu_p = 1.0;     // mean of the log-magnitude
    double sigma_p = 0.5;  // s.d. of the log-magnitude
};

struct VolJumpLaw {
    double mu_v = 0.03;  // exponential mean
};

struct DgpConfig {
    double mu = 0.2;
    double gamma = -7.9;
    double kappa = 0.03;
    double theta = 0.02;
    double sigma_v = 0.02;
    double rho = 0.0;
    std::optional<double> v0;  // starting variance, theta when absent
    IntensitySpec p_intensity;
    IntensitySpec v_intensity;
    PriceJumpLaw p_jump;
    VolJumpLaw v_jump;
    std::size_t steps_per_day = 720;
    std::size_t thin_factor = 10;
    UnitConvention unit_convention = UnitConvention::SqrtDay;
    std::optional<NoiseConfig> noise;

    double initial_variance() const { return v0.value_or(theta); }

    void validate() const {
        auto fail = [](const std::string& what) { throw DomainError("dgp: " + what); };
        if (!(theta > 0.0)) fail("theta must be positive");
        if (!(kappa >= 0.0) || !(sigma_v >= 0.0)) fail("kappa and sigma_v must be nonnegative");
        if (2.0 * kappa * theta < sigma_v * sigma_v) fail("2 kappa theta must be at least sigma_v^2");
        if (!(p_jump.sigma_p > 0.0)) fail("sigma_p must be positive");
        if (!(p_jump.pi_p >= 0.0 && p_jump.pi_p <= 1.0)) fail("pi_p must lie in [0,1]");
        if (!(v_jump.mu_v > 0.0)) fail("mu_v must be positive");
        if (!(rho >= -1.0 && rho <= 1.0)) fail("rho must lie in [-1,1]");
        if (initial_variance() < 0.0) fail("v0 must be nonnegative");
        if (steps_per_day == 0 || thin_factor == 0 || steps_per_day % thin_factor != 0)
            fail("thin_factor must divide steps_per_day");
        if (steps_per_day / thin_factor < IntradayDay::min_returns) fail("fewer than 4 thinned returns per day");
        if (p_intensity.kind == IntensityKind::MirrorPrice) fail("the price intensity cannot mirror itself");
        for (const auto* s : {&p_intensity, &v_intensity})
            if (s->kind == IntensityKind::Hawkes && !(s->alpha > s->beta && s->beta >= 0.0))
                fail("Hawkes intensity needs alpha > beta >= 0");
        if (noise) {
            if (!(std::abs(noise->phi) < 1.0)) fail("noise phi must satisfy |phi| < 1");
            if (!(noise->noise_ratio >= 0.0)) fail("noise_ratio must be nonnegative");
        }
    }
};

// ---------------------------------------------------------------------------
// Intensities
// ---------------------------------------------------------------------------

/// Unconditional mean alpha delta_inf / (alpha - beta) of the Hawkes recursion.
inline double hawkes_unconditional_mean(double alpha, double beta, double delta_inf) {
    if (!(alpha > beta)) throw DomainError("hawkes_unconditional_mean: alpha must exceed beta");
    return alpha * delta_inf / (alpha - beta);
}

/// Steady-state level giving the requested unconditional mean.
inline double hawkes_steady_state(double alpha, double beta, double mean) {
    if (!(alpha > beta)) throw DomainError("hawkes_steady_state: alpha must exceed beta");
    return mean * (alpha - beta) / alpha;
}

inline double clamp_unit(double x) { return std::clamp(x, 0.0, 1.0); }

/// Next-day intensity from the previous intensity, jump and start-of-day variance.
/// Mirror intensities are resolved by the caller.
inline double intensity_step(const IntensitySpec& spec, double previous, int dN_prev, double v_open) {
    switch (spec.kind) {
        case IntensityKind::None: return 0.0;
        case IntensityKind::Constant: return clamp_unit(spec.delta0);
        case IntensityKind::Hawkes:
            return clamp_unit(spec.alpha * spec.delta_inf + (1.0 - spec.alpha) * previous + spec.beta * dN_prev);
        case IntensityKind::StateDependent: return clamp_unit(spec.beta0 + spec.beta1 * v_open);
        case IntensityKind::MirrorPrice: return clamp_unit(previous);
    }
    return 0.0;
}

/// Intensity on the first simulated day.
inline double initial_intensity(const IntensitySpec& spec, double v_open) {
    switch (spec.kind) {
        case IntensityKind::None: return 0.0;
        case IntensityKind::Constant:
        case IntensityKind::Hawkes: return clamp_unit(spec.delta0);
        case IntensityKind::StateDependent: return clamp_unit(spec.beta0 + spec.beta1 * v_open);
        case IntensityKind::MirrorPrice: return 0.0;
    }
    return 0.0;
}

// ---------------------------------------------------------------------------
// Scenario presets
// ---------------------------------------------------------------------------

struct Scenario {
    std::string name;
    DgpConfig config;
    std::vector<std::string> notes;  // calibration messages worth logging
};

inline constexpr std::string_view scenario_names[] = {"H1", "H2", "H3", "SD1", "SD2", "SD3", "null"};

/// Long-run mean of the diffusive variance including volatility jumps.
inline double mean_variance(const DgpConfig& c, double mean_vol_intensity) {
    if (!(c.kappa > 0.0)) return c.theta;
    return c.theta + mean_vol_intensity * c.v_jump.mu_v / c.kappa;
}

/// Builds one of H1-H3, SD1-SD3 (and the jump-free "null" design).
///
/// State-dependent slopes are rescaled so that beta0 + beta1 E(V) equals the
/// target mean intensity; the rescaled value is returned in `notes`.
inline Scenario make_scenario(std::string_view name, UnitConvention units = UnitConvention::RawAnnual) {
    constexpr double delta0 = 0.105;
    constexpr double hawkes_alpha = 0.094, hawkes_beta = 0.059;
    constexpr double sd_beta0 = 0.100, sd_beta1 = 0.500;

    Scenario s;
    s.name = std::string(name);
    DgpConfig& c = s.config;
    c.unit_convention = units;

    if (name == "null") return s;
    const bool hawkes = name == "H1" || name == "H2" || name == "H3";
    const bool sd = name == "SD1" || name == "SD2" || name == "SD3";
    if (!hawkes && !sd) throw DomainError("unknown scenario '" + std::string(name) + "' (valid: H1 H2 H3 SD1 SD2 SD3 null)");
    const char variant = name.back();

    double mean_vol_intensity = 0.0;
    if (variant == '2') {
        c.v_intensity = IntensitySpec::constant(delta0);
        mean_vol_intensity = delta0;
    } else if (variant == '3') {
        c.v_intensity = IntensitySpec::mirror_price();
        mean_vol_intensity = delta0;
    }

    if (hawkes) {
        c.p_intensity = IntensitySpec::hawkes(hawkes_alpha, hawkes_beta,
                                              hawkes_steady_state(hawkes_alpha, hawkes_beta, delta0), delta0);
    } else {
        const double ev = mean_variance(c, mean_vol_intensity);
        const double beta1 = (delta0 - sd_beta0) / ev;
        c.p_intensity = IntensitySpec::state_dependent(sd_beta0, beta1);
        char buf[160];
        std::snprintf(buf, sizeof buf, "%s: state-dependent slope %.6g (table value %.3f) so that %.3f + slope * E(V)=%.6g gives %.3f",
                      s.name.c_str(), beta1, sd_beta1, sd_beta0, ev, delta0);
        s.notes.emplace_back(buf);
    }
    return s;
}

// ---------------------------------------------------------------------------
// Jump draws and the daily Euler path
// ---------------------------------------------------------------------------

struct JumpDraw {
    int dN_p = 0;
    double z_p = 0.0;  // reported units
    int dN_v = 0;
    double z_v = 0.0;
    std::size_t price_step = 0;  // 1-based fine step, 0 when no price jump
    std::size_t vol_step = 0;
};

/// Bernoulli occurrences, signed lognormal price jump and exponential volatility jump.
inline JumpDraw draw_jumps(const DgpConfig& c, double delta_p, double delta_v, RandomStream& rng) {
    JumpDraw d;
    const auto steps = static_cast<std::uint32_t>(c.steps_per_day);
    const double up = rng.uniform();
    const double uv = rng.uniform();
    if (up < clamp_unit(delta_p)) {
        d.dN_p = 1;
        const double sign = rng.uniform() < c.p_jump.pi_p ? -1.0 : 1.0;
        d.z_p = sign * std::exp(c.p_jump.mu_p + c.p_jump.sigma_p * rng.normal());
        d.price_step = rng.uniform_int(1, steps);
    }
    if (uv < clamp_unit(delta_v)) {
        d.dN_v = 1;
        d.z_v = rng.exponential(c.v_jump.mu_v);
        d.vol_step = rng.uniform_int(1, steps);
    }
    return d;
}

struct DayState {
    double V = 0.0;
    double delta_p = 0.0;
    double delta_v = 0.0;
};

struct SimulationStats {
    std::uint64_t fine_steps = 0;
    std::uint64_t truncations = 0;  // steps where the variance update went negative

    SimulationStats& operator+=(const SimulationStats& o) {
        fine_steps += o.fine_steps;
        truncations += o.truncations;
        return *this;
    }
    double truncation_fraction() const {
        return fine_steps == 0 ? 0.0 : static_cast<double>(truncations) / static_cast<double>(fine_steps);
    }
};

struct SimulatedDay {
    IntradayDay day;
    double v_close = 0.0;
    SimulationStats stats;
};

/// Adds microstructure noise to the log-prices implied by `day` and returns
/// the contaminated day. Noise s.d. is noise_ratio * sqrt(BV / M) of the clean day.
inline IntradayDay inject_noise(const IntradayDay& day, const NoiseConfig& cfg, RandomStream& rng);

/// One day of the Euler scheme with jumps already drawn.
inline SimulatedDay simulate_day_path(const DgpConfig& c, std::size_t day_index, double v_open, double delta_p,
                                      double delta_v, const JumpDraw& jumps, RandomStream& rng) {
    const std::size_t n = c.steps_per_day;
    const double h = 1.0 / static_cast<double>(n);
    const double hp = h / trading_days;
    const double rho_c = std::sqrt(std::max(0.0, 1.0 - c.rho * c.rho));
    const double jump_return = jumps.dN_p ? jumps.z_p * unit_scale(c.unit_convention) : 0.0;

    std::vector<double> fine(n);
    SimulationStats stats;
    double V = v_open;
    for (std::size_t s = 1; s <= n; ++s) {
        const double vp = std::max(V, 0.0);
        const double xi_p = rng.normal();
        const double xi_v = c.rho * xi_p + rho_c * rng.normal();
        double dp = (c.mu + c.gamma * vp) * hp + std::sqrt(vp * hp) * xi_p;
        if (s == jumps.price_step) dp += jump_return;
        fine[s - 1] = dp;
        V = V + c.kappa * (c.theta - vp) * h + c.sigma_v * std::sqrt(vp * h) * xi_v;
        if (V < 0.0) ++stats.truncations;
        if (s == jumps.vol_step) V += jumps.z_v;
    }
    stats.fine_steps = n;
    const double v_close = std::max(V, 0.0);

    GroundTruth truth;
    truth.day_index = day_index;
    truth.dN_p = jumps.dN_p;
    truth.z_p = jump_return;
    truth.dN_v = jumps.dN_v;
    truth.z_v = jumps.dN_v ? jumps.z_v : 0.0;
    truth.v_open = v_open;
    truth.v_close = v_close;
    truth.delta_p = delta_p;
    truth.delta_v = delta_v;
    if (jumps.dN_p) truth.jump_step = jumps.price_step;

    IntradayDay day(day_index, thin(fine, c.thin_factor), truth);
    return {std::move(day), v_close, stats};
}

/// Simulates day `day_index` of replication `replication` from `state`.
/// Returns the day and overwrites `state` with the next day's state.
inline SimulatedDay simulate_day(const DgpConfig& c, DayState& state, std::uint64_t seed, std::uint32_t replication,
                                 std::size_t day_index) {
    const StreamKey key{seed, replication, static_cast<std::uint32_t>(day_index)};
    RandomStream jump_rng(key, StreamTag::Jumps);
    RandomStream path_rng(key, StreamTag::Simulation);
    const auto jumps = draw_jumps(c, state.delta_p, state.delta_v, jump_rng);
    auto out = simulate_day_path(c, day_index, state.V, state.delta_p, state.delta_v, jumps, path_rng);
    if (c.noise && c.noise->noise_ratio > 0.0) {
        RandomStream noise_rng(key, StreamTag::Noise);
        out.day = inject_noise(out.day, *c.noise, noise_rng);
    }
    state.V = out.v_close;
    state.delta_p = intensity_step(c.p_intensity, state.delta_p, jumps.dN_p, state.V);
    state.delta_v = c.v_intensity.kind == IntensityKind::MirrorPrice
                        ? state.delta_p
                        : intensity_step(c.v_intensity, state.delta_v, jumps.dN_v, state.V);
    return out;
}

inline DayState initial_state(const DgpConfig& c) {
    DayState s;
    s.V = c.initial_variance();
    s.delta_p = initial_intensity(c.p_intensity, s.V);
    s.delta_v = c.v_intensity.kind == IntensityKind::MirrorPrice ? s.delta_p : initial_intensity(c.v_intensity, s.V);
    return s;
}

struct SimulatedPanel {
    Panel panel;
    SimulationStats stats;
};

/// T chained days for one replication; deterministic in (config, seed, replication).
inline SimulatedPanel simulate_sequence(const DgpConfig& c, std::size_t T, std::uint64_t seed,
                                        std::uint32_t replication = 0) {
    c.validate();
    SimulatedPanel out;
    DayState state = initial_state(c);
    for (std::size_t t = 0; t < T; ++t) {
        auto d = simulate_day(c, state, seed, replication, t);
        out.stats += d.stats;
        out.panel.push_back(std::move(d.day));
    }
    return out;
}

/// A single day with deterministic jumps: a price jump of `zp` (reported units,
/// none when zero) and a volatility jump of `zv` (none when zero), each at a
/// uniform step. Used by the power experiment.
inline SimulatedDay simulate_forced_day(const DgpConfig& c, double zp, double zv, const StreamKey& key) {
    RandomStream jump_rng(key, StreamTag::Jumps);
    RandomStream path_rng(key, StreamTag::Simulation);
    JumpDraw j;
    const auto steps = static_cast<std::uint32_t>(c.steps_per_day);
    const std::size_t price_step = jump_rng.uniform_int(1, steps);
    const std::size_t vol_step = jump_rng.uniform_int(1, steps);
    if (zp != 0.0) {
        j.dN_p = 1;
        j.z_p = zp;
        j.price_step = price_step;
    }
    if (zv != 0.0) {
        j.dN_v = 1;
        j.z_v = zv;
        j.vol_step = vol_step;
    }
    auto out = simulate_day_path(c, key.day, c.initial_variance(), j.dN_p, j.dN_v, j, path_rng);
    if (c.noise && c.noise->noise_ratio > 0.0) {
        RandomStream noise_rng(key, StreamTag::Noise);
        out.day = inject_noise(out.day, *c.noise, noise_rng);
    }
    return out;
}

inline IntradayDay inject_noise(const IntradayDay& day, const NoiseConfig& cfg, RandomStream& rng) {
    if (!(cfg.noise_ratio >= 0.0)) throw DomainError("inject_noise: noise_ratio must be nonnegative");
    if (!(std::abs(cfg.phi) < 1.0)) throw DomainError("inject_noise: |phi| must be below 1");
    if (cfg.noise_ratio == 0.0) return day;
    const auto r = day.returns();
    const std::size_t M = r.size();
    double bv = 0.0;
    for (std::size_t i = 1; i < M; ++i) bv += std::abs(r[i]) * std::abs(r[i - 1]);
    bv *= (std::numbers::pi / 2.0) * (static_cast<double>(M) / (static_cast<double>(M) - 1.0));
    const double sd = cfg.noise_ratio * std::sqrt(bv / static_cast<double>(M));
    const double phi = cfg.kind == NoiseKind::AR1 ? cfg.phi : 0.0;
    const double innov = std::sqrt(1.0 - phi * phi);

    std::vector<double> u(M + 1);
    u[0] = sd * rng.normal();
    for (std::size_t i = 1; i <= M; ++i) u[i] = phi * u[i - 1] + innov * sd * rng.normal();
    std::vector<double> out(M);
    for (std::size_t i = 0; i < M; ++i) out[i] = r[i] + u[i + 1] - u[i];
    return IntradayDay(day.day_index(), std::move(out), day.truth(), day.label());
}

}  // namespace jumplab::simulate
