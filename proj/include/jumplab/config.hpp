#pragma once

// JSON configuration: one flat section per module. Loading patches an
// existing configuration, so files only need the keys they change.

#include <jumplab/error.hpp>
#include <jumplab/jumptests.hpp>
#include <jumplab/simulate.hpp>

#include <json.hpp>

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

namespace jumplab::config {

using json = nlohmann::ordered_json;

namespace detail {

inline void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& section) {
    if (!j.is_object()) throw DataError("config: section '" + section + "' must be an object");
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, value] : j.items())
        if (!ok.contains(key)) throw DataError("config: unknown key '" + key + "' in section '" + section + "'");
}

template <class T>
void read(const json& j, const char* key, T& out, const std::string& section) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception&) {
        throw DataError("config: '" + section + "." + key + "' has the wrong type");
    }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Tuning
// ---------------------------------------------------------------------------

inline jumptest::LmConstants parse_lm_constants(const std::string& s) {
    if (s == "paper") return jumptest::LmConstants::Paper;
    if (s == "original") return jumptest::LmConstants::Original;
    throw DataError("config: lm constants variant must be 'paper' or 'original', got '" + s + "'");
}

inline std::string lm_constants_name(jumptest::LmConstants c) {
    return c == jumptest::LmConstants::Paper ? "paper" : "original";
}

inline void apply(const json& j, jumptest::TuningConfig& t) {
    const std::string s = "tests";
    detail::check_keys(j, {"alpha", "c_theta", "cpr_window", "asj", "pz", "lm", "abd"}, s);
    detail::read(j, "alpha", t.alpha, s);
    detail::read(j, "c_theta", t.c_theta, s);
    detail::read(j, "cpr_window", t.cpr_window, s);
    if (j.contains("asj")) {
        const auto& a = j["asj"];
        detail::check_keys(a, {"p", "k", "theta_scale", "varpi"}, s + ".asj");
        detail::read(a, "p", t.asj.p, s + ".asj");
        detail::read(a, "k", t.asj.k, s + ".asj");
        detail::read(a, "theta_scale", t.asj.theta_scale, s + ".asj");
        detail::read(a, "varpi", t.asj.varpi, s + ".asj");
    }
    if (j.contains("pz")) {
        const auto& a = j["pz"];
        detail::check_keys(a, {"theta_scale", "varpi", "tau"}, s + ".pz");
        detail::read(a, "theta_scale", t.pz.theta_scale, s + ".pz");
        detail::read(a, "varpi", t.pz.varpi, s + ".pz");
        detail::read(a, "tau", t.pz.tau, s + ".pz");
    }
    if (j.contains("lm")) {
        const auto& a = j["lm"];
        detail::check_keys(a, {"K", "constants_variant"}, s + ".lm");
        detail::read(a, "K", t.lm.K, s + ".lm");
        std::string v = lm_constants_name(t.lm.constants);
        detail::read(a, "constants_variant", v, s + ".lm");
        t.lm.constants = parse_lm_constants(v);
    }
    if (j.contains("abd")) {
        const auto& a = j["abd"];
        detail::check_keys(a, {"alpha"}, s + ".abd");
        detail::read(a, "alpha", t.abd.alpha, s + ".abd");
    }
}

inline json to_json(const jumptest::TuningConfig& t) {
    return {{"alpha", t.alpha},
            {"c_theta", t.c_theta},
            {"cpr_window", t.cpr_window},
            {"asj", {{"p", t.asj.p}, {"k", t.asj.k}, {"theta_scale", t.asj.theta_scale}, {"varpi", t.asj.varpi}}},
            {"pz", {{"theta_scale", t.pz.theta_scale}, {"varpi", t.pz.varpi}, {"tau", t.pz.tau}}},
            {"lm", {{"K", t.lm.K}, {"constants_variant", lm_constants_name(t.lm.constants)}}},
            {"abd", {{"alpha", t.abd.alpha}}}};
}

// ---------------------------------------------------------------------------
// Data-generating process
// ---------------------------------------------------------------------------

inline simulate::UnitConvention parse_units(const std::string& s) {
    using simulate::UnitConvention;
    if (s == "SqrtDay") return UnitConvention::SqrtDay;
    if (s == "RawAnnual") return UnitConvention::RawAnnual;
    if (s == "PerDay") return UnitConvention::PerDay;
    throw DataError("unit convention must be SqrtDay, RawAnnual or PerDay, got '" + s + "'");
}

inline simulate::IntensityKind parse_intensity_kind(const std::string& s) {
    using simulate::IntensityKind;
    for (auto k : {IntensityKind::None, IntensityKind::Constant, IntensityKind::Hawkes, IntensityKind::StateDependent,
                   IntensityKind::MirrorPrice})
        if (s == simulate::intensity_kind_name(k)) return k;
    throw DataError("config: unknown intensity kind '" + s + "'");
}

inline void apply(const json& j, simulate::IntensitySpec& spec, const std::string& s) {
    detail::check_keys(j, {"kind", "delta0", "alpha", "beta", "delta_inf", "beta0", "beta1"}, s);
    std::string kind(simulate::intensity_kind_name(spec.kind));
    detail::read(j, "kind", kind, s);
    spec.kind = parse_intensity_kind(kind);
    detail::read(j, "delta0", spec.delta0, s);
    detail::read(j, "alpha", spec.alpha, s);
    detail::read(j, "beta", spec.beta, s);
    detail::read(j, "delta_inf", spec.delta_inf, s);
    detail::read(j, "beta0", spec.beta0, s);
    detail::read(j, "beta1", spec.beta1, s);
}

inline json to_json(const simulate::IntensitySpec& spec) {
    return {{"kind", std::string(simulate::intensity_kind_name(spec.kind))},
            {"delta0", spec.delta0},
            {"alpha", spec.alpha},
            {"beta", spec.beta},
            {"delta_inf", spec.delta_inf},
            {"beta0", spec.beta0},
            {"beta1", spec.beta1}};
}

inline void apply(const json& j, simulate::DgpConfig& c) {
    const std::string s = "simulate";
    detail::check_keys(j, {"mu", "gamma", "kappa", "theta", "sigma_v", "rho", "v0", "p_intensity", "v_intensity",
                           "p_jump", "v_jump", "steps_per_day", "thin_factor", "unit_convention", "noise"},
                       s);
    detail::read(j, "mu", c.mu, s);
    detail::read(j, "gamma", c.gamma, s);
    detail::read(j, "kappa", c.kappa, s);
    detail::read(j, "theta", c.theta, s);
    detail::read(j, "sigma_v", c.sigma_v, s);
    detail::read(j, "rho", c.rho, s);
    if (j.contains("v0")) {
        if (j["v0"].is_null())
            c.v0.reset();
        else {
            double v = 0.0;
            detail::read(j, "v0", v, s);
            c.v0 = v;
        }
    }
    if (j.contains("p_intensity")) apply(j["p_intensity"], c.p_intensity, s + ".p_intensity");
    if (j.contains("v_intensity")) apply(j["v_intensity"], c.v_intensity, s + ".v_intensity");
    if (j.contains("p_jump")) {
        const auto& a = j["p_jump"];
        detail::check_keys(a, {"pi_p", "mu_p", "sigma_p"}, s + ".p_jump");
        detail::read(a, "pi_p", c.p_jump.pi_p, s + ".p_jump");
        detail::read(a, "mu_p", c.p_jump.mu_p, s + ".p_jump");
        detail::read(a, "sigma_p", c.p_jump.sigma_p, s + ".p_jump");
    }
    if (j.contains("v_jump")) {
        const auto& a = j["v_jump"];
        detail::check_keys(a, {"mu_v"}, s + ".v_jump");
        detail::read(a, "mu_v", c.v_jump.mu_v, s + ".v_jump");
    }
    detail::read(j, "steps_per_day", c.steps_per_day, s);
    detail::read(j, "thin_factor", c.thin_factor, s);
    if (j.contains("unit_convention")) {
        std::string u;
        detail::read(j, "unit_convention", u, s);
        c.unit_convention = parse_units(u);
    }
    if (j.contains("noise")) {
        const auto& a = j["noise"];
        if (a.is_null()) {
            c.noise.reset();
        } else {
            detail::check_keys(a, {"kind", "phi", "noise_ratio"}, s + ".noise");
            simulate::NoiseConfig n = c.noise.value_or(simulate::NoiseConfig{});
            std::string kind = n.kind == simulate::NoiseKind::AR1 ? "AR1" : "IID";
            detail::read(a, "kind", kind, s + ".noise");
            if (kind != "IID" && kind != "AR1") throw DataError("config: noise kind must be IID or AR1");
            n.kind = kind == "AR1" ? simulate::NoiseKind::AR1 : simulate::NoiseKind::IID;
            detail::read(a, "phi", n.phi, s + ".noise");
            detail::read(a, "noise_ratio", n.noise_ratio, s + ".noise");
            c.noise = n;
        }
    }
}

inline json to_json(const simulate::DgpConfig& c) {
    json j = {{"mu", c.mu},
              {"gamma", c.gamma},
              {"kappa", c.kappa},
              {"theta", c.theta},
              {"sigma_v", c.sigma_v},
              {"rho", c.rho},
              {"v0", c.v0 ? json(*c.v0) : json(nullptr)},
              {"p_intensity", to_json(c.p_intensity)},
              {"v_intensity", to_json(c.v_intensity)},
              {"p_jump", {{"pi_p", c.p_jump.pi_p}, {"mu_p", c.p_jump.mu_p}, {"sigma_p", c.p_jump.sigma_p}}},
              {"v_jump", {{"mu_v", c.v_jump.mu_v}}},
              {"steps_per_day", c.steps_per_day},
              {"thin_factor", c.thin_factor},
              {"unit_convention", std::string(simulate::unit_convention_name(c.unit_convention))}};
    if (c.noise)
        j["noise"] = {{"kind", c.noise->kind == simulate::NoiseKind::AR1 ? "AR1" : "IID"},
                      {"phi", c.noise->phi},
                      {"noise_ratio", c.noise->noise_ratio}};
    else
        j["noise"] = nullptr;
    return j;
}

// ---------------------------------------------------------------------------
// Files and digests
// ---------------------------------------------------------------------------

/// Parses a JSON file; syntax errors report line and column.
inline json load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open config " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        std::size_t line = 1, column = 1;
        for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
            if (text[i] == '\n') {
                ++line;
                column = 1;
            } else {
                ++column;
            }
        }
        throw DataError(path + ": malformed JSON at line " + std::to_string(line) + ", column " +
                        std::to_string(column) + " (" + e.what() + ")");
    }
}

/// 64-bit FNV-1a digest of the compact JSON dump, as 16 hex digits.
inline std::string digest(const json& j) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char ch : j.dump()) {
        h ^= ch;
        h *= 0x100000001b3ull;
    }
    char out[17];
    std::snprintf(out, sizeof out, "%016llx", static_cast<unsigned long long>(h));
    return out;
}

}  // namespace jumplab::config
