#pragma once

// Command-line front end: subcommands, configuration layering
// (defaults < JSON file < flags), CSV emission and run manifests.

#include <jumplab/config.hpp>
#include <jumplab/error.hpp>
#include <jumplab/evaluate.hpp>
#include <jumplab/jumpsize.hpp>
#include <jumplab/jumptests.hpp>
#include <jumplab/measures.hpp>
#include <jumplab/panel.hpp>
#include <jumplab/parallel.hpp>
#include <jumplab/simulate.hpp>

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace jumplab::cli {

inline constexpr const char* version = "0.1.0";

/// Bad command-line usage (exit code 1).
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

namespace fs = std::filesystem;
using json = config::json;

inline std::string num(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", x);
    return buf;
}

inline std::string num(const std::optional<double>& x) { return x ? num(*x) : std::string(); }

inline std::string valid_methods() {
    std::string s;
    for (auto m : jumptest::all_methods) s += (s.empty() ? "" : ",") + std::string(jumptest::method_name(m));
    return s;
}

inline std::vector<jumptest::Method> parse_methods(const std::string& list) {
    std::vector<jumptest::Method> out;
    if (list.empty() || list == "all") return {jumptest::all_methods.begin(), jumptest::all_methods.end()};
    std::stringstream ss(list);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto m = jumptest::parse_method(item);
        if (!m) throw UsageError("unknown method '" + item + "'; valid methods: " + valid_methods());
        if (std::find(out.begin(), out.end(), *m) == out.end()) out.push_back(*m);
    }
    if (out.empty()) throw UsageError("no methods given; valid methods: " + valid_methods());
    return out;
}

inline std::string join_methods(std::span<const jumptest::Method> ms) {
    std::string s;
    for (auto m : ms) s += (s.empty() ? "" : ",") + std::string(jumptest::method_name(m));
    return s;
}

inline std::ofstream open_output(const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    return out;
}

/// Everything the subcommands share: layered configuration and manifest fields.
struct Options {
    std::string command;
    std::string config_path;
    std::string out;
    std::uint64_t seed = 42;
    int threads = 0;
    std::string methods = "all";

    // panel
    std::string input;
    std::size_t grid = 79;
    bool pad_forward = false;

    // experiments
    std::string scenario = "H1";
    std::size_t days = 2000;
    std::size_t reps = 0;  // 0: subcommand default
    std::size_t zp_points = 11;
    std::size_t zv_points = 11;
    std::string units;
    double sde_level = 0.05;
    bool plot_data = false;

    // tuning flags
    std::optional<double> alpha, c_theta, abd_alpha;
    std::optional<std::size_t> cpr_window;
    std::string lm_constants;
};

struct Context {
    Options opt;
    std::string command_line;
    json file_config = json::object();
    jumptest::TuningConfig tuning;
    unsigned threads = 1;
    json effective = json::object();
    json details = json::object();
    std::vector<std::string> warnings;
};

inline void write_manifest(const fs::path& dir, const Context& ctx, double runtime, const std::string& error) {
    json m;
    m["command_line"] = ctx.command_line;
    m["config_digest"] = config::digest(ctx.effective);
    m["seed"] = ctx.opt.seed;
    m["threads"] = ctx.threads;
    m["version"] = version;
    m["runtime_seconds"] = runtime;
    m["error"] = error.empty() ? json(nullptr) : json(error);
    m["warnings"] = ctx.warnings;
    m["config"] = ctx.effective;
    m["details"] = ctx.details;
    fs::create_directories(dir);
    std::ofstream out(dir / "manifest.json", std::ios::binary);
    out << m.dump(2) << "\n";
}

inline fs::path output_dir(const Options& o) {
    if (o.out.empty()) return {};
    if (o.command == "simulate") return fs::path(o.out);
    const fs::path p(o.out);
    return p.has_parent_path() ? p.parent_path() : fs::path(".");
}

// Applies the JSON file and flag overrides to the tuning configuration.
inline void resolve_tuning(Context& ctx) {
    auto& t = ctx.tuning;
    if (ctx.file_config.contains("tests")) config::apply(ctx.file_config["tests"], t);
    const auto& o = ctx.opt;
    if (o.alpha) t.alpha = *o.alpha;
    if (o.c_theta) t.c_theta = *o.c_theta;
    if (o.cpr_window) t.cpr_window = *o.cpr_window;
    if (o.abd_alpha) t.abd.alpha = *o.abd_alpha;
    if (!o.lm_constants.empty()) t.lm.constants = config::parse_lm_constants(o.lm_constants);
    try {
        t.validate();
    } catch (const DomainError& e) {
        throw UsageError(e.what());
    }
    ctx.effective["tests"] = config::to_json(t);
}

inline void require_option(const std::string& value, const char* flag) {
    if (value.empty()) throw UsageError(std::string("missing required option ") + flag);
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

inline Panel load_panel(Context& ctx) {
    require_option(ctx.opt.input, "--input");
    auto loaded = load_intraday_csv(ctx.opt.input, ctx.opt.grid, ctx.opt.pad_forward);
    for (const auto& w : loaded.warnings) {
        std::cerr << "warning: " << w << "\n";
        ctx.warnings.push_back(w);
    }
    ctx.effective["panel"] = {{"input", fs::path(ctx.opt.input).filename().string()},
                              {"grid", ctx.opt.grid},
                              {"pad_forward", ctx.opt.pad_forward}};
    return std::move(loaded.panel);
}

inline void cmd_measures(Context& ctx) {
    resolve_tuning(ctx);
    require_option(ctx.opt.out, "--out");
    const Panel panel = load_panel(ctx);
    const auto opts = ctx.tuning.measure_options();
    std::vector<measures::MeasureSet> rows(panel.T());
    parallel_for(panel.T(), ctx.threads, [&](std::size_t t) { rows[t] = measures::compute_measures(panel[t], opts); });

    auto out = open_output(ctx.opt.out);
    out << "date,day,M,rv,bv,tp,ctbv,ctripv,minrv,medrv,minrq,medrq,swv,jo_omega\n";
    for (std::size_t t = 0; t < panel.T(); ++t) {
        const auto& m = rows[t];
        out << panel[t].label() << ',' << panel[t].day_index() << ',' << m.M << ',' << num(m.rv) << ',' << num(m.bv)
            << ',' << num(m.tp) << ',' << num(m.ctbv) << ',' << num(m.ctripv) << ',' << num(m.minrv) << ','
            << num(m.medrv) << ',' << num(m.minrq) << ',' << num(m.medrq) << ',' << num(m.swv) << ','
            << num(m.jo_omega) << '\n';
    }
}

inline void cmd_test(Context& ctx, const std::vector<jumptest::Method>& methods) {
    resolve_tuning(ctx);
    require_option(ctx.opt.out, "--out");
    const Panel panel = load_panel(ctx);
    std::vector<std::vector<jumpsize::MethodResult>> rows(panel.T());
    parallel_for(panel.T(), ctx.threads, [&](std::size_t t) {
        const StreamKey key{ctx.opt.seed, 0, static_cast<std::uint32_t>(panel[t].day_index())};
        rows[t] = jumpsize::analyze_day(panel[t].returns(), methods, ctx.tuning, key);
    });
    ctx.effective["methods"] = join_methods(methods);

    auto out = open_output(ctx.opt.out);
    out << "date,day,method,statistic,tail,indicator,z,log_magnitude,sign,flagged\n";
    for (std::size_t t = 0; t < panel.T(); ++t) {
        for (const auto& r : rows[t]) {
            std::string flagged;
            for (auto i : r.outcome.flagged_intervals) flagged += (flagged.empty() ? "" : ";") + std::to_string(i + 1);
            out << panel[t].label() << ',' << panel[t].day_index() << ',' << jumptest::method_name(r.outcome.method)
                << ',' << num(r.outcome.statistic) << ',' << jumptest::tail_name(r.outcome.tail) << ','
                << r.outcome.indicator << ',' << num(r.jump.z) << ',' << num(r.jump.log_magnitude) << ','
                << (r.jump.sign == 0 ? std::string() : std::to_string(r.jump.sign)) << ',' << flagged << '\n';
            if (!r.outcome.diagnostic.empty())
                ctx.warnings.push_back(panel[t].label() + " " + std::string(jumptest::method_name(r.outcome.method)) +
                                       ": " + r.outcome.diagnostic);
        }
    }
}

// Scenario preset patched by the config file's "simulate" section.
inline simulate::DgpConfig resolve_dgp(Context& ctx, simulate::DgpConfig base) {
    if (ctx.file_config.contains("simulate")) config::apply(ctx.file_config["simulate"], base);
    if (!ctx.opt.units.empty()) base.unit_convention = config::parse_units(ctx.opt.units);
    try {
        base.validate();
    } catch (const DomainError& e) {
        throw DataError(e.what());
    }
    ctx.effective["simulate"] = config::to_json(base);
    return base;
}

inline simulate::Scenario resolve_scenario(Context& ctx) {
    simulate::Scenario s;
    try {
        s = simulate::make_scenario(ctx.opt.scenario);
    } catch (const DomainError& e) {
        throw UsageError(e.what());
    }
    for (const auto& n : s.notes) {
        std::cerr << "note: " << n << "\n";
        ctx.warnings.push_back(n);
    }
    ctx.effective["scenario"] = s.name;
    s.config = resolve_dgp(ctx, s.config);
    return s;
}

inline void cmd_simulate(Context& ctx) {
    require_option(ctx.opt.out, "--out");
    const auto scenario = resolve_scenario(ctx);
    const std::size_t reps = ctx.opt.reps == 0 ? 1 : ctx.opt.reps;
    ctx.effective["days"] = ctx.opt.days;
    ctx.effective["reps"] = reps;

    std::vector<simulate::SimulatedPanel> panels(reps);
    parallel_for(reps, ctx.threads, [&](std::size_t r) {
        panels[r] = simulate::simulate_sequence(scenario.config, ctx.opt.days, ctx.opt.seed, static_cast<std::uint32_t>(r));
    });

    const fs::path dir(ctx.opt.out);
    auto ret = open_output(dir / "returns.csv");
    auto truth = open_output(dir / "truth.csv");
    ret << "rep,day,interval,return\n";
    truth << "rep,day,dN_p,z_p,dN_v,z_v,v_open,v_close,delta_p,delta_v,jump_step\n";
    simulate::SimulationStats stats;
    for (std::size_t r = 0; r < reps; ++r) {
        stats += panels[r].stats;
        for (const auto& day : panels[r].panel.days()) {
            const auto rr = day.returns();
            for (std::size_t i = 0; i < rr.size(); ++i)
                ret << r << ',' << day.day_index() << ',' << i + 1 << ',' << num(rr[i]) << '\n';
            const auto& g = *day.truth();
            truth << r << ',' << g.day_index << ',' << g.dN_p << ',' << num(g.z_p) << ',' << g.dN_v << ','
                  << num(g.z_v) << ',' << num(g.v_open) << ',' << num(g.v_close) << ',' << num(g.delta_p) << ','
                  << num(g.delta_v) << ',' << (g.jump_step ? std::to_string(*g.jump_step) : std::string()) << '\n';
        }
    }
    ctx.details["truncation_fraction"] = stats.truncation_fraction();
}

inline void cmd_power_surface(Context& ctx, const std::vector<jumptest::Method>& methods) {
    resolve_tuning(ctx);
    require_option(ctx.opt.out, "--out");
    auto cfg = resolve_dgp(ctx, evaluate::power_experiment_config());
    const std::size_t reps = ctx.opt.reps == 0 ? 200 : ctx.opt.reps;
    if (ctx.opt.zp_points < 1 || ctx.opt.zv_points < 1) throw UsageError("grid sizes must be at least 1");
    const auto grid = evaluate::PowerGrid::standard(cfg.theta, ctx.opt.zp_points, ctx.opt.zv_points);
    ctx.effective["evaluate"] = {{"reps", reps},
                                 {"zp_points", ctx.opt.zp_points},
                                 {"zv_points", ctx.opt.zv_points},
                                 {"methods", join_methods(methods)}};
    const auto ps = evaluate::power_surface(cfg, grid, reps, methods, ctx.tuning, ctx.opt.seed, ctx.threads);

    auto out = open_output(ctx.opt.out);
    out << "method,zp,zv,rate,reps\n";
    for (std::size_t m = 0; m < methods.size(); ++m)
        for (std::size_t i = 0; i < grid.zp.size(); ++i)
            for (std::size_t j = 0; j < grid.zv.size(); ++j)
                out << jumptest::method_name(methods[m]) << ',' << num(grid.zp[i]) << ',' << num(grid.zv[j]) << ','
                    << num(ps.rate(m, i, j)) << ',' << reps << '\n';

    if (ctx.opt.plot_data) {
        // One splot-ready block file per method: "zp zv rate", blank line between zp rows.
        const fs::path base(ctx.opt.out);
        for (std::size_t m = 0; m < methods.size(); ++m) {
            fs::path p = base;
            p.replace_filename(base.stem().string() + "_" + std::string(jumptest::method_name(methods[m])) + ".dat");
            auto f = open_output(p);
            f << "# zp zv rate\n";
            for (std::size_t i = 0; i < grid.zp.size(); ++i) {
                for (std::size_t j = 0; j < grid.zv.size(); ++j)
                    f << num(grid.zp[i]) << ' ' << num(grid.zv[j]) << ' ' << num(ps.rate(m, i, j)) << '\n';
                f << '\n';
            }
        }
    }
}

inline void cmd_accuracy(Context& ctx, const std::vector<jumptest::Method>& methods) {
    resolve_tuning(ctx);
    require_option(ctx.opt.out, "--out");
    const auto scenario = resolve_scenario(ctx);
    const std::size_t reps = ctx.opt.reps == 0 ? 200 : ctx.opt.reps;
    ctx.effective["evaluate"] = {{"reps", reps},
                                 {"days", ctx.opt.days},
                                 {"sde_level", ctx.opt.sde_level},
                                 {"methods", join_methods(methods)}};
    const auto rep = evaluate::accuracy_experiment(scenario.config, scenario.name, reps, ctx.opt.days, methods,
                                                   ctx.tuning, ctx.opt.seed, ctx.threads, ctx.opt.sde_level);
    auto out = open_output(ctx.opt.out);
    out << "scenario,method,dj,ndj,sde,mse,mse_ge2,mse_ge3,scd,dj_se,ndj_se,scd_se,reps,days\n";
    for (const auto& a : rep.methods)
        out << rep.scenario << ',' << jumptest::method_name(a.method) << ',' << num(a.dj_bar) << ','
            << num(a.ndj_bar) << ',' << num(a.sde) << ',' << num(a.mse) << ',' << num(a.mse_ge2) << ','
            << num(a.mse_ge3) << ',' << num(a.scd_bar) << ',' << num(a.dj_se) << ',' << num(a.ndj_se) << ','
            << num(a.scd_se) << ',' << rep.reps << ',' << rep.T << '\n';
    ctx.details["jump_frequency"] = rep.jump_frequency;
    ctx.details["truncation_fraction"] = rep.stats.truncation_fraction();
}

}  // namespace detail

/// Runs the command line; returns 0 on success, 1 on usage errors, 2 on data errors.
inline int run(int argc, const char* const* argv) {
    using namespace detail;
    Context ctx;
    Options& o = ctx.opt;
    for (int i = 0; i < argc; ++i) ctx.command_line += (i ? " " : "") + std::string(argv[i]);

    CLI::App app{"High-frequency price-jump tests, jump measures and Monte Carlo experiments", "jumplab"};
    app.set_version_flag("--version", version);
    app.require_subcommand(1);

    auto common = [&](CLI::App* sc) {
        sc->add_option("--config", o.config_path, "JSON configuration file");
        sc->add_option("--out", o.out, "Output file (directory for simulate)");
        sc->add_option("--seed", o.seed, "Master seed");
        sc->add_option("--threads", o.threads, "Worker threads (default: JUMPLAB_THREADS or all cores)");
    };
    auto tuning_flags = [&](CLI::App* sc) {
        sc->add_option("--methods", o.methods, "Comma-separated methods or 'all'");
        sc->add_option("--alpha", o.alpha, "Daily significance level");
        sc->add_option("--c-theta", o.c_theta, "Threshold multiplier for the CPR measures");
        sc->add_option("--cpr-window", o.cpr_window, "Local-variance window for the CPR threshold");
        sc->add_option("--abd-alpha", o.abd_alpha, "Daily level of the intraday scan");
        sc->add_option("--lm-constants", o.lm_constants, "Gumbel norming constants: paper|original");
    };
    auto panel_flags = [&](CLI::App* sc) {
        sc->add_option("--input", o.input, "CSV with header date,time,price");
        sc->add_option("--grid", o.grid, "Prices per day");
        sc->add_flag("--pad-forward", o.pad_forward, "Forward-fill missing interior prices");
    };

    auto* measures_cmd = app.add_subcommand("measures", "Realized measures per day of a price file");
    common(measures_cmd);
    panel_flags(measures_cmd);
    measures_cmd->add_option("--c-theta", o.c_theta, "Threshold multiplier for the CPR measures");
    measures_cmd->add_option("--cpr-window", o.cpr_window, "Local-variance window for the CPR threshold");

    auto* test_cmd = app.add_subcommand("test", "Jump tests and jump measures per day of a price file");
    common(test_cmd);
    panel_flags(test_cmd);
    tuning_flags(test_cmd);

    auto* sim_cmd = app.add_subcommand("simulate", "Simulate a scenario");
    common(sim_cmd);
    sim_cmd->add_option("--scenario", o.scenario, "H1 H2 H3 SD1 SD2 SD3 or null");
    sim_cmd->add_option("--days", o.days, "Days per replication");
    sim_cmd->add_option("--reps", o.reps, "Replications");
    sim_cmd->add_option("--units", o.units, "Jump unit convention: SqrtDay|RawAnnual|PerDay");

    auto* ps_cmd = app.add_subcommand("power-surface", "Rejection rates over a grid of forced jump sizes");
    common(ps_cmd);
    tuning_flags(ps_cmd);
    ps_cmd->add_option("--reps", o.reps, "Replications per cell (default 200)");
    ps_cmd->add_option("--zp-points", o.zp_points, "Grid points for the price jump");
    ps_cmd->add_option("--zv-points", o.zv_points, "Grid points for the volatility jump");
    ps_cmd->add_option("--units", o.units, "Jump unit convention (default SqrtDay)");
    ps_cmd->add_flag("--plot-data", o.plot_data, "Also write gnuplot data blocks per method");

    auto* acc_cmd = app.add_subcommand("accuracy", "Accuracy battery for one scenario");
    common(acc_cmd);
    tuning_flags(acc_cmd);
    acc_cmd->add_option("--scenario", o.scenario, "H1 H2 H3 SD1 SD2 SD3 or null");
    acc_cmd->add_option("--reps", o.reps, "Replications (default 200)");
    acc_cmd->add_option("--days", o.days, "Days per replication");
    acc_cmd->add_option("--units", o.units, "Jump unit convention (default RawAnnual)");
    acc_cmd->add_option("--sde-level", o.sde_level, "Level of the per-replication independence test");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            app.exit(e);
            return 0;
        }
        std::cerr << "error: " << e.what() << "\n" << "run 'jumplab --help' for usage\n";
        return 1;
    }
    for (auto* sc : app.get_subcommands()) o.command = sc->get_name();

    const auto start = std::chrono::steady_clock::now();
    auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(); };
    const fs::path dir = output_dir(o);
    auto fail = [&](const std::string& msg, int code) {
        std::cerr << "error: " << msg << "\n";
        if (!dir.empty()) {
            try {
                write_manifest(dir, ctx, elapsed(), msg);
            } catch (const std::exception&) {
            }
        }
        return code;
    };

    try {
        if (!o.config_path.empty()) {
            ctx.file_config = config::load_file(o.config_path);
            if (!ctx.file_config.is_object()) throw DataError(o.config_path + ": top level must be a JSON object");
            config::detail::check_keys(ctx.file_config, {"seed", "threads", "tests", "simulate", "evaluate"}, "top level");
            if (ctx.file_config.contains("seed") && !app.get_subcommand(o.command)->get_option("--seed")->count())
                config::detail::read(ctx.file_config, "seed", o.seed, "top level");
            if (ctx.file_config.contains("threads") && !app.get_subcommand(o.command)->get_option("--threads")->count())
                config::detail::read(ctx.file_config, "threads", o.threads, "top level");
            if (ctx.file_config.contains("evaluate")) {
                const auto& e = ctx.file_config["evaluate"];
                config::detail::check_keys(e, {"reps", "days", "zp_points", "zv_points", "sde_level", "methods", "scenario", "units"}, "evaluate");
                auto* sc = app.get_subcommand(o.command);
                auto from_file = [&](const char* key, const char* flag, auto& target) {
                    const auto* opt = sc->get_option_no_throw(flag);
                    if (e.contains(key) && (opt == nullptr || opt->count() == 0))
                        config::detail::read(e, key, target, "evaluate");
                };
                from_file("reps", "--reps", o.reps);
                from_file("days", "--days", o.days);
                from_file("zp_points", "--zp-points", o.zp_points);
                from_file("zv_points", "--zv-points", o.zv_points);
                from_file("sde_level", "--sde-level", o.sde_level);
                from_file("methods", "--methods", o.methods);
                from_file("scenario", "--scenario", o.scenario);
                from_file("units", "--units", o.units);
            }
        }
        ctx.threads = resolve_threads(o.threads);
        const auto methods = parse_methods(o.methods);

        if (o.command == "measures") cmd_measures(ctx);
        else if (o.command == "test") cmd_test(ctx, methods);
        else if (o.command == "simulate") cmd_simulate(ctx);
        else if (o.command == "power-surface") cmd_power_surface(ctx, methods);
        else if (o.command == "accuracy") cmd_accuracy(ctx, methods);

        ctx.effective["seed"] = o.seed;
        if (!dir.empty()) write_manifest(dir, ctx, elapsed(), "");
        return 0;
    } catch (const UsageError& e) {
        return fail(e.what(), 1);
    } catch (const std::exception& e) {
        return fail(e.what(), 2);
    }
}

}  // namespace jumplab::cli
