#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "specshare/closedform.hpp"
#include "specshare/configio.hpp"
#include "specshare/csvjson.hpp"
#include "specshare/figures.hpp"
#include "specshare/waterfill.hpp"

namespace fs = std::filesystem;
using namespace specshare;

namespace {

// Exit codes: 0 converged/ok, 1 config error, 2 max-iterations (and internal
// batch failures), 3 oscillating, 4 ISR-infeasible. 70 = unexpected internal
// error.
constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitMaxIter = 2;
constexpr int kExitOscillating = 3;
constexpr int kExitInfeasible = 4;
constexpr int kExitInternal = 70;

std::string iso_now() {
    std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

struct RunContext {
    std::string command;
    std::string config_path;
    fs::path out_dir;
    json resolved;
    std::uint64_t seed = 0;
    std::string started;
    std::vector<std::string> outputs;

    void write(const std::string& name, const std::string& content) {
        write_file_atomic(out_dir / name, content);
        outputs.push_back(name);
    }
    void write(const std::string& name, const json& doc) {
        write_json_file(out_dir / name, doc);
        outputs.push_back(name);
    }
    void manifest(int exit_code) {
        json m;
        m["schema"] = 1;
        m["command"] = command;
        m["config"] = config_path;
        m["resolved_spec"] = resolved;
        m["seed"] = seed;
        m["tool_version"] = kToolVersion;
        m["started_at"] = started;
        m["finished_at"] = iso_now();
        m["outputs"] = outputs;
        m["exit_code"] = exit_code;
        write_json_file(out_dir / "run_manifest.json", m);
    }
};

struct CommonOpts {
    std::string config;
    std::string out = "out";
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::size_t realizations = 0;  // 0 = keep config value
    std::size_t decimate = 1;
    bool closed_form = false;
    bool iterative = false;
};

LoadedConfig load_with_overrides(const CommonOpts& o) {
    LoadedConfig cfg = load_config_file(o.config);
    if (o.seed_set) cfg.seed = o.seed;
    if (o.realizations) cfg.realizations = o.realizations;
    return cfg;
}

PowerProfile initial_profile(const LoadedConfig& cfg, const GainTensor& g) {
    const NetworkConfig& net = cfg.network;
    PowerProfile prof(net.n_users, net.n_sub);
    for (std::size_t k : net.pus) {
        switch (cfg.init) {
            case InitPolicy::Given: prof.set_row(k, cfg.init_p1); break;
            case InitPolicy::Waterfill: {
                std::vector<double> sigma(net.n_sub);
                for (std::size_t f = 0; f < net.n_sub; ++f) {
                    double gkk = g.at(k, k, f);
                    sigma[f] = gkk > 0.0 ? net.noise[k][f] / gkk
                                         : std::numeric_limits<double>::infinity();
                }
                prof.set_row(k, waterfill(sigma, net.budgets[k]).powers);
                break;
            }
            default: break;  // zeros
        }
    }
    return prof;
}

std::string powers_csv(const PowerProfile& prof) {
    CsvBuilder csv({"user", "subchannel", "power"});
    for (std::size_t u = 0; u < prof.n_users; ++u)
        for (std::size_t f = 0; f < prof.n_sub; ++f)
            csv.row({std::to_string(u + 1), std::to_string(f + 1), fmt_double(prof.at(u, f))});
    return csv.str();
}

json isr_json(const PowerProfile& prof, const GainTensor& g, const NetworkConfig& net) {
    json rows = json::array();
    for (std::size_t k : net.pus) rows.push_back(isr(prof, g, net, k));
    return rows;
}

json utilities_json(const PowerProfile& prof, const GainTensor& g, const NetworkConfig& net) {
    json us = json::array();
    for (std::size_t u = 0; u < net.n_users; ++u) us.push_back(utility(prof, g, net, u));
    return us;
}

int ensemble_exit(const ExperimentReport& rep) {
    if (rep.counts.converged > 0) return kExitOk;
    std::size_t inf = rep.counts.infeasible_isr + rep.counts.infeasible_leader;
    if (inf >= rep.counts.oscillating && inf >= rep.counts.max_iterations && inf > 0)
        return kExitInfeasible;
    if (rep.counts.oscillating >= rep.counts.max_iterations && rep.counts.oscillating > 0)
        return kExitOscillating;
    return kExitMaxIter;
}

int run_ensemble(RunContext& ctx, const LoadedConfig& cfg, AlgorithmKind alg,
                 const std::string& stem, std::size_t decimate) {
    ExperimentSpec spec = make_experiment(cfg, alg);
    ExperimentReport rep = run_experiment(spec);
    json doc = report_json(rep, cfg.network);
    doc["algorithm"] = to_string(alg);
    doc["seed"] = cfg.seed;
    ctx.write(stem + "_report.json", doc);
    if (!rep.mean_powers.empty()) ctx.write(stem + "_mean_powers.csv", mean_powers_csv(rep, cfg.network));
    if (!rep.mean_curves.empty()) ctx.write(stem + "_curve.csv", curve_csv(rep, cfg.network, decimate));
    std::cout << stem << ": " << rep.counts.converged << "/" << rep.realizations
              << " converged, " << rep.counts.infeasible_isr + rep.counts.infeasible_leader
              << " infeasible, " << rep.counts.oscillating << " oscillating, "
              << rep.counts.max_iterations << " max-iterations\n";
    return ensemble_exit(rep);
}

int cmd_ne(RunContext& ctx, const CommonOpts& opts) {
    LoadedConfig cfg = load_with_overrides(opts);
    ctx.resolved = config_to_json(cfg);
    ctx.seed = cfg.seed;
    bool closed = opts.closed_form && !opts.iterative;
    if (cfg.channel)
        return run_ensemble(ctx, cfg, closed ? AlgorithmKind::NeClosedForm
                                             : AlgorithmKind::NeIterative,
                            "ne", opts.decimate);

    const NetworkConfig& net = cfg.network;
    const GainTensor& g = *cfg.gains;
    PowerProfile init = initial_profile(cfg, g);
    json doc;
    doc["schema"] = 1;
    PowerProfile final_prof;
    bool converged = false;
    if (closed) {
        auto cf = closed_form_profile(init, g, net);
        if (!cf) {
            std::cerr << "config error: --closed-form needs a perfectly symmetric two-SU "
                         "instance\n";
            return kExitConfig;
        }
        final_prof = *cf;
        converged = true;
        doc["mode"] = "closed-form";
        auto det = detect_symmetric(init, g, net);
        doc["symmetry"] = {{"c", det.params.c}, {"worst_rel_err", det.worst_rel_err}};
    } else {
        NEResult res = solve_ne(init, g, net, cfg.ne_tol, cfg.ne_sweeps, cfg.ne_order);
        final_prof = res.profile;
        converged = res.converged;
        doc["mode"] = "iterative";
        doc["iterations"] = res.iterations;
        doc["final_delta"] = res.final_delta;
    }
    doc["converged"] = converged;
    VerifyResult ver = verify_ne(final_prof, g, net);
    doc["verify"] = {{"ok", ver.ok}, {"max_deviation", ver.max_deviation}};
    DiagnosticReport diag = diagnostics(init, g, net);
    json cn = json::array();
    for (auto& [ninf, none] : diag.c_norms) cn.push_back({ninf, none});
    doc["diagnostics"] = {{"m_matrix", diag.m_matrix},
                          {"m_positive_definite", diag.m_positive_definite},
                          {"c_norms", cn},
                          {"contraction_holds", diag.contraction_holds},
                          {"max_spectral_radius", diag.max_spectral_radius}};
    doc["utilities"] = utilities_json(final_prof, g, net);
    ctx.write("ne_powers.csv", powers_csv(final_prof));
    ctx.write("ne_result.json", doc);
    std::cout << "ne: " << (converged ? "converged" : "max-iterations reached") << "\n";
    return converged ? kExitOk : kExitMaxIter;
}

int cmd_se(RunContext& ctx, const CommonOpts& opts) {
    LoadedConfig cfg = load_with_overrides(opts);
    ctx.resolved = config_to_json(cfg);
    ctx.seed = cfg.seed;
    if (cfg.channel) return run_ensemble(ctx, cfg, AlgorithmKind::Se, "se", opts.decimate);

    const NetworkConfig& net = cfg.network;
    const GainTensor& g = *cfg.gains;
    SearchSpec search = cfg.search;
    search.seed = cfg.seed;
    try {
        SEResult se = solve_leader(g, net, search);
        json doc;
        doc["schema"] = 1;
        doc["leader_utility"] = se.leader_utility;
        doc["pu_power"] = se.pu_power;
        doc["follower_utilities"] = se.follower_utilities;
        doc["evaluations"] = se.search_stats.evaluations;
        doc["restarts"] = se.search_stats.restarts;
        doc["best_history"] = se.search_stats.best_history;
        doc["isr"] = isr_json(se.su_profile, g, net);
        doc["utilities"] = utilities_json(se.su_profile, g, net);
        ctx.write("se_powers.csv", powers_csv(se.su_profile));
        ctx.write("se_result.json", doc);
        std::cout << "se: leader utility " << fmt_double(se.leader_utility) << "\n";
        return kExitOk;
    } catch (const InfeasibleLeaderError& e) {
        std::cerr << "se: " << e.what() << "\n";
        return kExitInfeasible;
    }
}

int cmd_alg(RunContext& ctx, const CommonOpts& opts, int which) {
    LoadedConfig cfg = load_with_overrides(opts);
    ctx.resolved = config_to_json(cfg);
    ctx.seed = cfg.seed;
    const std::string stem = "alg" + std::to_string(which);
    AlgorithmKind kind = which == 2   ? AlgorithmKind::Alg2
                         : which == 3 ? AlgorithmKind::Alg3
                                      : AlgorithmKind::Alg4;
    if (cfg.channel) return run_ensemble(ctx, cfg, kind, stem, opts.decimate);

    const NetworkConfig& net = cfg.network;
    const GainTensor& g = *cfg.gains;
    try {
        SolveTrace t;
        if (which == 2) {
            t = run_alg2(g, net, cfg.schedule, initial_profile(cfg, g).row(net.pus.at(0)));
        } else if (which == 3) {
            t = run_alg3(g, net, cfg.schedule, initial_profile(cfg, g).row(net.pus.at(0)),
                         PowerProfile(net.n_users, net.n_sub));
        } else {
            t = run_alg4(g, net, cfg.schedule);
        }
        json doc;
        doc["schema"] = 1;
        doc["status"] = to_string(t.status);
        doc["iterations"] = t.iterates.size();
        if (t.converged_at >= 0) doc["converged_at"] = t.converged_at;
        doc["final_isr"] = t.final_isr;
        doc["final_utilities"] = utilities_json(t.final_profile, g, net);
        json powers = json::array();
        for (std::size_t u = 0; u < net.n_users; ++u) powers.push_back(t.final_profile.row(u));
        doc["final_powers"] = powers;
        ctx.write(stem + "_trace.csv", trace_csv(t, net, opts.decimate));
        ctx.write(stem + "_result.json", doc);
        std::cout << stem << ": " << to_string(t.status) << " after " << t.iterates.size()
                  << " iterations\n";
        switch (t.status) {
            case TraceStatus::Converged: return kExitOk;
            case TraceStatus::Oscillating: return kExitOscillating;
            default: return kExitMaxIter;
        }
    } catch (const InfeasibleIsrError& e) {
        std::cerr << stem << ": " << e.what() << "\n";
        return kExitInfeasible;
    }
}

int cmd_reproduce(RunContext& ctx, const CommonOpts& opts, const std::string& fig_id) {
    std::uint64_t seed = opts.seed_set ? opts.seed : 1;
    FigureResult fig;
    try {
        fig = run_figure(fig_id, ctx.out_dir, seed, opts.realizations, opts.decimate);
    } catch (const std::invalid_argument& e) {
        std::cerr << "reproduce: " << e.what() << "\n";
        return kExitConfig;
    }
    ctx.seed = seed;
    ctx.resolved = {{"figure", fig_id},
                    {"seed", seed},
                    {"realizations_override", opts.realizations}};
    for (const auto& p : fig.outputs) ctx.outputs.push_back(p.filename().string());
    ctx.write(fig.id + "_summary.json", fig.summary);
    std::size_t passed = 0;
    for (const FigureCheck& c : fig.checks) {
        std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << " (value "
                  << fmt_double(c.value) << ", bound " << fmt_double(c.bound) << ")\n";
        if (c.pass) ++passed;
    }
    std::cout << "reproduce " << fig_id << ": " << passed << "/" << fig.checks.size()
              << " checks passed\n";
    return kExitOk;
}

int cmd_validate(const std::string& path) {
    LoadedConfig cfg = load_config_file(path);  // throws ConfigError on problems
    std::cout << "ok: " << path << " (schema " << kSchemaVersion << ", "
              << cfg.network.n_users << " users, " << cfg.network.n_sub << " sub-channels, "
              << (cfg.channel ? "ensemble" : "single instance") << ")\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"hierarchic spectrum-sharing power allocation toolkit"};
    app.require_subcommand(1);

    CommonOpts opts;
    std::string fig_id, validate_path;

    auto add_common = [&](CLI::App* sub, bool needs_config) {
        if (needs_config)
            sub->add_option("--config", opts.config, "JSON run configuration")
                ->required()
                ->check(CLI::ExistingFile);
        sub->add_option("--seed", opts.seed, "override the config seed")
            ->each([&](const std::string&) { opts.seed_set = true; });
        sub->add_option("--out", opts.out, "output directory (default: out)");
        sub->add_option("--realizations", opts.realizations,
                        "override the ensemble realization count");
        sub->add_option("--csv-decimate", opts.decimate,
                        "keep every K-th iterate row in CSV traces");
        return sub;
    };

    CLI::App* ne = add_common(app.add_subcommand("ne", "follower sub-game equilibrium"), true);
    auto* cf_flag = ne->add_flag("--closed-form", opts.closed_form,
                                 "use the symmetric-channel closed form");
    ne->add_flag("--iterative", opts.iterative, "use best-response iteration (default)")
        ->excludes(cf_flag);
    add_common(app.add_subcommand("se", "leader equilibrium via anticipatory search"), true);
    add_common(app.add_subcommand("alg2", "relaxation-based hierarchic allocation"), true);
    add_common(app.add_subcommand("alg3", "asynchronous hierarchic allocation"), true);
    add_common(app.add_subcommand("alg4", "multi-leader hierarchic allocation"), true);
    CLI::App* rep = add_common(app.add_subcommand("reproduce", "built-in figure data runs"),
                               false);
    rep->add_option("figure", fig_id, "figure id: fig1, fig2, fig3-6, fig7, fig8")->required();
    CLI::App* val = app.add_subcommand("validate", "parse and validate a config");
    val->add_option("config", validate_path, "JSON run configuration")->required();

    CLI11_PARSE(app, argc, argv);

    RunContext ctx;
    ctx.out_dir = opts.out;
    ctx.config_path = opts.config;
    ctx.started = iso_now();
    int code = kExitInternal;
    bool wants_manifest = false;
    try {
        if (app.got_subcommand("validate")) return cmd_validate(validate_path);
        std::filesystem::create_directories(ctx.out_dir);
        wants_manifest = true;
        if (app.got_subcommand("ne")) {
            ctx.command = "ne";
            code = cmd_ne(ctx, opts);
        } else if (app.got_subcommand("se")) {
            ctx.command = "se";
            code = cmd_se(ctx, opts);
        } else if (app.got_subcommand("alg2")) {
            ctx.command = "alg2";
            code = cmd_alg(ctx, opts, 2);
        } else if (app.got_subcommand("alg3")) {
            ctx.command = "alg3";
            code = cmd_alg(ctx, opts, 3);
        } else if (app.got_subcommand("alg4")) {
            ctx.command = "alg4";
            code = cmd_alg(ctx, opts, 4);
        } else if (app.got_subcommand("reproduce")) {
            ctx.command = "reproduce";
            code = cmd_reproduce(ctx, opts, fig_id);
        }
    } catch (const ConfigError& e) {
        std::cerr << e.what() << "\n";
        code = kExitConfig;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        code = kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        code = kExitInternal;
    }
    if (wants_manifest) {
        try {
            ctx.manifest(code);
        } catch (const std::exception& e) {
            std::cerr << "warning: could not write run_manifest.json: " << e.what() << "\n";
        }
    }
    return code;
}
