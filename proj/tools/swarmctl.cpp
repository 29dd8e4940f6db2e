#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "swarm/log.hpp"
#include "swarm/plot.hpp"
#include "swarm/sim.hpp"

namespace {

using namespace swarm;

constexpr int kExitOk = 0;
constexpr int kExitInputError = 1;
constexpr int kExitUnrealizable = 2;
constexpr int kExitViolation = 3;

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    out << content;
}

struct CommonOptions {
    std::string world_path;
    std::string spec_path;
    std::string out_dir = ".";
    double u_max = 5.0;
    double t_ud = 4.0;
    double mu = 2.0;
    double d_g = 0.10;
    double d_f = 0.05;
    double d_o = 0.30;
    double w_delta1 = 100.0;
    double delta2_max = 10.0;
    double dt = 0.01;

    QpConfig qp_config() const {
        QpConfig cfg;
        cfg.u_max = u_max;
        cfg.d_g = d_g;
        cfg.d_f = d_f;
        cfg.d_o = d_o;
        cfg.w_delta1 = w_delta1;
        cfg.delta2_max = delta2_max;
        cfg.validate();
        return cfg;
    }
};

void add_common(CLI::App* cmd, CommonOptions& opt, bool with_qp) {
    cmd->add_option("--world", opt.world_path, "world file (JSON)")->required()->check(CLI::ExistingFile);
    cmd->add_option("--spec", opt.spec_path, "GR(1) spec file")->required()->check(CLI::ExistingFile);
    cmd->add_option("--out", opt.out_dir, "output directory");
    if (with_qp) {
        cmd->add_option("--u-max", opt.u_max, "speed limit [m/s]");
        cmd->add_option("--t-ud", opt.t_ud, "fixed-time bound T_ud [s]");
        cmd->add_option("--mu", opt.mu, "fixed-time exponent parameter (> 1)");
        cmd->add_option("--d-g", opt.d_g, "centroid tolerance [m]");
        cmd->add_option("--d-f", opt.d_f, "formation tolerance [m]");
        cmd->add_option("--d-o", opt.d_o, "minimum separation [m]");
        cmd->add_option("--w-delta1", opt.w_delta1, "linear penalty on delta1");
        cmd->add_option("--delta2-max", opt.delta2_max, "upper bound on delta2");
        cmd->add_option("--dt", opt.dt, "integration step [s]");
    }
}

int run_synth(const CommonOptions& opt) {
    WorldFile wf = load_world_file(opt.world_path);
    Gr1Spec spec = load_gr1_file(opt.spec_path);
    int initial_formation = -1;
    for (std::size_t k = 0; k < wf.catalog.size(); ++k)
        if (wf.catalog[k].id() == wf.initial_formation) initial_formation = static_cast<int>(k);
    DftsState initial{wf.initial_cell, initial_formation};

    const auto t0 = std::chrono::steady_clock::now();
    Dfts dfts = build_dfts(wf.grid, wf.catalog, wf.rules, initial, wf.switch_only_while_staying);
    GameStructure game(dfts, spec, wf.catalog);

    for (auto p : game.blocked_positions())
        SWARM_LOG_WARN("environment assumptions deadlock at " +
                       game.describe_position(p, &dfts, &wf.catalog));

    Gr1Solution sol = solve_gr1(game);
    std::filesystem::create_directories(opt.out_dir);
    const std::filesystem::path out(opt.out_dir);
    write_file(out / "dfts.json", dfts.export_text(wf.catalog));

    nlohmann::json report;
    report["positions"] = game.position_count();
    report["winning_positions"] = sol.winning.count();
    report["outer_iterations"] = sol.outer_iterations;

    Strategy strategy;
    try {
        strategy = extract_strategy(game, sol);
    } catch (const SynthesisFailure& e) {
        report["realizable"] = false;
        report["reason"] = e.what();
        write_file(out / "synthesis_report.json", report.dump(2) + "\n");
        std::cerr << e.what() << "\n";
        return kExitUnrealizable;
    }
    VerifyReport verify = verify_strategy(game, strategy);
    if (!verify.pass) throw std::runtime_error("extracted strategy failed verification: " + verify.summary());

    const auto t1 = std::chrono::steady_clock::now();
    report["realizable"] = true;
    report["strategy_nodes"] = strategy.node_count();
    report["verified"] = true;
    report["reachable_nodes"] = verify.reachable_nodes;
    report["elapsed_ms"] = std::chrono::duration<double, std::milli>(t1 - t0).count();
    write_file(out / "strategy.json", strategy.export_text(dfts, wf.catalog));
    write_file(out / "synthesis_report.json", report.dump(2) + "\n");
    std::cout << "realizable: strategy with " << strategy.node_count() << " nodes written to "
              << (out / "strategy.json").string() << "\n";
    return kExitOk;
}

int run_refine(const CommonOptions& opt, int probe_budget, std::uint64_t seed) {
    WorldFile wf = load_world_file(opt.world_path);
    Gr1Spec spec = load_gr1_file(opt.spec_path);
    int initial_formation = -1;
    for (std::size_t k = 0; k < wf.catalog.size(); ++k)
        if (wf.catalog[k].id() == wf.initial_formation) initial_formation = static_cast<int>(k);
    DftsState initial{wf.initial_cell, initial_formation};

    SimConfig sim_cfg;
    sim_cfg.dt = opt.dt;
    sim_cfg.t_ud = opt.t_ud;
    sim_cfg.seed = seed;
    RefineResult res = refine_loop(wf.grid, wf.catalog, wf.rules, initial, spec, opt.qp_config(),
                                   fxt_params(opt.mu, opt.t_ud), sim_cfg, probe_budget);

    std::filesystem::create_directories(opt.out_dir);
    const std::filesystem::path out(opt.out_dir);
    nlohmann::json report;
    report["realizable"] = res.realizable;
    report["rounds"] = res.rounds;
    report["pruned_edges"] = nlohmann::json::array();
    for (const auto& e : res.pruned)
        report["pruned_edges"].push_back(
            {{"state", e.state}, {"action", e.action}, {"description", e.description}});
    write_file(out / "refine_report.json", report.dump(2) + "\n");
    write_file(out / "dfts.json", res.dfts.export_text(wf.catalog));
    if (!res.realizable) {
        std::cerr << "unrealizable after pruning " << res.pruned.size() << " transition(s)\n";
        return kExitUnrealizable;
    }
    write_file(out / "strategy.json", res.strategy->export_text(res.dfts, wf.catalog));
    std::cout << "realizable after " << res.rounds << " round(s); pruned " << res.pruned.size()
              << " transition(s)\n";
    return kExitOk;
}

int run_simulate(const CommonOptions& opt, const std::string& strategy_path, int steps,
                 std::uint64_t seed, const std::string& script_path, double falsify_prob,
                 const std::string& dump_qp_path) {
    WorldFile wf = load_world_file(opt.world_path);
    Gr1Spec spec = load_gr1_file(opt.spec_path);
    int initial_formation = -1;
    for (std::size_t k = 0; k < wf.catalog.size(); ++k)
        if (wf.catalog[k].id() == wf.initial_formation) initial_formation = static_cast<int>(k);
    Dfts dfts = build_dfts(wf.grid, wf.catalog, wf.rules, {wf.initial_cell, initial_formation},
                           wf.switch_only_while_staying);
    GameStructure game(dfts, spec, wf.catalog);

    std::ifstream in(strategy_path);
    if (!in) throw std::runtime_error("cannot open strategy file '" + strategy_path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    Strategy strategy = Strategy::import_text(ss.str(), dfts, wf.catalog);
    if (strategy.env_var_names != spec.env_vars)
        throw std::runtime_error("strategy file does not match the spec's environment variables");

    EnvSchedule schedule = script_path.empty()
                               ? generate_schedule(spec, seed, steps, falsify_prob)
                               : load_battery_script(script_path, spec.env_vars);

    SimConfig sim_cfg;
    sim_cfg.dt = opt.dt;
    sim_cfg.t_ud = opt.t_ud;
    sim_cfg.max_symbolic_steps = steps;
    sim_cfg.seed = seed;
    const QpConfig qp_cfg = opt.qp_config();
    const FxtParams params = fxt_params(opt.mu, opt.t_ud);

    if (!dump_qp_path.empty()) {
        // First control step of the mission, for external cross-checking.
        EnvValuation e0 = enforce_env_init(spec, schedule.propose(0, spec.env_vars, EnvValuation{}));
        int node = strategy.initial.at(game.env_index(e0));
        int sid = strategy.nodes[node].state;
        SwarmState start = place_at(wf.grid.waypoint_of_cell(dfts.state(sid).cell),
                                    wf.catalog.at(dfts.state(sid).formation));
        EnvValuation e1 = enforce_env_safety(spec, dfts.labels(sid), e0,
                                             schedule.propose(1, spec.env_vars, e0));
        const auto& edge = strategy.transitions[node][game.env_index(e1)];
        const DftsState& target = dfts.state(edge ? strategy.nodes[edge->next].state : sid);
        write_file(dump_qp_path,
                   dump_qp(build_qp(start, wf.grid.waypoint_of_cell(target.cell),
                                    wf.catalog.at(target.formation), wf.grid, qp_cfg, params)));
    }

    MissionResult res = run_mission(wf.grid, wf.catalog, dfts, game, strategy, spec, schedule,
                                    sim_cfg, qp_cfg, params);

    std::filesystem::create_directories(opt.out_dir);
    const std::filesystem::path out(opt.out_dir);
    write_file(out / "trajectory.csv", write_trajectory_csv(res.log, wf.catalog.front().robots()));
    write_file(out / "monitor.json", res.report.to_json());
    write_file(out / "trace.txt", write_symbolic_trace(res.log, dfts, wf.catalog));

    if (!res.report.clean()) {
        std::cerr << "monitor violations detected; see " << (out / "monitor.json").string() << "\n";
        return kExitViolation;
    }
    std::cout << "mission clean: " << res.log.symbolic_trace.size() - 1 << " symbolic steps, "
              << res.log.samples.size() << " samples\n";
    return kExitOk;
}

int run_verify(const CommonOptions& opt, const std::string& strategy_path) {
    WorldFile wf = load_world_file(opt.world_path);
    Gr1Spec spec = load_gr1_file(opt.spec_path);
    int initial_formation = -1;
    for (std::size_t k = 0; k < wf.catalog.size(); ++k)
        if (wf.catalog[k].id() == wf.initial_formation) initial_formation = static_cast<int>(k);
    Dfts dfts = build_dfts(wf.grid, wf.catalog, wf.rules, {wf.initial_cell, initial_formation},
                           wf.switch_only_while_staying);
    GameStructure game(dfts, spec, wf.catalog);

    std::ifstream in(strategy_path);
    if (!in) throw std::runtime_error("cannot open strategy file '" + strategy_path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    Strategy strategy = Strategy::import_text(ss.str(), dfts, wf.catalog);

    VerifyReport rep = verify_strategy(game, strategy);
    std::cout << rep.summary() << "\n";
    if (!rep.pass && !rep.lasso_cycle.empty()) {
        auto print_node = [&](int id) {
            const auto& node = strategy.nodes[id];
            std::cerr << "  "
                      << game.describe_position(game.position(node.state, node.env), &dfts,
                                                &wf.catalog)
                      << " goal=" << node.goal << "\n";
        };
        std::cerr << "counterexample stem:\n";
        for (int id : rep.lasso_stem) print_node(id);
        std::cerr << "counterexample cycle:\n";
        for (int id : rep.lasso_cycle) print_node(id);
    }
    return rep.pass ? kExitOk : kExitViolation;
}

int run_plot(const std::string& csv_path, const std::string& world_path, const std::string& out_path) {
    std::ifstream in(csv_path);
    if (!in) throw std::runtime_error("cannot open CSV '" + csv_path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    WorldFile wf = load_world_file(world_path);
    write_file(out_path, render_svg(parse_trajectory_csv(ss.str()), wf.grid));
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"GR(1) strategy synthesis and QP-refined swarm control"};
    app.require_subcommand(1);

    CommonOptions synth_opt, refine_opt, sim_opt;
    int probe_budget = 1;
    std::uint64_t refine_seed = 0;
    std::string strategy_path, script_path, dump_qp_path;
    int steps = 200;
    std::uint64_t seed = 0;
    double falsify_prob = 0.0;
    std::string csv_path, plot_world, plot_out = "trajectory.svg";

    CLI::App* synth = app.add_subcommand("synth", "build the abstraction and synthesize a strategy");
    add_common(synth, synth_opt, false);

    CLI::App* refine = app.add_subcommand("refine", "synthesize with QP-feasibility pruning");
    add_common(refine, refine_opt, true);
    refine->add_option("--probe-budget", probe_budget, "feasibility probes per transition");
    refine->add_option("--seed", refine_seed, "seed for jittered probes");

    CLI::App* simulate = app.add_subcommand("simulate", "run the closed-loop mission");
    add_common(simulate, sim_opt, true);
    simulate->add_option("--strategy", strategy_path, "strategy file from synth/refine")
        ->required()
        ->check(CLI::ExistingFile);
    simulate->add_option("--steps", steps, "number of symbolic steps");
    simulate->add_option("--seed", seed, "schedule seed");
    auto* script_opt = simulate->add_option("--battery-script", script_path,
                                            "scripted env events (step=K var=bool lines)");
    simulate->add_option("--falsify-prob", falsify_prob, "per-step env falsification probability")
        ->excludes(script_opt);
    simulate->add_option("--dump-qp", dump_qp_path, "dump the first QP instance to this file");

    CommonOptions verify_opt;
    std::string verify_strategy_path;
    CLI::App* verify = app.add_subcommand("verify", "exhaustively check a strategy file");
    add_common(verify, verify_opt, false);
    verify->add_option("--strategy", verify_strategy_path, "strategy file to check")
        ->required()
        ->check(CLI::ExistingFile);

    CLI::App* plot = app.add_subcommand("plot", "render a trajectory CSV to SVG");
    plot->add_option("--csv", csv_path, "trajectory CSV")->required()->check(CLI::ExistingFile);
    plot->add_option("--world", plot_world, "world file")->required()->check(CLI::ExistingFile);
    plot->add_option("--out", plot_out, "output SVG path");

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth->parsed()) return run_synth(synth_opt);
        if (refine->parsed()) return run_refine(refine_opt, probe_budget, refine_seed);
        if (simulate->parsed())
            return run_simulate(sim_opt, strategy_path, steps, seed, script_path, falsify_prob,
                                dump_qp_path);
        if (verify->parsed()) return run_verify(verify_opt, verify_strategy_path);
        if (plot->parsed()) return run_plot(csv_path, plot_world, plot_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInputError;
    }
    return kExitInputError;
}
