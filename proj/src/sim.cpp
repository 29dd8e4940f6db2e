#include "swarm/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "swarm/log.hpp"

namespace swarm {

void SimConfig::validate() const {
    if (dt <= 0.0) throw std::invalid_argument("SimConfig: dt must be positive");
    if (t_ud / dt < 100.0) throw std::invalid_argument("SimConfig: need T_ud/dt >= 100");
    if (max_symbolic_steps < 0) throw std::invalid_argument("SimConfig: negative step count");
}

EnvSchedule EnvSchedule::scripted(std::map<int, std::map<std::string, bool>> script) {
    EnvSchedule s;
    s.mode_ = Mode::Scripted;
    s.script_ = std::move(script);
    return s;
}

EnvSchedule EnvSchedule::random(double falsify_prob, std::uint64_t seed) {
    if (falsify_prob < 0.0 || falsify_prob > 1.0)
        throw std::invalid_argument("EnvSchedule: falsify_prob must be in [0,1]");
    EnvSchedule s;
    s.mode_ = Mode::Random;
    s.falsify_prob_ = falsify_prob;
    s.seed_ = seed;
    return s;
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace

EnvValuation EnvSchedule::propose(int step, const std::vector<std::string>& env_vars,
                                  const EnvValuation& previous) const {
    EnvValuation out;
    if (mode_ == Mode::Scripted) {
        // Inherit the previous value (all-true before step 0), then apply any
        // overrides scripted at this step.
        for (const auto& v : env_vars) {
            auto it = previous.assignments.find(v);
            out.assignments[v] = it == previous.assignments.end() ? true : it->second;
        }
        auto it = script_.find(step);
        if (it != script_.end())
            for (const auto& [var, value] : it->second) {
                if (!out.assignments.count(var))
                    throw std::invalid_argument("schedule: unknown env var '" + var + "'");
                out.assignments[var] = value;
            }
        return out;
    }
    // Seeded per (seed, step, var): deterministic regardless of query order.
    for (std::size_t k = 0; k < env_vars.size(); ++k) {
        std::uint64_t h = splitmix64(seed_ ^ splitmix64(static_cast<std::uint64_t>(step) * 0x51ULL + k));
        double unit = static_cast<double>(h >> 11) * (1.0 / 9007199254740992.0);
        out.assignments[env_vars[k]] = !(unit < falsify_prob_);
    }
    return out;
}

EnvSchedule generate_schedule(const Gr1Spec& spec, std::uint64_t seed, int length,
                              double falsify_prob) {
    (void)spec;
    (void)length;  // proposals are drawn lazily; enforcement happens per step
    return EnvSchedule::random(falsify_prob, seed);
}

EnvSchedule load_battery_script(const std::string& path, const std::vector<std::string>& env_vars) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open script file '" + path + "'");
    std::set<std::string> known(env_vars.begin(), env_vars.end());
    std::map<int, std::map<std::string, bool>> script;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        std::istringstream ls(line);
        std::string tok;
        int step = -1;
        while (ls >> tok) {
            std::size_t eq = tok.find('=');
            if (eq == std::string::npos)
                throw std::invalid_argument("script line " + std::to_string(lineno) + ": expected key=value");
            std::string key = tok.substr(0, eq), value = tok.substr(eq + 1);
            if (key == "step") {
                step = std::stoi(value);
            } else {
                if (!known.count(key))
                    throw std::invalid_argument("script line " + std::to_string(lineno) +
                                                ": unknown env var '" + key + "'");
                if (step < 0)
                    throw std::invalid_argument("script line " + std::to_string(lineno) +
                                                ": step= must come first");
                if (value != "true" && value != "false")
                    throw std::invalid_argument("script line " + std::to_string(lineno) + ": bad bool");
                script[step][key] = value == "true";
            }
        }
    }
    return EnvSchedule::scripted(std::move(script));
}

namespace {

std::vector<EnvValuation> all_valuations(const std::vector<std::string>& env_vars) {
    std::vector<EnvValuation> out;
    const std::size_t n = std::size_t{1} << env_vars.size();
    for (std::size_t mask = 0; mask < n; ++mask) {
        EnvValuation v;
        for (std::size_t k = 0; k < env_vars.size(); ++k)
            v.assignments[env_vars[k]] = (mask >> k) & 1;
        out.push_back(std::move(v));
    }
    return out;
}

}  // namespace

EnvValuation enforce_env_init(const Gr1Spec& spec, const EnvValuation& proposal) {
    Valuation v;
    for (const auto& [name, val] : proposal.assignments) v[name] = val;
    if (spec.env_init.eval(v)) return proposal;
    for (const auto& cand : all_valuations(spec.env_vars)) {
        Valuation cv;
        for (const auto& [name, val] : cand.assignments) cv[name] = val;
        if (spec.env_init.eval(cv)) return cand;
    }
    throw std::runtime_error("no environment valuation satisfies ENV_INIT");
}

EnvValuation enforce_env_safety(const Gr1Spec& spec, const std::set<std::string>& current_labels,
                                const EnvValuation& current, const EnvValuation& proposal) {
    // Current valuation over exactly the atoms the assumption formulas read.
    std::set<std::string> cur_atoms, next_atoms;
    for (const auto& f : spec.env_safety) f.collect_atoms(cur_atoms, next_atoms);
    Valuation cur;
    for (const auto& a : cur_atoms) {
        auto it = current.assignments.find(a);
        cur[a] = it != current.assignments.end() ? it->second : current_labels.count(a) > 0;
    }
    auto admissible = [&](const EnvValuation& cand) {
        Valuation nv;
        for (const auto& [name, val] : cand.assignments) nv[name] = val;
        for (const auto& f : spec.env_safety)
            if (!f.eval(cur, &nv)) return false;
        return true;
    };
    if (admissible(proposal)) return proposal;
    for (const auto& cand : all_valuations(spec.env_vars))
        if (admissible(cand)) return cand;
    throw std::runtime_error("environment assumptions are deadlocked at the current step");
}

SwarmState integrate(const SwarmState& state, const ControlInput& u, double dt) {
    if (u.size() != state.size()) throw std::invalid_argument("integrate: input size mismatch");
    SwarmState out = state;
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (!u.inputs[i].finite()) throw std::invalid_argument("integrate: non-finite input");
        out.positions[i] += dt * u.inputs[i];
    }
    return out;
}

SwarmState place_at(const Vec2& w, const Formation& f) {
    std::vector<Vec2> pos;
    for (const Vec2& off : f.centroid_offsets()) pos.push_back(w + off);
    return SwarmState(std::move(pos));
}

const char* segment_outcome_name(SegmentOutcome o) {
    switch (o) {
        case SegmentOutcome::Reached: return "reached";
        case SegmentOutcome::DeadlineExceeded: return "deadline_exceeded";
        case SegmentOutcome::QpInfeasible: return "qp_infeasible";
    }
    return "?";
}

SegmentResult run_symbolic_step(const SwarmState& state, const Vec2& w, const Formation& f,
                                const GridWorld& world, const QpConfig& cfg, const FxtParams& params,
                                double dt, double deadline, double t0, Cell target_cell) {
    SegmentResult result;
    result.final_state = state;
    const long long deadline_steps = std::llround(deadline / dt);

    auto reached = [&](const SwarmState& s) {
        if (h_waypoint(centroid(s), w, cfg.d_g) > 0.0) return false;
        for (std::size_t i = 0; i < s.size(); ++i)
            for (std::size_t j = i + 1; j < s.size(); ++j)
                if (h_formation(displacement(s, i, j), f.displacement(i, j), cfg.d_f) > 0.0)
                    return false;
        return true;
    };

    while (true) {
        if (reached(result.final_state)) {
            result.outcome = SegmentOutcome::Reached;
            break;
        }
        if (static_cast<long long>(result.samples.size()) > deadline_steps) {
            result.outcome = SegmentOutcome::DeadlineExceeded;
            break;
        }
        QpProblem qp = build_qp(result.final_state, w, f, world, cfg, params);
        QpSolution sol = solve_qp(qp);
        const double t = t0 + static_cast<double>(result.samples.size()) * dt;
        if (sol.status != QpStatus::Optimal) {
            result.samples.push_back({t, result.final_state,
                                      ControlInput{std::vector<Vec2>(result.final_state.size())},
                                      target_cell, f.id(), 0.0, 0.0, sol.status});
            result.outcome = SegmentOutcome::QpInfeasible;
            break;
        }
        ControlInput u{sol.inputs(result.final_state.size())};
        result.samples.push_back({t, result.final_state, u, target_cell, f.id(), sol.delta1(),
                                  sol.delta2(), sol.status});
        result.final_state = integrate(result.final_state, u, dt);
    }
    result.elapsed = static_cast<double>(result.samples.size()) * dt;
    return result;
}

MissionResult run_mission(const GridWorld& world, const FormationCatalog& catalog, const Dfts& dfts,
                          const GameStructure& game, const Strategy& strategy, const Gr1Spec& spec,
                          const EnvSchedule& schedule, const SimConfig& sim_cfg, const QpConfig& qp_cfg,
                          const FxtParams& params) {
    sim_cfg.validate();
    qp_cfg.validate();

    MissionResult result;
    TrajectoryLog& log = result.log;
    bool aborted = false;
    std::string abort_reason;

    EnvValuation env = enforce_env_init(spec, schedule.propose(0, spec.env_vars, EnvValuation{}));
    auto init_it = strategy.initial.find(game.env_index(env));
    if (init_it == strategy.initial.end())
        throw std::runtime_error("strategy has no initial node for the admissible initial valuation");
    int node = init_it->second;
    int state_id = strategy.nodes[node].state;

    SwarmState cur = place_at(world.waypoint_of_cell(dfts.state(state_id).cell),
                              catalog.at(dfts.state(state_id).formation));
    if (sim_cfg.max_symbolic_steps > 0)
        log.output_word.push_back([&] {
            std::set<std::string> w = dfts.labels(state_id);
            auto e = label_e(env);
            w.insert(e.begin(), e.end());
            return w;
        }());

    std::size_t total_samples = 0;
    for (int step = 0; step < sim_cfg.max_symbolic_steps; ++step) {
        EnvValuation next_env =
            enforce_env_safety(spec, dfts.labels(state_id), env,
                               schedule.propose(step + 1, spec.env_vars, env));

        const auto& edge_opt = strategy.transitions[node][game.env_index(next_env)];
        if (!edge_opt) {
            aborted = true;
            abort_reason = "strategy node miss at step " + std::to_string(step);
            break;
        }
        const Strategy::Edge& edge = *edge_opt;
        auto succ = dfts.delta(state_id, edge.action);
        if (!succ || *succ != strategy.nodes[edge.next].state)
            throw std::runtime_error("strategy transition disagrees with the abstraction");

        const DftsState& target = dfts.state(*succ);
        SegmentResult seg = run_symbolic_step(cur, world.waypoint_of_cell(target.cell),
                                              catalog.at(target.formation), world, qp_cfg, params,
                                              sim_cfg.dt, sim_cfg.t_ud,
                                              static_cast<double>(total_samples) * sim_cfg.dt,
                                              target.cell);
        log.symbolic_trace.push_back({step, state_id, env, edge.action, seg.elapsed});
        for (auto& s : seg.samples) log.samples.push_back(std::move(s));
        total_samples = log.samples.size();
        cur = seg.final_state;

        if (seg.outcome != SegmentOutcome::Reached) {
            aborted = true;
            abort_reason = std::string(segment_outcome_name(seg.outcome)) + " at step " +
                           std::to_string(step) + " toward cell (" + std::to_string(target.cell.cx) +
                           "," + std::to_string(target.cell.cy) + ")";
            break;
        }

        state_id = *succ;
        node = edge.next;
        env = next_env;
        std::set<std::string> w = dfts.labels(state_id);
        auto e = label_e(env);
        w.insert(e.begin(), e.end());
        log.output_word.push_back(std::move(w));
    }
    log.symbolic_trace.push_back({static_cast<int>(log.symbolic_trace.size()), state_id, env, -1, 0.0});

    if (!log.samples.empty()) {
        // Closing sample so the final state is monitored too.
        const Sample& last = log.samples.back();
        log.samples.push_back({static_cast<double>(total_samples) * sim_cfg.dt, cur,
                               ControlInput{std::vector<Vec2>(cur.size())}, last.target_cell,
                               last.formation_id, 0.0, 0.0, QpStatus::Optimal});
    }

    result.report = compute_monitor_report(log, world, spec, qp_cfg, sim_cfg.t_ud, aborted, abort_reason);
    if (aborted) SWARM_LOG_WARN("mission aborted: " + abort_reason);
    return result;
}

MonitorReport compute_monitor_report(const TrajectoryLog& log, const GridWorld& world,
                                     const Gr1Spec& spec, const QpConfig& qp_cfg, double t_ud,
                                     bool aborted, const std::string& abort_reason) {
    MonitorReport rep;
    rep.aborted = aborted;
    rep.abort_reason = abort_reason;

    const auto planes = world.bound_planes();
    for (const auto& sample : log.samples) {
        const SwarmState& s = sample.state;
        for (std::size_t i = 0; i < s.size(); ++i) {
            for (std::size_t j = i + 1; j < s.size(); ++j) {
                const Vec2 x_ij = displacement(s, i, j);
                rep.min_pairwise_distance = std::min(rep.min_pairwise_distance, x_ij.norm());
                if (h_separation(x_ij, qp_cfg.d_o) < 0.0) ++rep.collision_violations;
            }
            for (const auto& o : world.obstacles()) {
                const double b = -h_obstacle(s.positions[i], o.eta, o.p);
                rep.min_obstacle_margin = std::min(rep.min_obstacle_margin, b);
                if (b < 0.0) ++rep.obstacle_violations;
            }
            for (const auto& pl : planes) {
                const double b = pl.barrier(s.positions[i]);
                rep.min_obstacle_margin = std::min(rep.min_obstacle_margin, b);
                if (b < 0.0) ++rep.obstacle_violations;
            }
        }
        if (sample.delta1 > 0.0) ++rep.delta1_positive_steps;
        try {
            if (world.is_obstacle(world.cell_of_point(centroid(s)))) ++rep.centroid_obstacle_entries;
        } catch (const std::out_of_range&) {
            // centroid outside the workspace: only possible without bounds
        }
    }

    for (const auto& rec : log.symbolic_trace) {
        if (rec.action < 0) continue;
        rep.reach_times.push_back(rec.reach_time);
        if (rec.reach_time > t_ud + 1e-9) ++rep.reach_deadline_violations;
    }

    auto eval_on_word = [](const Prop& f, const std::set<std::string>& word) {
        std::set<std::string> cur, nxt;
        f.collect_atoms(cur, nxt);
        Valuation v;
        for (const auto& a : cur) v[a] = word.count(a) > 0;
        return f.eval(v);
    };
    rep.goal_visit_indices.resize(spec.sys_justice.size());
    for (std::size_t k = 0; k < log.output_word.size(); ++k) {
        for (std::size_t j = 0; j < spec.sys_justice.size(); ++j)
            if (eval_on_word(spec.sys_justice[j], log.output_word[k]))
                rep.goal_visit_indices[j].push_back(static_cast<int>(k));
        for (const auto& f : spec.sys_safety)
            if (!eval_on_word(f, log.output_word[k])) ++rep.sys_safety_violations;
    }
    return rep;
}

std::string MonitorReport::to_json() const {
    nlohmann::json doc;
    doc["min_pairwise_distance"] =
        std::isfinite(min_pairwise_distance) ? nlohmann::json(min_pairwise_distance) : nlohmann::json();
    doc["min_obstacle_margin"] =
        std::isfinite(min_obstacle_margin) ? nlohmann::json(min_obstacle_margin) : nlohmann::json();
    doc["reach_times"] = reach_times;
    doc["reach_deadline_violations"] = reach_deadline_violations;
    doc["collision_violations"] = collision_violations;
    doc["obstacle_violations"] = obstacle_violations;
    doc["sys_safety_violations"] = sys_safety_violations;
    doc["goal_visit_indices"] = goal_visit_indices;
    doc["delta1_positive_steps"] = delta1_positive_steps;
    doc["centroid_obstacle_entries"] = centroid_obstacle_entries;
    doc["aborted"] = aborted;
    doc["abort_reason"] = abort_reason;
    return doc.dump(2) + "\n";
}

RefineResult refine_loop(const GridWorld& world, const FormationCatalog& catalog,
                         const std::vector<FeasibilityRule>& rules, const DftsState& initial,
                         const Gr1Spec& spec, const QpConfig& qp_cfg, const FxtParams& params,
                         const SimConfig& sim_cfg, int probe_budget) {
    if (probe_budget < 1) throw std::invalid_argument("refine_loop: probe_budget must be >= 1");
    sim_cfg.validate();

    RefineResult result;
    result.dfts = build_dfts(world, catalog, rules, initial);
    std::map<std::pair<int, int>, std::optional<SegmentOutcome>> cache;  // nullopt = feasible

    auto probe = [&](int state_id, int action_id) -> std::optional<SegmentOutcome> {
        auto key = std::make_pair(state_id, action_id);
        auto it = cache.find(key);
        if (it != cache.end()) return it->second;

        const DftsState& src = result.dfts.state(state_id);
        const int succ = *result.dfts.delta(state_id, action_id);
        const DftsState& dst = result.dfts.state(succ);
        const Vec2 src_w = world.waypoint_of_cell(src.cell);
        const Formation& src_f = catalog.at(src.formation);
        const Vec2 dst_w = world.waypoint_of_cell(dst.cell);
        const Formation& dst_f = catalog.at(dst.formation);

        std::optional<SegmentOutcome> fail;
        for (int k = 0; k < probe_budget && !fail; ++k) {
            SwarmState start = place_at(src_w, src_f);
            if (k > 0) {
                // Jittered placement, redrawn until it starts safe.
                std::mt19937_64 rng(splitmix64(sim_cfg.seed ^ splitmix64(
                                        static_cast<std::uint64_t>(state_id) * 131071ULL +
                                        static_cast<std::uint64_t>(action_id) * 257ULL + k)));
                std::uniform_real_distribution<double> dist(-0.05, 0.05);
                for (int attempt = 0; attempt < 20; ++attempt) {
                    SwarmState cand = place_at(src_w, src_f);
                    for (auto& p : cand.positions) p += Vec2{dist(rng), dist(rng)};
                    bool safe = true;
                    for (std::size_t i = 0; i < cand.size() && safe; ++i) {
                        for (std::size_t j = i + 1; j < cand.size(); ++j)
                            if (h_separation(displacement(cand, i, j), qp_cfg.d_o) < 0.0) safe = false;
                        for (const auto& o : world.obstacles())
                            if (-h_obstacle(cand.positions[i], o.eta, o.p) < 0.0) safe = false;
                        for (const auto& pl : world.bound_planes())
                            if (pl.barrier(cand.positions[i]) < 0.0) safe = false;
                    }
                    if (safe) {
                        start = std::move(cand);
                        break;
                    }
                }
            }
            SegmentResult seg = run_symbolic_step(start, dst_w, dst_f, world, qp_cfg, params,
                                                  sim_cfg.dt, sim_cfg.t_ud);
            if (seg.outcome != SegmentOutcome::Reached) fail = seg.outcome;
        }
        cache[key] = fail;
        return fail;
    };

    while (true) {
        ++result.rounds;
        GameStructure game(result.dfts, spec, catalog);
        Gr1Solution sol = solve_gr1(game);
        Strategy strategy;
        try {
            strategy = extract_strategy(game, sol);
        } catch (const SynthesisFailure&) {
            result.realizable = false;
            return result;
        }

        std::set<std::pair<int, int>> edges;
        for (int id = 0; id < strategy.node_count(); ++id)
            for (std::size_t e2 = 0; e2 < strategy.n_env; ++e2)
                if (strategy.transitions[id][e2])
                    edges.insert({strategy.nodes[id].state, strategy.transitions[id][e2]->action});

        std::vector<PrunedEdge> failing;
        for (const auto& [state_id, action_id] : edges) {
            auto fail = probe(state_id, action_id);
            if (fail) {
                const DftsState& src = result.dfts.state(state_id);
                failing.push_back({state_id, action_id,
                                   "(" + std::to_string(src.cell.cx) + "," + std::to_string(src.cell.cy) +
                                       "," + catalog.at(src.formation).id() + ") --" +
                                       action_name(result.dfts.actions()[action_id], catalog) + "--> " +
                                       segment_outcome_name(*fail),
                                   *fail});
            }
        }
        if (failing.empty()) {
            result.realizable = true;
            result.strategy = std::move(strategy);
            return result;
        }
        for (const auto& edge : failing) {
            result.dfts = result.dfts.prune_transition(edge.state, edge.action);
            result.pruned.push_back(edge);
            SWARM_LOG_INFO("refine: pruned " + edge.description);
        }
    }
}

namespace {

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

std::string write_trajectory_csv(const TrajectoryLog& log, std::size_t robots) {
    std::string out = "t";
    for (std::size_t i = 1; i <= robots; ++i)
        out += ",x" + std::to_string(i) + ",y" + std::to_string(i);
    for (std::size_t i = 1; i <= robots; ++i)
        out += ",u" + std::to_string(i) + "x,u" + std::to_string(i) + "y";
    out += ",target_cell,formation_id,delta1,delta2,qp_status\n";
    for (const auto& s : log.samples) {
        out += fmt_double(s.t);
        for (const auto& p : s.state.positions) out += "," + fmt_double(p.x) + "," + fmt_double(p.y);
        for (const auto& u : s.u.inputs) out += "," + fmt_double(u.x) + "," + fmt_double(u.y);
        out += "," + std::to_string(s.target_cell.cx) + "_" + std::to_string(s.target_cell.cy);
        out += "," + s.formation_id;
        out += "," + fmt_double(s.delta1) + "," + fmt_double(s.delta2);
        out += ",";
        out += qp_status_name(s.qp_status);
        out += "\n";
    }
    return out;
}

std::string write_symbolic_trace(const TrajectoryLog& log, const Dfts& dfts,
                                 const FormationCatalog& catalog) {
    std::string out;
    for (const auto& rec : log.symbolic_trace) {
        const DftsState& s = dfts.state(rec.state);
        out += "step=" + std::to_string(rec.step);
        out += " cell=" + std::to_string(s.cell.cx) + "," + std::to_string(s.cell.cy);
        out += " formation=" + catalog.at(s.formation).id();
        for (const auto& [var, val] : rec.env.assignments)
            out += " " + var + "=" + (val ? "true" : "false");
        if (rec.action >= 0) {
            out += " action=" + action_name(dfts.actions()[rec.action], catalog);
            out += " reach_time=" + fmt_double(rec.reach_time);
        } else {
            out += " action=-";
        }
        out += "\n";
    }
    return out;
}

}  // namespace swarm
