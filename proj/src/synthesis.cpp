#include "swarm/synthesis.hpp"

#include <algorithm>
#include <deque>
#include <stdexcept>

#include <json.hpp>

namespace swarm {

PositionSet cpre(const GameStructure& game, const PositionSet& target) {
    const std::size_t n = game.position_count();
    PositionSet out(n);
    for (std::size_t p = 0; p < n; ++p) {
        const std::uint64_t moves = game.env_moves(p);
        if (moves == 0) continue;  // env deadlock: not controllable
        const auto& succ = game.sys_succ(game.state_of(p));
        bool all = true;
        for (std::size_t e2 = 0; e2 < game.env_count() && all; ++e2) {
            if (!((moves >> e2) & 1)) continue;
            bool any = false;
            for (const auto& [a, s2] : succ) {
                (void)a;
                if (target.test(game.position(s2, e2))) {
                    any = true;
                    break;
                }
            }
            all = any;
        }
        if (all) out.set(p);
    }
    return out;
}

namespace {

struct GoalPass {
    PositionSet y_inf;
    GoalLayers layers;
};

// mu Y loop for one goal at a fixed outer set Z.
GoalPass least_fixpoint_y(const GameStructure& game, const PositionSet& z, const PositionSet& goal) {
    const std::size_t n = game.position_count();
    const PositionSet& safe = game.safe_set();

    PositionSet base = cpre(game, z);
    base &= goal;
    base &= safe;

    GoalPass pass;
    pass.y_inf = PositionSet(n);
    while (true) {
        PositionSet pre_y = cpre(game, pass.y_inf);
        PositionSet y_new = pass.y_inf;
        std::vector<LayerRecord> iteration_records;
        for (std::size_t i = 0; i < game.env_justice().size(); ++i) {
            // nu X: wait where env justice i is falsified, otherwise progress.
            PositionSet x = safe;
            while (true) {
                PositionSet pre_x = cpre(game, x);
                PositionSet x_new(n);
                for (std::size_t p = 0; p < n; ++p) {
                    if (!safe.test(p)) continue;
                    if (base.test(p) || pre_y.test(p) ||
                        (!game.env_justice()[i].test(p) && pre_x.test(p)))
                        x_new.set(p);
                }
                if (x_new == x) break;
                x = std::move(x_new);
            }
            iteration_records.push_back(
                {static_cast<int>(pass.layers.fronts.size()) + 1, static_cast<int>(i), x});
            y_new |= x;
        }
        if (y_new == pass.y_inf) break;
        pass.y_inf = std::move(y_new);
        pass.layers.fronts.push_back(pass.y_inf);
        for (auto& r : iteration_records) pass.layers.records.push_back(std::move(r));
    }
    return pass;
}

}  // namespace

Gr1Solution solve_gr1(const GameStructure& game) {
    const std::size_t n_goals = game.sys_justice().size();

    Gr1Solution sol;
    sol.winning = game.safe_set();
    std::vector<GoalPass> passes(n_goals);
    while (true) {
        ++sol.outer_iterations;
        PositionSet z_next = PositionSet::all(game.position_count());
        for (std::size_t j = 0; j < n_goals; ++j) {
            passes[j] = least_fixpoint_y(game, sol.winning, game.sys_justice()[j]);
            z_next &= passes[j].y_inf;
        }
        if (z_next == sol.winning) break;
        sol.winning = std::move(z_next);
    }
    // At the fixpoint each per-goal reachability set collapses onto Z.
    for (std::size_t j = 0; j < n_goals; ++j) {
        if (!(passes[j].y_inf == sol.winning))
            throw std::logic_error("solve_gr1: per-goal fixpoint does not match winning set");
        sol.layers.push_back(std::move(passes[j].layers));
    }
    return sol;
}

namespace {

// Picks the response at `pos` for env move e2, pursuing goal `g`, following the
// layer records in order. Within the first record that offers a transition,
// goal transitions beat rank decreases beat waiting moves; ties go to the
// lowest action id.
Strategy::Edge select_response(const GameStructure& game, const Gr1Solution& sol, std::size_t pos,
                               std::size_t e2, int g) {
    const GoalLayers& layers = sol.layers[g];
    const PositionSet& goal_set = game.sys_justice()[g];
    const bool at_goal = goal_set.test(pos);
    const auto& succ = game.sys_succ(game.state_of(pos));

    for (const auto& rec : layers.records) {
        const PositionSet* y_prev = rec.layer >= 2 ? &layers.fronts[rec.layer - 2] : nullptr;
        const bool may_wait = !game.env_justice()[rec.env_justice].test(pos);
        int best_goal = -1, best_progress = -1, best_wait = -1;
        int act_goal = -1, act_progress = -1, act_wait = -1;
        for (const auto& [a, s2] : succ) {
            const std::size_t q = game.position(s2, e2);
            if (at_goal && sol.winning.test(q) && best_goal < 0) {
                best_goal = static_cast<int>(q);
                act_goal = a;
            }
            if (y_prev != nullptr && y_prev->test(q) && best_progress < 0) {
                best_progress = static_cast<int>(q);
                act_progress = a;
            }
            if (may_wait && rec.x_set.test(q) && best_wait < 0) {
                best_wait = static_cast<int>(q);
                act_wait = a;
            }
        }
        if (best_goal >= 0) return {act_goal, best_goal};
        if (best_progress >= 0) return {act_progress, best_progress};
        if (best_wait >= 0) return {act_wait, best_wait};
    }
    throw std::logic_error("extract_strategy: no admissible response found (fixpoint inconsistency)");
}

}  // namespace

Strategy extract_strategy(const GameStructure& game, const Gr1Solution& solution) {
    std::vector<std::size_t> losing;
    for (auto p : game.initial_positions())
        if (!solution.winning.test(p)) losing.push_back(p);
    if (!losing.empty()) {
        std::string msg = "specification unrealizable from initial position(s):";
        for (auto p : losing) msg += " " + game.describe_position(p, nullptr, nullptr);
        throw SynthesisFailure(msg, losing);
    }

    const int n_goals = static_cast<int>(game.sys_justice().size());
    Strategy st;
    st.env_var_names = game.env_vars();
    st.n_env = game.env_count();

    std::map<std::pair<std::size_t, int>, int> node_ids;
    std::deque<int> queue;
    auto get_node = [&](std::size_t pos, int goal) {
        auto it = node_ids.find({pos, goal});
        if (it != node_ids.end()) return it->second;
        int id = static_cast<int>(st.nodes.size());
        node_ids[{pos, goal}] = id;
        st.nodes.push_back({game.state_of(pos), game.env_of(pos), goal});
        st.transitions.emplace_back(st.n_env);
        queue.push_back(id);
        return id;
    };

    for (auto p : game.initial_positions()) st.initial[game.env_of(p)] = get_node(p, 0);

    while (!queue.empty()) {
        const int id = queue.front();
        queue.pop_front();
        const Strategy::Node node = st.nodes[id];
        const std::size_t pos = game.position(node.state, node.env);
        const int g = game.sys_justice()[node.goal].test(pos) ? (node.goal + 1) % n_goals : node.goal;
        const std::uint64_t moves = game.env_moves(pos);
        for (std::size_t e2 = 0; e2 < game.env_count(); ++e2) {
            if (!((moves >> e2) & 1)) continue;
            Strategy::Edge sel = select_response(game, solution, pos, e2, g);
            const int next_id = get_node(static_cast<std::size_t>(sel.next), g);
            st.transitions[id][e2] = Strategy::Edge{sel.action, next_id};
        }
    }
    return st;
}

namespace {

// Iterative Tarjan over the strategy product graph restricted to a node filter.
std::vector<std::vector<int>> strongly_connected_components(
    const std::vector<std::vector<int>>& adj, const std::vector<bool>& keep) {
    const int n = static_cast<int>(adj.size());
    std::vector<int> index(n, -1), low(n, 0);
    std::vector<bool> on_stack(n, false);
    std::vector<int> stack;
    std::vector<std::vector<int>> sccs;
    int counter = 0;

    struct Frame {
        int v;
        std::size_t edge;
    };
    for (int root = 0; root < n; ++root) {
        if (!keep[root] || index[root] >= 0) continue;
        std::vector<Frame> frames{{root, 0}};
        index[root] = low[root] = counter++;
        stack.push_back(root);
        on_stack[root] = true;
        while (!frames.empty()) {
            Frame& f = frames.back();
            if (f.edge < adj[f.v].size()) {
                int w = adj[f.v][f.edge++];
                if (!keep[w]) continue;
                if (index[w] < 0) {
                    index[w] = low[w] = counter++;
                    stack.push_back(w);
                    on_stack[w] = true;
                    frames.push_back({w, 0});
                } else if (on_stack[w]) {
                    low[f.v] = std::min(low[f.v], index[w]);
                }
            } else {
                if (low[f.v] == index[f.v]) {
                    std::vector<int> comp;
                    while (true) {
                        int w = stack.back();
                        stack.pop_back();
                        on_stack[w] = false;
                        comp.push_back(w);
                        if (w == f.v) break;
                    }
                    sccs.push_back(std::move(comp));
                }
                int v = f.v;
                frames.pop_back();
                if (!frames.empty()) low[frames.back().v] = std::min(low[frames.back().v], low[v]);
            }
        }
    }
    return sccs;
}

// Shortest path between two nodes inside a node filter; returns the node list
// including both endpoints (or just {from} when from == to and allow_empty).
std::vector<int> bfs_path(const std::vector<std::vector<int>>& adj, const std::vector<bool>& keep,
                          int from, int to, bool nontrivial) {
    std::vector<int> parent(adj.size(), -2);
    std::deque<int> q;
    if (!nontrivial && from == to) return {from};
    parent[from] = -1;
    q.push_back(from);
    while (!q.empty()) {
        int v = q.front();
        q.pop_front();
        for (int w : adj[v]) {
            if (!keep[w]) continue;
            if (w == to) {
                std::vector<int> path{to};
                int cur = v;
                while (cur >= 0) {
                    path.push_back(cur);
                    cur = parent[cur];
                }
                std::reverse(path.begin(), path.end());
                return path;
            }
            if (parent[w] == -2) {
                parent[w] = v;
                q.push_back(w);
            }
        }
    }
    throw std::logic_error("bfs_path: no path inside SCC");
}

}  // namespace

std::string VerifyReport::summary() const {
    if (pass) return "PASS (" + std::to_string(reachable_nodes) + " reachable nodes, 0 counterexamples)";
    std::string out = "FAIL:";
    for (const auto& p : problems) out += "\n  " + p;
    return out;
}

VerifyReport verify_strategy(const GameStructure& game, const Strategy& strategy) {
    VerifyReport report;
    const int n = strategy.node_count();

    // Reachable subgraph; every allowed env move must have a transition.
    std::vector<bool> reachable(n, false);
    std::vector<std::vector<int>> adj(n);
    std::deque<int> queue;
    for (const auto& [env, id] : strategy.initial) {
        (void)env;
        if (!reachable[id]) {
            reachable[id] = true;
            queue.push_back(id);
        }
    }
    while (!queue.empty()) {
        int id = queue.front();
        queue.pop_front();
        const auto& node = strategy.nodes[id];
        const std::size_t pos = game.position(node.state, node.env);
        const std::uint64_t moves = game.env_moves(pos);
        if (!game.safe(pos))
            report.problems.push_back("safety violated at node " + std::to_string(id) + ", " +
                                      game.describe_position(pos, nullptr, nullptr));
        for (std::size_t e2 = 0; e2 < game.env_count(); ++e2) {
            if (!((moves >> e2) & 1)) continue;
            const auto& edge = strategy.transitions[id][e2];
            if (!edge) {
                report.problems.push_back("strategy not total: node " + std::to_string(id) +
                                          " has no response for env move " + std::to_string(e2));
                continue;
            }
            const auto& next = strategy.nodes[edge->next];
            if (next.env != e2)
                report.problems.push_back("transition env mismatch at node " + std::to_string(id));
            adj[id].push_back(edge->next);
            if (!reachable[edge->next]) {
                reachable[edge->next] = true;
                queue.push_back(edge->next);
            }
        }
    }
    report.reachable_nodes = static_cast<int>(std::count(reachable.begin(), reachable.end(), true));
    if (!report.problems.empty()) return report;

    // A violating lasso satisfies every env justice infinitely often while
    // missing some system justice goal: per goal, search the goal-free
    // subgraph for a cycle-bearing SCC that intersects all env justices.
    auto node_pos = [&](int id) {
        return game.position(strategy.nodes[id].state, strategy.nodes[id].env);
    };
    for (std::size_t j = 0; j < game.sys_justice().size(); ++j) {
        std::vector<bool> keep(n, false);
        for (int v = 0; v < n; ++v)
            keep[v] = reachable[v] && !game.sys_justice()[j].test(node_pos(v));
        auto sccs = strongly_connected_components(adj, keep);
        for (const auto& comp : sccs) {
            bool has_cycle = comp.size() > 1;
            if (!has_cycle)
                for (int w : adj[comp[0]])
                    if (w == comp[0]) has_cycle = true;
            if (!has_cycle) continue;
            std::vector<bool> in_comp(n, false);
            for (int v : comp) in_comp[v] = true;
            bool all_env = true;
            for (const auto& je : game.env_justice()) {
                bool hit = false;
                for (int v : comp)
                    if (je.test(node_pos(v))) hit = true;
                if (!hit) {
                    all_env = false;
                    break;
                }
            }
            if (!all_env) continue;

            // Counterexample: stem from an initial node, then a cycle through a
            // witness of every env justice.
            report.problems.push_back("justice goal " + std::to_string(j) +
                                      " can be starved on a reachable cycle (" +
                                      std::to_string(comp.size()) + " nodes)");
            int entry = *std::min_element(comp.begin(), comp.end());
            {
                // multi-source BFS over the full reachable graph
                std::vector<int> parent(n, -2);
                std::deque<int> bfs;
                for (const auto& [env, id] : strategy.initial) {
                    (void)env;
                    if (parent[id] == -2) {
                        parent[id] = -1;
                        bfs.push_back(id);
                    }
                }
                while (!bfs.empty() && parent[entry] == -2) {
                    int v = bfs.front();
                    bfs.pop_front();
                    for (int w : adj[v])
                        if (parent[w] == -2) {
                            parent[w] = v;
                            bfs.push_back(w);
                        }
                }
                std::vector<int> stem;
                for (int cur2 = entry; cur2 >= 0; cur2 = parent[cur2]) stem.push_back(cur2);
                std::reverse(stem.begin(), stem.end());
                report.lasso_stem = std::move(stem);
            }
            std::vector<int> cycle{entry};
            int cur = entry;
            for (const auto& je : game.env_justice()) {
                int witness = -1;
                for (int v : comp)
                    if (je.test(node_pos(v))) {
                        witness = v;
                        break;
                    }
                if (witness == cur) continue;
                auto leg = bfs_path(adj, in_comp, cur, witness, false);
                cycle.insert(cycle.end(), leg.begin() + 1, leg.end());
                cur = witness;
            }
            auto back = bfs_path(adj, in_comp, cur, entry, true);
            cycle.insert(cycle.end(), back.begin() + 1, back.end());
            report.lasso_cycle = std::move(cycle);
            report.pass = false;
            return report;
        }
    }
    report.pass = true;
    return report;
}

std::string Strategy::export_text(const Dfts& dfts, const FormationCatalog& catalog) const {
    nlohmann::json doc;
    doc["env_vars"] = env_var_names;
    doc["nodes"] = nlohmann::json::array();
    for (const auto& node : nodes) {
        const DftsState& s = dfts.state(node.state);
        nlohmann::json env;
        for (std::size_t k = 0; k < env_var_names.size(); ++k)
            env[env_var_names[k]] = ((node.env >> k) & 1) != 0;
        doc["nodes"].push_back({{"state", node.state},
                                {"cell", {s.cell.cx, s.cell.cy}},
                                {"formation", catalog.at(s.formation).id()},
                                {"env", env},
                                {"goal", node.goal}});
    }
    doc["initial"] = nlohmann::json::array();
    for (const auto& [env, id] : initial) doc["initial"].push_back({{"env_index", env}, {"node", id}});
    doc["transitions"] = nlohmann::json::array();
    for (int id = 0; id < node_count(); ++id)
        for (std::size_t e2 = 0; e2 < n_env; ++e2)
            if (transitions[id][e2])
                doc["transitions"].push_back({{"from", id},
                                              {"env_index", e2},
                                              {"action", action_name(dfts.actions()[transitions[id][e2]->action], catalog)},
                                              {"to", transitions[id][e2]->next}});
    return doc.dump(2) + "\n";
}

Strategy Strategy::import_text(const std::string& text, const Dfts& dfts,
                               const FormationCatalog& catalog) {
    nlohmann::json doc = nlohmann::json::parse(text);
    Strategy st;
    st.env_var_names = doc.at("env_vars").get<std::vector<std::string>>();
    if (st.env_var_names.size() > GameStructure::kMaxEnvVars)
        throw std::invalid_argument("strategy file: too many env vars");
    st.n_env = std::size_t{1} << st.env_var_names.size();

    std::map<std::string, int> action_by_name;
    for (int a = 0; a < static_cast<int>(dfts.actions().size()); ++a)
        action_by_name[action_name(dfts.actions()[a], catalog)] = a;

    for (const auto& nj : doc.at("nodes")) {
        Node node;
        node.state = nj.at("state").get<int>();
        if (node.state < 0 || node.state >= dfts.state_count())
            throw std::invalid_argument("strategy file: node state out of range (world mismatch?)");
        const DftsState& s = dfts.state(node.state);
        Cell cell{nj.at("cell").at(0).get<int>(), nj.at("cell").at(1).get<int>()};
        if (cell != s.cell || catalog.at(s.formation).id() != nj.at("formation").get<std::string>())
            throw std::invalid_argument("strategy file does not match this world's abstraction");
        std::size_t env = 0;
        for (std::size_t k = 0; k < st.env_var_names.size(); ++k)
            if (nj.at("env").at(st.env_var_names[k]).get<bool>()) env |= std::size_t{1} << k;
        node.env = env;
        node.goal = nj.at("goal").get<int>();
        st.nodes.push_back(node);
        st.transitions.emplace_back(st.n_env);
    }
    for (const auto& ij : doc.at("initial"))
        st.initial[ij.at("env_index").get<std::size_t>()] = ij.at("node").get<int>();
    for (const auto& tj : doc.at("transitions")) {
        int from = tj.at("from").get<int>();
        std::size_t e2 = tj.at("env_index").get<std::size_t>();
        auto it = action_by_name.find(tj.at("action").get<std::string>());
        if (it == action_by_name.end())
            throw std::invalid_argument("strategy file: unknown action '" +
                                        tj.at("action").get<std::string>() + "'");
        int to = tj.at("to").get<int>();
        if (from < 0 || from >= st.node_count() || to < 0 || to >= st.node_count() || e2 >= st.n_env)
            throw std::invalid_argument("strategy file: transition out of range");
        st.transitions[from][e2] = Edge{it->second, to};
    }
    return st;
}

}  // namespace swarm
