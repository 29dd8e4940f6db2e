#ifndef SWARM_SYNTHESIS_HPP
#define SWARM_SYNTHESIS_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "swarm/game.hpp"

namespace swarm {

// Controllable predecessor: positions with a non-empty env-move set from which,
// for every allowed env move, some system action lands in `target`.
PositionSet cpre(const GameStructure& game, const PositionSet& target);

// Intermediate sets of the fixpoint, kept for strategy extraction. For goal j,
// layer k (1-based) and env justice i, x_set is the inner greatest fixpoint;
// fronts[k-1] is the cumulative reachability front Y^k.
struct LayerRecord {
    int layer;
    int env_justice;
    PositionSet x_set;
};

struct GoalLayers {
    std::vector<PositionSet> fronts;
    std::vector<LayerRecord> records;  // layer-major, env-justice-minor
};

struct Gr1Solution {
    PositionSet winning;
    std::vector<GoalLayers> layers;  // one per system justice goal
    int outer_iterations = 0;
};

// Three-nested fixpoint over the game:
//   nu Z. /\_j mu Y. \/_i nu X. safe & [ (J^s_j & cpre(Z)) | cpre(Y) | (!J^e_i & cpre(X)) ]
// With env_justice = [true] the X fixpoint degenerates and this reduces to a
// generalized-Buechi game.
Gr1Solution solve_gr1(const GameStructure& game);

// Finite-memory Mealy controller; memory is the index of the justice goal
// currently pursued. Inputs are the environment's next valuation.
class Strategy {
public:
    struct Node {
        int state;        // DFTS state
        std::size_t env;  // env valuation index at this node
        int goal;         // justice goal being pursued
    };
    struct Edge {
        int action;  // DFTS action id
        int next;    // node index
    };

    std::vector<std::string> env_var_names;
    std::size_t n_env = 1;
    std::vector<Node> nodes;
    std::vector<std::vector<std::optional<Edge>>> transitions;  // [node][next env index]
    std::map<std::size_t, int> initial;                         // initial env index -> node

    int node_count() const { return static_cast<int>(nodes.size()); }

    std::string export_text(const Dfts& dfts, const FormationCatalog& catalog) const;
    static Strategy import_text(const std::string& text, const Dfts& dfts,
                                const FormationCatalog& catalog);
};

struct SynthesisFailure : std::runtime_error {
    std::vector<std::size_t> losing_initials;
    SynthesisFailure(std::string msg, std::vector<std::size_t> losing)
        : std::runtime_error(std::move(msg)), losing_initials(std::move(losing)) {}
};

// Requires every initial position to be winning; throws SynthesisFailure
// naming the losing initial positions otherwise.
Strategy extract_strategy(const GameStructure& game, const Gr1Solution& solution);

struct VerifyReport {
    bool pass = false;
    int reachable_nodes = 0;
    std::vector<std::string> problems;
    // On a justice violation: the offending lasso, as node indices into the
    // strategy, split into stem and cycle.
    std::vector<int> lasso_stem;
    std::vector<int> lasso_cycle;

    std::string summary() const;
};

// Exhaustive check of the strategy against the game: totality over allowed env
// moves, safety at every reachable node, and absence of reachable cycles that
// satisfy all env justice predicates while missing some system justice goal.
VerifyReport verify_strategy(const GameStructure& game, const Strategy& strategy);

}  // namespace swarm

#endif
