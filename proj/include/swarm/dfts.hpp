#ifndef SWARM_DFTS_HPP
#define SWARM_DFTS_HPP

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "swarm/world.hpp"

namespace swarm {

enum class Move { Stay = 0, North, South, East, West };

constexpr int kMoveCount = 5;
const char* move_name(Move m);

// One symbolic step moves the cell by at most one 4-neighbor move and may
// simultaneously change formation. "keep" retains the current formation;
// switch actions are only defined toward a different formation, so the map
// stays deterministic with no duplicate (action -> successor) entries.
struct Action {
    Move move = Move::Stay;
    int switch_to = -1;  // -1 = keep, otherwise catalog index

    auto operator<=>(const Action&) const = default;
};

std::string action_name(const Action& a, const FormationCatalog& catalog);

struct DftsState {
    Cell cell;
    int formation = 0;  // catalog index

    auto operator<=>(const DftsState&) const = default;
};

// Deterministic finite transition system over waypoint x formation states.
class Dfts {
public:
    Dfts() = default;

    int state_count() const { return static_cast<int>(states_.size()); }
    const DftsState& state(int id) const { return states_.at(id); }
    std::optional<int> state_id(const DftsState& s) const;
    int initial() const { return initial_; }
    const std::vector<Action>& actions() const { return actions_; }
    int action_id(const Action& a) const;
    const std::set<std::string>& labels(int state_id) const { return labels_.at(state_id); }

    std::optional<int> delta(int state_id, int act_id) const;

    // (action id, successor id) pairs in action-alphabet order.
    const std::vector<std::pair<int, int>>& successors(int state_id) const {
        return succ_.at(state_id);
    }

    Dfts prune_transition(int state_id, int act_id) const;

    std::size_t transition_count() const;
    std::vector<int> dead_end_states() const;

    std::string export_text(const FormationCatalog& catalog) const;

    friend Dfts build_dfts(const GridWorld&, const FormationCatalog&,
                           const std::vector<FeasibilityRule>&, const DftsState&, bool);

private:
    std::vector<DftsState> states_;
    std::map<DftsState, int> index_;
    int initial_ = -1;
    std::vector<Action> actions_;                         // full alphabet, fixed order
    std::vector<std::vector<std::pair<int, int>>> succ_;  // per state, sorted by action id
    std::vector<std::set<std::string>> labels_;

    void rebuild_index();
};

// Generates the full product over non-obstacle cells and formations, then
// removes every transition that leaves the grid, enters an obstacle cell, or
// violates a feasibility rule.
Dfts build_dfts(const GridWorld& world, const FormationCatalog& catalog,
                const std::vector<FeasibilityRule>& rules, const DftsState& initial,
                bool switch_only_while_staying = false);

}  // namespace swarm

#endif
