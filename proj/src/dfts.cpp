#include "swarm/dfts.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace swarm {

const char* move_name(Move m) {
    switch (m) {
        case Move::Stay: return "stay";
        case Move::North: return "north";
        case Move::South: return "south";
        case Move::East: return "east";
        case Move::West: return "west";
    }
    return "?";
}

std::string action_name(const Action& a, const FormationCatalog& catalog) {
    std::string out = move_name(a.move);
    if (a.switch_to < 0)
        out += "/keep";
    else
        out += "/switch:" + catalog.at(a.switch_to).id();
    return out;
}

namespace {

Cell apply_move(Cell c, Move m) {
    switch (m) {
        case Move::Stay: return c;
        case Move::North: return {c.cx, c.cy + 1};
        case Move::South: return {c.cx, c.cy - 1};
        case Move::East: return {c.cx + 1, c.cy};
        case Move::West: return {c.cx - 1, c.cy};
    }
    return c;
}

Move parse_direction(const std::string& s) {
    if (s == "north") return Move::North;
    if (s == "south") return Move::South;
    if (s == "east") return Move::East;
    if (s == "west") return Move::West;
    throw std::invalid_argument("bad direction '" + s + "'");
}

}  // namespace

std::optional<int> Dfts::state_id(const DftsState& s) const {
    auto it = index_.find(s);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

int Dfts::action_id(const Action& a) const {
    auto it = std::find(actions_.begin(), actions_.end(), a);
    if (it == actions_.end()) throw std::invalid_argument("unknown action");
    return static_cast<int>(it - actions_.begin());
}

std::optional<int> Dfts::delta(int state_id, int act_id) const {
    for (const auto& [a, s] : succ_.at(state_id))
        if (a == act_id) return s;
    return std::nullopt;
}

Dfts Dfts::prune_transition(int state_id, int act_id) const {
    Dfts out = *this;
    auto& row = out.succ_.at(state_id);
    auto it = std::find_if(row.begin(), row.end(), [&](const auto& p) { return p.first == act_id; });
    if (it == row.end()) throw std::invalid_argument("prune_transition: unknown transition");
    row.erase(it);
    return out;
}

std::size_t Dfts::transition_count() const {
    std::size_t n = 0;
    for (const auto& row : succ_) n += row.size();
    return n;
}

std::vector<int> Dfts::dead_end_states() const {
    std::vector<int> out;
    for (int s = 0; s < state_count(); ++s)
        if (succ_[s].empty()) out.push_back(s);
    return out;
}

void Dfts::rebuild_index() {
    index_.clear();
    for (int i = 0; i < state_count(); ++i) index_[states_[i]] = i;
}

Dfts build_dfts(const GridWorld& world, const FormationCatalog& catalog,
                const std::vector<FeasibilityRule>& rules, const DftsState& initial,
                bool switch_only_while_staying) {
    if (catalog.empty()) throw std::invalid_argument("build_dfts: empty formation catalog");
    if (!world.in_range(initial.cell) || world.is_obstacle(initial.cell))
        throw std::invalid_argument("build_dfts: initial cell is invalid or an obstacle");
    if (initial.formation < 0 || initial.formation >= static_cast<int>(catalog.size()))
        throw std::invalid_argument("build_dfts: bad initial formation index");

    Dfts t;

    // Action alphabet in fixed order: move-major, keep before switches.
    const Move moves[] = {Move::Stay, Move::North, Move::South, Move::East, Move::West};
    for (Move m : moves) {
        t.actions_.push_back({m, -1});
        for (int f = 0; f < static_cast<int>(catalog.size()); ++f) t.actions_.push_back({m, f});
    }

    for (int cy = 0; cy < world.rows(); ++cy)
        for (int cx = 0; cx < world.cols(); ++cx) {
            Cell c{cx, cy};
            if (world.is_obstacle(c)) continue;
            for (int f = 0; f < static_cast<int>(catalog.size()); ++f) {
                t.states_.push_back({c, f});
                std::set<std::string> lab = world.label_w(c);
                for (const auto& l : catalog[f].labels()) lab.insert(l);
                t.labels_.push_back(std::move(lab));
            }
        }
    t.rebuild_index();

    auto initial_id = t.state_id(initial);
    if (!initial_id) throw std::invalid_argument("build_dfts: initial state not in state set");
    t.initial_ = *initial_id;

    auto violates_rule = [&](const DftsState& src, const DftsState& dst, Move move) {
        for (const auto& rule : rules) {
            switch (rule.kind) {
                case FeasibilityRule::Kind::ForbidCell:
                    if (dst.cell == rule.cell) return true;
                    break;
                case FeasibilityRule::Kind::ForbidFormationInCell:
                    if (dst.cell == rule.cell && catalog[dst.formation].id() == rule.formation)
                        return true;
                    break;
                case FeasibilityRule::Kind::RequireFormationForMove:
                    if (dst.cell == rule.cell && move == parse_direction(rule.direction) &&
                        catalog[dst.formation].id() != rule.formation)
                        return true;
                    break;
            }
        }
        (void)src;
        return false;
    };

    t.succ_.resize(t.states_.size());
    for (int sid = 0; sid < t.state_count(); ++sid) {
        const DftsState& src = t.states_[sid];
        for (int aid = 0; aid < static_cast<int>(t.actions_.size()); ++aid) {
            const Action& a = t.actions_[aid];
            if (a.switch_to == src.formation) continue;  // covered by keep
            if (switch_only_while_staying && a.switch_to >= 0 && a.move != Move::Stay) continue;
            DftsState dst{apply_move(src.cell, a.move),
                          a.switch_to < 0 ? src.formation : a.switch_to};
            if (!world.in_range(dst.cell) || world.is_obstacle(dst.cell)) continue;
            if (violates_rule(src, dst, a.move)) continue;
            auto dst_id = t.state_id(dst);
            if (!dst_id) continue;
            t.succ_[sid].emplace_back(aid, *dst_id);
        }
    }

    // A rule that forbids the initial (cell, formation) pair makes starting
    // there meaningless; reject it up front.
    DftsState self = t.states_[t.initial_];
    if (violates_rule(self, self, Move::Stay))
        throw std::invalid_argument("build_dfts: initial state eliminated by rules");

    return t;
}

std::string Dfts::export_text(const FormationCatalog& catalog) const {
    nlohmann::json doc;
    doc["states"] = nlohmann::json::array();
    for (int i = 0; i < state_count(); ++i) {
        const DftsState& s = states_[i];
        doc["states"].push_back({{"cell", {s.cell.cx, s.cell.cy}},
                                 {"formation", catalog.at(s.formation).id()},
                                 {"labels", labels_[i]}});
    }
    doc["initial"] = initial_;
    doc["actions"] = nlohmann::json::array();
    for (const auto& a : actions_) doc["actions"].push_back(action_name(a, catalog));
    doc["transitions"] = nlohmann::json::array();
    std::vector<std::vector<int>> matrix(states_.size(), std::vector<int>(actions_.size(), -1));
    for (int s = 0; s < state_count(); ++s)
        for (const auto& [a, d] : succ_[s]) {
            doc["transitions"].push_back({s, a, d});
            matrix[s][a] = d;
        }
    doc["delta_matrix"] = matrix;
    return doc.dump(2) + "\n";
}

}  // namespace swarm
