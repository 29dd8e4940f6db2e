#include <doctest.h>

#include <json.hpp>
#include <random>

#include "swarm/dfts.hpp"

using namespace swarm;

namespace {

WorldFile paper_world() {
    return load_world_file(std::string(SWARM_SOURCE_DIR) + "/worlds/paper_5x5.json");
}

Dfts paper_dfts(const WorldFile& wf) {
    return build_dfts(wf.grid, wf.catalog, wf.rules, {{0, 0}, 1});
}

FormationCatalog tiny_catalog(int n) {
    FormationCatalog catalog;
    for (int k = 0; k < n; ++k) {
        double spread = 0.3 + 0.1 * k;
        catalog.emplace_back("f" + std::to_string(k), 2,
                             std::map<std::pair<std::size_t, std::size_t>, Vec2>{
                                 {{0, 1}, Vec2{spread, 0.0}}},
                             std::vector<std::string>{"f" + std::to_string(k)});
    }
    return catalog;
}

GridWorld open_world(int rows, int cols) {
    return GridWorld(rows, cols, 1.0, {0, 0},
                     std::vector<std::string>(rows * cols, "freespace"), {}, {}, true);
}

}  // namespace

TEST_CASE("case-study state space") {
    WorldFile wf = paper_world();
    int obstacle_cells = 0;
    for (int cy = 0; cy < 5; ++cy)
        for (int cx = 0; cx < 5; ++cx)
            if (wf.grid.is_obstacle({cx, cy})) ++obstacle_cells;
    // full product before obstacle removal
    CHECK(5 * 5 * static_cast<int>(wf.catalog.size()) == 75);
    Dfts t = paper_dfts(wf);
    CHECK(t.state_count() == (25 - obstacle_cells) * 3);
    CHECK(t.state(t.initial()).cell == Cell{0, 0});
    CHECK(wf.catalog[t.state(t.initial()).formation].id() == "vertical");
}

TEST_CASE("determinism, closure, and no-obstacle invariants") {
    WorldFile wf = paper_world();
    Dfts t = paper_dfts(wf);
    for (int s = 0; s < t.state_count(); ++s) {
        std::set<int> seen_actions;
        for (const auto& [a, d] : t.successors(s)) {
            CHECK(seen_actions.insert(a).second);  // at most one successor per action
            CHECK(d >= 0);
            CHECK(d < t.state_count());
        }
        CHECK(t.labels(s).count("obstacle") == 0);
    }
}

TEST_CASE("successor enumeration shapes") {
    // interior free cell, 3 formations, no rules: 5 moves x 3 formations
    WorldFile wf = paper_world();
    Dfts free_t = build_dfts(open_world(5, 5), wf.catalog, {}, {{0, 0}, 0});
    auto mid = free_t.state_id({{2, 2}, 0});
    REQUIRE(mid);
    CHECK(free_t.successors(*mid).size() == 15);

    // corner cell: no moves off-grid
    auto corner = free_t.state_id({{0, 0}, 0});
    REQUIRE(corner);
    CHECK(free_t.successors(*corner).size() == 9);  // stay/north/east x 3 formations
    for (const auto& [a, d] : free_t.successors(*corner)) {
        (void)a;
        CHECK(free_t.state(d).cell.cx >= 0);
        CHECK(free_t.state(d).cell.cy >= 0);
    }

    // single-cell world with one formation: only stay/keep
    FormationCatalog one = tiny_catalog(1);
    Dfts single = build_dfts(open_world(1, 1), one, {}, {{0, 0}, 0});
    CHECK(single.state_count() == 1);
    REQUIRE(single.successors(0).size() == 1);
    CHECK(single.actions()[single.successors(0)[0].first] == Action{Move::Stay, -1});

    // states adjacent to an obstacle have no move into it
    WorldFile pw = paper_world();
    Dfts t = paper_dfts(pw);
    for (int s = 0; s < t.state_count(); ++s)
        for (const auto& [a, d] : t.successors(s)) {
            (void)a;
            CHECK_FALSE(pw.grid.is_obstacle(t.state(d).cell));
        }
}

TEST_CASE("feasibility rules") {
    WorldFile wf = paper_world();
    Dfts t = paper_dfts(wf);
    // no transition into a corridor cell with a forbidden formation (exhaustive scan)
    int triangle = -1, vertical = -1;
    for (std::size_t k = 0; k < wf.catalog.size(); ++k) {
        if (wf.catalog[k].id() == "triangle") triangle = static_cast<int>(k);
        if (wf.catalog[k].id() == "vertical") vertical = static_cast<int>(k);
    }
    for (int s = 0; s < t.state_count(); ++s)
        for (const auto& [a, d] : t.successors(s)) {
            (void)a;
            CHECK_FALSE((t.state(d).cell == Cell{1, 2} && t.state(d).formation == triangle));
            CHECK_FALSE((t.state(d).cell == Cell{1, 2} && t.state(d).formation == vertical));
            CHECK_FALSE((t.state(d).cell == Cell{0, 1} && t.state(d).formation == triangle));
        }

    // forbid_cell removes every transition into the cell
    std::vector<FeasibilityRule> rules{{FeasibilityRule::Kind::ForbidCell, {1, 1}, "", ""}};
    Dfts blocked = build_dfts(open_world(3, 3), tiny_catalog(2), rules, {{0, 0}, 0});
    for (int s = 0; s < blocked.state_count(); ++s)
        for (const auto& [a, d] : blocked.successors(s)) {
            (void)a;
            CHECK_FALSE(blocked.state(d).cell == Cell{1, 1});
        }

    // require_formation_for_move: entering (1,0) eastbound demands formation f1
    std::vector<FeasibilityRule> req{
        {FeasibilityRule::Kind::RequireFormationForMove, {1, 0}, "f1", "east"}};
    Dfts gated = build_dfts(open_world(2, 2), tiny_catalog(2), req, {{0, 0}, 0});
    for (int s = 0; s < gated.state_count(); ++s)
        for (const auto& [a, d] : gated.successors(s)) {
            const Action& act = gated.actions()[a];
            if (act.move == Move::East && gated.state(d).cell == Cell{1, 0})
                CHECK(gated.state(d).formation == 1);
        }

    // a rule that kills the initial pair is rejected
    std::vector<FeasibilityRule> kill{
        {FeasibilityRule::Kind::ForbidFormationInCell, {0, 0}, "f0", ""}};
    CHECK_THROWS(build_dfts(open_world(2, 2), tiny_catalog(2), kill, {{0, 0}, 0}));
}

TEST_CASE("pruning") {
    WorldFile wf = paper_world();
    Dfts t = paper_dfts(wf);

    const auto& succ = t.successors(t.initial());
    REQUIRE_FALSE(succ.empty());
    int act = succ.front().first;
    Dfts pruned = t.prune_transition(t.initial(), act);
    CHECK_FALSE(pruned.delta(t.initial(), act).has_value());
    CHECK_THROWS(pruned.prune_transition(t.initial(), act));

    // monotonicity: pruned delta is a subset, everything else unchanged
    std::mt19937_64 rng(5);
    Dfts cur = t;
    for (int round = 0; round < 10; ++round) {
        int s = static_cast<int>(rng() % cur.state_count());
        if (cur.successors(s).empty()) continue;
        int a = cur.successors(s)[rng() % cur.successors(s).size()].first;
        Dfts next = cur.prune_transition(s, a);
        CHECK(next.transition_count() == cur.transition_count() - 1);
        for (int q = 0; q < cur.state_count(); ++q)
            for (const auto& [qa, qd] : next.successors(q)) {
                auto before = cur.delta(q, qa);
                REQUIRE(before.has_value());
                CHECK(*before == qd);
            }
        cur = next;
    }

    // prune all outgoing transitions: dead end gets flagged
    Dfts dead = t;
    while (!dead.successors(t.initial()).empty())
        dead = dead.prune_transition(t.initial(), dead.successors(t.initial()).front().first);
    auto dead_ends = dead.dead_end_states();
    CHECK(std::find(dead_ends.begin(), dead_ends.end(), t.initial()) != dead_ends.end());
    CHECK(t.dead_end_states().empty());
}

TEST_CASE("switch only while staying") {
    WorldFile wf = paper_world();
    Dfts t = build_dfts(open_world(3, 3), wf.catalog, {}, {{0, 0}, 0}, true);
    for (int s = 0; s < t.state_count(); ++s)
        for (const auto& [a, d] : t.successors(s)) {
            (void)d;
            const Action& act = t.actions()[a];
            if (act.switch_to >= 0) CHECK(act.move == Move::Stay);
        }
}

TEST_CASE("export is valid JSON with a consistent delta matrix") {
    WorldFile wf = paper_world();
    Dfts t = paper_dfts(wf);
    auto doc = nlohmann::json::parse(t.export_text(wf.catalog));
    CHECK(doc.at("states").size() == static_cast<std::size_t>(t.state_count()));
    CHECK(doc.at("initial").get<int>() == t.initial());
    const auto& matrix = doc.at("delta_matrix");
    for (const auto& triple : doc.at("transitions")) {
        int s = triple.at(0).get<int>(), a = triple.at(1).get<int>(), d = triple.at(2).get<int>();
        CHECK(matrix.at(s).at(a).get<int>() == d);
    }
}
