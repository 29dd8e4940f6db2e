#include "swarm/world.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace swarm {

namespace {
const std::set<std::string> kPrimaryLabels = {"freespace", "home", "goal", "obstacle"};
}

GridWorld::GridWorld(int rows, int cols, double cell_size, Vec2 origin,
                     std::vector<std::string> primary_labels,
                     std::map<Cell, std::set<std::string>> extras,
                     std::vector<ObstacleEllipse> obstacles, bool bounds)
    : rows_(rows),
      cols_(cols),
      cell_size_(cell_size),
      origin_(origin),
      primary_(std::move(primary_labels)),
      extras_(std::move(extras)),
      obstacles_(std::move(obstacles)),
      bounds_(bounds) {
    if (rows_ <= 0 || cols_ <= 0) throw std::invalid_argument("GridWorld: non-positive dimensions");
    if (cell_size_ <= 0.0) throw std::invalid_argument("GridWorld: non-positive cell size");
    if (primary_.size() != static_cast<std::size_t>(rows_ * cols_))
        throw std::invalid_argument("GridWorld: label array size mismatch");
    for (const auto& l : primary_)
        if (!kPrimaryLabels.count(l))
            throw std::invalid_argument("GridWorld: unknown primary label '" + l + "'");
    for (const auto& o : obstacles_)
        if (!o.p.positive_definite())
            throw std::invalid_argument("GridWorld: obstacle ellipse P not positive-definite");
    // Every obstacle-labeled cell must be seen by the continuous layer too: its
    // center must lie strictly inside at least one ellipse.
    for (int cy = 0; cy < rows_; ++cy)
        for (int cx = 0; cx < cols_; ++cx) {
            Cell c{cx, cy};
            if (!is_obstacle(c)) continue;
            Vec2 center = origin_ + Vec2{(cx + 0.5) * cell_size_, (cy + 0.5) * cell_size_};
            bool covered = false;
            for (const auto& o : obstacles_)
                if (h_obstacle(center, o.eta, o.p) > 0.0) covered = true;
            if (!covered)
                throw std::invalid_argument("GridWorld: obstacle cell (" + std::to_string(cx) + "," +
                                            std::to_string(cy) + ") not covered by any ellipse");
        }
}

std::vector<HalfPlane> GridWorld::bound_planes() const {
    if (!bounds_) return {};
    return {
        {0, +1.0, origin_.x},
        {0, -1.0, origin_.x + cols_ * cell_size_},
        {1, +1.0, origin_.y},
        {1, -1.0, origin_.y + rows_ * cell_size_},
    };
}

const std::string& GridWorld::primary_label(Cell c) const {
    if (!in_range(c)) throw std::out_of_range("GridWorld: cell out of range");
    return primary_[static_cast<std::size_t>(c.cy) * cols_ + c.cx];
}

Vec2 GridWorld::waypoint_of_cell(Cell c) const {
    if (!in_range(c)) throw std::out_of_range("waypoint_of_cell: cell out of range");
    if (is_obstacle(c)) throw std::invalid_argument("waypoint_of_cell: obstacle cell");
    return origin_ + Vec2{(c.cx + 0.5) * cell_size_, (c.cy + 0.5) * cell_size_};
}

Cell GridWorld::cell_of_point(const Vec2& p) const {
    const Vec2 rel = p - origin_;
    const double w = cols_ * cell_size_, h = rows_ * cell_size_;
    if (rel.x < 0.0 || rel.y < 0.0 || rel.x > w || rel.y > h)
        throw std::out_of_range("cell_of_point: point outside workspace");
    // Floor convention; the exact upper edge belongs to the last cell.
    int cx = std::min(static_cast<int>(std::floor(rel.x / cell_size_)), cols_ - 1);
    int cy = std::min(static_cast<int>(std::floor(rel.y / cell_size_)), rows_ - 1);
    return {cx, cy};
}

std::set<std::string> GridWorld::label_w(Cell c) const {
    std::set<std::string> out{primary_label(c)};
    auto it = extras_.find(c);
    if (it != extras_.end()) out.insert(it->second.begin(), it->second.end());
    return out;
}

std::set<std::string> GridWorld::workspace_atoms() const {
    std::set<std::string> out = kPrimaryLabels;
    for (const auto& [cell, labels] : extras_) out.insert(labels.begin(), labels.end());
    return out;
}

const Formation& find_formation(const FormationCatalog& catalog, const std::string& id) {
    for (const auto& f : catalog)
        if (f.id() == id) return f;
    throw std::invalid_argument("unknown formation id '" + id + "'");
}

std::set<std::string> label_f(const FormationCatalog& catalog, const std::string& id) {
    const Formation& f = find_formation(catalog, id);
    return {f.labels().begin(), f.labels().end()};
}

namespace {

using nlohmann::json;

Vec2 to_vec2(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>()}; }

Cell to_cell(const json& j) { return {j.at(0).get<int>(), j.at(1).get<int>()}; }

Mat2 to_mat2(const json& j) {
    Mat2 m;
    m.a11 = j.at(0).at(0).get<double>();
    m.a12 = j.at(0).at(1).get<double>();
    m.a22 = j.at(1).at(1).get<double>();
    double a21 = j.at(1).at(0).get<double>();
    if (std::abs(a21 - m.a12) > 1e-12) throw std::invalid_argument("world file: P not symmetric");
    return m;
}

}  // namespace

WorldFile parse_world_json(const std::string& text) {
    json doc = json::parse(text);
    WorldFile wf;

    const json& grid = doc.at("grid");
    int rows = grid.at("rows").get<int>();
    int cols = grid.at("cols").get<int>();
    double cell_size = grid.at("cell_size").get<double>();
    Vec2 origin = grid.contains("origin") ? to_vec2(grid.at("origin")) : Vec2{0.0, 0.0};

    std::vector<std::string> labels = doc.at("cells").get<std::vector<std::string>>();

    std::map<Cell, std::set<std::string>> extras;
    if (doc.contains("extra_labels"))
        for (const auto& item : doc.at("extra_labels")) {
            Cell c = to_cell(item.at("cell"));
            extras[c] = item.at("labels").get<std::set<std::string>>();
        }

    std::vector<ObstacleEllipse> obstacles;
    if (doc.contains("obstacles"))
        for (const auto& o : doc.at("obstacles"))
            obstacles.push_back({to_vec2(o.at("eta")), to_mat2(o.at("P"))});

    bool bounds = doc.value("bounds", true);
    wf.grid = GridWorld(rows, cols, cell_size, origin, std::move(labels), std::move(extras),
                        std::move(obstacles), bounds);

    for (const auto& fj : doc.at("formations")) {
        std::string id = fj.at("id").get<std::string>();
        std::vector<std::string> flabels;
        if (fj.contains("labels")) flabels = fj.at("labels").get<std::vector<std::string>>();
        std::map<std::pair<std::size_t, std::size_t>, Vec2> disp;
        std::size_t max_index = 0;
        for (const auto& dj : fj.at("displacements")) {
            std::size_t i = dj.at("i").get<std::size_t>();
            std::size_t j = dj.at("j").get<std::size_t>();
            if (i >= j) throw std::invalid_argument("world file: displacement pairs must have i < j");
            max_index = std::max(max_index, j);
            disp[{i, j}] = to_vec2(dj.at("d"));
        }
        wf.catalog.emplace_back(std::move(id), max_index + 1, std::move(disp), std::move(flabels));
    }
    if (wf.catalog.empty()) throw std::invalid_argument("world file: formation catalog is empty");
    for (const auto& f : wf.catalog)
        if (f.robots() != wf.catalog.front().robots())
            throw std::invalid_argument("world file: formations disagree on robot count");

    if (doc.contains("rules"))
        for (const auto& rj : doc.at("rules")) {
            FeasibilityRule rule;
            std::string kind = rj.at("kind").get<std::string>();
            if (kind == "forbid_formation_in_cell")
                rule.kind = FeasibilityRule::Kind::ForbidFormationInCell;
            else if (kind == "forbid_cell")
                rule.kind = FeasibilityRule::Kind::ForbidCell;
            else if (kind == "require_formation_for_move")
                rule.kind = FeasibilityRule::Kind::RequireFormationForMove;
            else
                throw std::invalid_argument("world file: unknown rule kind '" + kind + "'");
            rule.cell = to_cell(rj.at("cell"));
            if (!wf.grid.in_range(rule.cell)) throw std::invalid_argument("world file: rule cell out of range");
            if (rule.kind != FeasibilityRule::Kind::ForbidCell) {
                rule.formation = rj.at("formation").get<std::string>();
                find_formation(wf.catalog, rule.formation);  // existence check
            }
            if (rule.kind == FeasibilityRule::Kind::RequireFormationForMove)
                rule.direction = rj.at("direction").get<std::string>();
            wf.rules.push_back(std::move(rule));
        }

    const json& init = doc.at("initial");
    wf.initial_cell = to_cell(init.at("cell"));
    wf.initial_formation = init.at("formation").get<std::string>();
    find_formation(wf.catalog, wf.initial_formation);
    wf.switch_only_while_staying = doc.value("switch_only_while_staying", false);
    return wf;
}

WorldFile load_world_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open world file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_world_json(ss.str());
}

}  // namespace swarm
