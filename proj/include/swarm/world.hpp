#ifndef SWARM_WORLD_HPP
#define SWARM_WORLD_HPP

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "swarm/geometry.hpp"

namespace swarm {

struct Cell {
    int cx = 0;  // column, along +x
    int cy = 0;  // row, along +y

    auto operator<=>(const Cell&) const = default;
};

struct ObstacleEllipse {
    Vec2 eta;  // center
    Mat2 p;    // 1/m^2; x is inside iff (x-eta)^T P (x-eta) < 1
};

// Axis-aligned half-plane barrier b(x) = sign * (coord - offset) >= 0 when safe.
// Used for the workspace bounds, handled like obstacle constraints in the QP.
struct HalfPlane {
    int axis = 0;       // 0 = x, 1 = y
    double sign = 1.0;  // +1: coord >= offset safe; -1: coord <= offset safe
    double offset = 0.0;

    double barrier(const Vec2& v) const { return sign * ((axis == 0 ? v.x : v.y) - offset); }
    Vec2 gradient() const { return axis == 0 ? Vec2{sign, 0.0} : Vec2{0.0, sign}; }
};

// Truth assignment for the environment atoms (AP_e).
struct EnvValuation {
    std::map<std::string, bool> assignments;

    bool operator==(const EnvValuation& o) const { return assignments == o.assignments; }
};

inline std::set<std::string> label_e(const EnvValuation& v) {
    std::set<std::string> out;
    for (const auto& [name, value] : v.assignments)
        if (value) out.insert(name);
    return out;
}

class GridWorld {
public:
    GridWorld() = default;
    GridWorld(int rows, int cols, double cell_size, Vec2 origin,
              std::vector<std::string> primary_labels,           // row-major, index = cy*cols + cx
              std::map<Cell, std::set<std::string>> extras = {}, // optional extra labels per cell
              std::vector<ObstacleEllipse> obstacles = {}, bool bounds = true);

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    double cell_size() const { return cell_size_; }
    Vec2 origin() const { return origin_; }
    bool has_bounds() const { return bounds_; }
    const std::vector<ObstacleEllipse>& obstacles() const { return obstacles_; }
    std::vector<HalfPlane> bound_planes() const;

    bool in_range(Cell c) const { return c.cx >= 0 && c.cx < cols_ && c.cy >= 0 && c.cy < rows_; }
    const std::string& primary_label(Cell c) const;
    bool is_obstacle(Cell c) const { return primary_label(c) == "obstacle"; }

    Vec2 waypoint_of_cell(Cell c) const;
    Cell cell_of_point(const Vec2& p) const;

    std::set<std::string> label_w(Cell c) const;

    // Every workspace atom that can appear in a label set.
    std::set<std::string> workspace_atoms() const;

private:
    int rows_ = 0, cols_ = 0;
    double cell_size_ = 1.0;
    Vec2 origin_;
    std::vector<std::string> primary_;
    std::map<Cell, std::set<std::string>> extras_;
    std::vector<ObstacleEllipse> obstacles_;
    bool bounds_ = true;
};

using FormationCatalog = std::vector<Formation>;

const Formation& find_formation(const FormationCatalog& catalog, const std::string& id);

std::set<std::string> label_f(const FormationCatalog& catalog, const std::string& id);

// Abstraction feasibility rules, declared in the world file.
struct FeasibilityRule {
    enum class Kind { ForbidFormationInCell, ForbidCell, RequireFormationForMove };
    Kind kind;
    Cell cell;
    std::string formation;  // unused for ForbidCell
    std::string direction;  // RequireFormationForMove only: north/south/east/west
};

// Everything a world file declares.
struct WorldFile {
    GridWorld grid;
    FormationCatalog catalog;
    std::vector<FeasibilityRule> rules;
    Cell initial_cell;
    std::string initial_formation;
    bool switch_only_while_staying = false;
};

WorldFile load_world_file(const std::string& path);
WorldFile parse_world_json(const std::string& text);

}  // namespace swarm

#endif
