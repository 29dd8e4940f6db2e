#ifndef SWARM_PLOT_HPP
#define SWARM_PLOT_HPP

#include <string>
#include <vector>

#include "swarm/world.hpp"

namespace swarm {

struct TrajectoryCsv {
    std::size_t robots = 0;
    std::vector<double> t;
    std::vector<std::vector<Vec2>> positions;  // [sample][robot]
    std::vector<std::string> target_cell;
    std::vector<std::string> formation_id;
};

TrajectoryCsv parse_trajectory_csv(const std::string& text);

// Planar view: grid cells colored by primary label, obstacle ellipses, one
// trajectory polyline per robot, and dotted formation polygons at the symbolic
// step boundaries. Byte-deterministic for identical inputs.
std::string render_svg(const TrajectoryCsv& traj, const GridWorld& world);

}  // namespace swarm

#endif
