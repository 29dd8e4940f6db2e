#include "swarm/plot.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace swarm {

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

}  // namespace

TrajectoryCsv parse_trajectory_csv(const std::string& text) {
    TrajectoryCsv out;
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) return out;
    auto header = split(line, ',');
    if (header.size() < 6 || (header.size() - 6) % 4 != 0)
        throw std::invalid_argument("trajectory CSV: malformed header");
    out.robots = (header.size() - 6) / 4;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto cols = split(line, ',');
        if (cols.size() != header.size()) throw std::invalid_argument("trajectory CSV: malformed row");
        out.t.push_back(std::stod(cols[0]));
        std::vector<Vec2> pos(out.robots);
        for (std::size_t i = 0; i < out.robots; ++i)
            pos[i] = {std::stod(cols[1 + 2 * i]), std::stod(cols[2 + 2 * i])};
        out.positions.push_back(std::move(pos));
        out.target_cell.push_back(cols[1 + 4 * out.robots]);
        out.formation_id.push_back(cols[2 + 4 * out.robots]);
    }
    return out;
}

std::string render_svg(const TrajectoryCsv& traj, const GridWorld& world) {
    const double scale = 100.0;  // px per meter
    const double margin = 20.0;
    const double ww = world.cols() * world.cell_size();
    const double wh = world.rows() * world.cell_size();
    const double width = ww * scale + 2 * margin;
    const double height = wh * scale + 2 * margin;

    auto sx = [&](double x) { return margin + (x - world.origin().x) * scale; };
    auto sy = [&](double y) { return margin + (wh - (y - world.origin().y)) * scale; };

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(width) + "\" height=\"" +
           fmt(height) + "\" viewBox=\"0 0 " + fmt(width) + " " + fmt(height) + "\">\n";

    for (int cy = 0; cy < world.rows(); ++cy)
        for (int cx = 0; cx < world.cols(); ++cx) {
            const std::string& label = world.primary_label({cx, cy});
            const char* fill = label == "home"       ? "#f2d34f"
                               : label == "goal"     ? "#6fa8dc"
                               : label == "obstacle" ? "#e06666"
                                                     : "#fbfbf8";
            Vec2 corner = world.origin() + Vec2{cx * world.cell_size(), (cy + 1) * world.cell_size()};
            svg += "  <rect class=\"cell " + label + "\" x=\"" + fmt(sx(corner.x)) + "\" y=\"" +
                   fmt(sy(corner.y)) + "\" width=\"" + fmt(world.cell_size() * scale) + "\" height=\"" +
                   fmt(world.cell_size() * scale) + "\" fill=\"" + fill +
                   "\" stroke=\"#999\" stroke-width=\"1\"/>\n";
        }

    for (const auto& o : world.obstacles()) {
        // Principal axes of P: the larger eigenvalue gives the short radius,
        // its eigenvector the direction that radius points in.
        const double tr = o.p.a11 + o.p.a22;
        const double det = o.p.a11 * o.p.a22 - o.p.a12 * o.p.a12;
        const double disc = std::sqrt(std::max(0.0, tr * tr / 4.0 - det));
        const double l1 = tr / 2.0 + disc, l2 = tr / 2.0 - disc;
        Vec2 v1 = std::abs(o.p.a12) > 1e-12 ? Vec2{o.p.a12, l1 - o.p.a11}
                  : o.p.a11 >= o.p.a22     ? Vec2{1.0, 0.0}
                                           : Vec2{0.0, 1.0};
        const double angle = std::atan2(v1.y, v1.x);
        // SVG's y axis points down, so world angles flip sign.
        svg += "  <ellipse class=\"obstacle-ellipse\" cx=\"0\" cy=\"0\" rx=\"" +
               fmt(scale / std::sqrt(l1)) + "\" ry=\"" + fmt(scale / std::sqrt(l2)) +
               "\" transform=\"translate(" + fmt(sx(o.eta.x)) + " " + fmt(sy(o.eta.y)) +
               ") rotate(" + fmt(-angle * 180.0 / M_PI) +
               ")\" fill=\"none\" stroke=\"#b00000\" stroke-width=\"2\" stroke-dasharray=\"6 3\"/>\n";
    }

    static const char* kColors[] = {"#1c6fb8", "#c27d0e", "#2e8b57", "#8e44ad", "#c0392b", "#16a085"};
    for (std::size_t i = 0; traj.positions.size() > 0 && i < traj.robots; ++i) {
        std::string points;
        for (std::size_t k = 0; k < traj.positions.size(); ++k) {
            if (k) points += " ";
            points += fmt(sx(traj.positions[k][i].x)) + "," + fmt(sy(traj.positions[k][i].y));
        }
        svg += "  <polyline class=\"traj\" points=\"" + points + "\" fill=\"none\" stroke=\"" +
               kColors[i % 6] + "\" stroke-width=\"2\"/>\n";
    }

    // Formation snapshots where the symbolic target changes, and at the end.
    for (std::size_t k = 0; k < traj.positions.size(); ++k) {
        const bool boundary = k == 0 || k + 1 == traj.positions.size() ||
                              traj.target_cell[k] != traj.target_cell[k - 1];
        if (!boundary) continue;
        std::string points;
        for (std::size_t i = 0; i < traj.robots; ++i) {
            if (i) points += " ";
            points += fmt(sx(traj.positions[k][i].x)) + "," + fmt(sy(traj.positions[k][i].y));
        }
        svg += "  <polygon class=\"formation\" points=\"" + points +
               "\" fill=\"none\" stroke=\"#555\" stroke-width=\"1\" stroke-dasharray=\"3 3\"/>\n";
    }

    svg += "</svg>\n";
    return svg;
}

}  // namespace swarm
