#ifndef SWARM_GEOMETRY_HPP
#define SWARM_GEOMETRY_HPP

#include <cmath>
#include <cstddef>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace swarm {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2() = default;
    Vec2(double x_, double y_) : x(x_), y(y_) {}

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator-() const { return {-x, -y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    Vec2& operator+=(const Vec2& o) {
        x += o.x;
        y += o.y;
        return *this;
    }
    bool operator==(const Vec2& o) const { return x == o.x && y == o.y; }

    double dot(const Vec2& o) const { return x * o.x + y * o.y; }
    double squared_norm() const { return x * x + y * y; }
    double norm() const { return std::sqrt(squared_norm()); }
    bool finite() const { return std::isfinite(x) && std::isfinite(y); }
};

inline Vec2 operator*(double s, const Vec2& v) { return v * s; }

// Symmetric positive-definite 2x2 matrix, as used by the obstacle ellipses.
struct Mat2 {
    double a11 = 1.0, a12 = 0.0, a22 = 1.0;  // [[a11 a12][a12 a22]]

    Vec2 apply(const Vec2& v) const { return {a11 * v.x + a12 * v.y, a12 * v.x + a22 * v.y}; }
    double quad(const Vec2& v) const { return v.dot(apply(v)); }
    bool positive_definite() const { return a11 > 0.0 && (a11 * a22 - a12 * a12) > 0.0; }
};

// Positions of all r robots. Fixed length for a run.
struct SwarmState {
    std::vector<Vec2> positions;

    SwarmState() = default;
    explicit SwarmState(std::vector<Vec2> p) : positions(std::move(p)) {
        if (positions.size() < 2) throw std::invalid_argument("SwarmState: need at least 2 robots");
        for (const auto& v : positions)
            if (!v.finite()) throw std::invalid_argument("SwarmState: non-finite position");
    }
    std::size_t size() const { return positions.size(); }
};

// Single-integrator velocity commands, one per robot.
struct ControlInput {
    std::vector<Vec2> inputs;

    std::size_t size() const { return inputs.size(); }
};

// A formation is the full set of desired pairwise displacements f_ij = x_i - x_j,
// stored for i < j only; the (j, i) value is the negation.
class Formation {
public:
    Formation() = default;
    Formation(std::string id, std::size_t r, std::map<std::pair<std::size_t, std::size_t>, Vec2> disp,
              std::vector<std::string> labels = {});

    const std::string& id() const { return id_; }
    std::size_t robots() const { return r_; }
    const std::vector<std::string>& labels() const { return labels_; }

    Vec2 displacement(std::size_t i, std::size_t j) const;

    // Offsets c_i from the formation centroid; placing robot i at w + c_i realizes
    // the formation with centroid exactly at w.
    std::vector<Vec2> centroid_offsets() const;

private:
    std::string id_;
    std::size_t r_ = 0;
    std::map<std::pair<std::size_t, std::size_t>, Vec2> disp_;  // keys i < j
    std::vector<std::string> labels_;
};

inline Vec2 centroid(const SwarmState& s) {
    Vec2 sum;
    for (const auto& p : s.positions) sum += p;
    return sum * (1.0 / static_cast<double>(s.size()));
}

inline Vec2 displacement(const SwarmState& s, std::size_t i, std::size_t j) {
    if (i >= s.size() || j >= s.size()) throw std::out_of_range("displacement: robot index out of range");
    if (i == j) throw std::invalid_argument("displacement: i == j");
    return s.positions[i] - s.positions[j];
}

// Goal-tracking function for the centroid: negative iff strictly inside the
// tolerance ball of radius d_G around w.
inline double h_waypoint(const Vec2& x_c, const Vec2& w, double d_g) {
    return (x_c - w).squared_norm() - d_g * d_g;
}

inline double h_formation(const Vec2& x_ij, const Vec2& f_ij, double d_f) {
    return (x_ij - f_ij).squared_norm() - d_f * d_f;
}

// Pair separation: non-negative iff the robots are at least d_O apart.
inline double h_separation(const Vec2& x_ij, double d_o) {
    return x_ij.squared_norm() - d_o * d_o;
}

// Ellipse membership: positive inside the ellipse (the obstacle), <= 0 outside
// or on the boundary. The safe set is {h_obstacle <= 0}; runtime monitors and
// the QP use the flipped barrier -h_obstacle so that safe <=> barrier >= 0.
inline double h_obstacle(const Vec2& x, const Vec2& eta, const Mat2& p) {
    if (!p.positive_definite()) throw std::invalid_argument("h_obstacle: P not positive-definite");
    return 1.0 - p.quad(x - eta);
}

inline Vec2 grad_h_waypoint(const Vec2& x_c, const Vec2& w) { return 2.0 * (x_c - w); }
inline Vec2 grad_h_formation(const Vec2& x_ij, const Vec2& f_ij) { return 2.0 * (x_ij - f_ij); }
inline Vec2 grad_h_separation(const Vec2& x_ij) { return 2.0 * x_ij; }
inline Vec2 grad_h_obstacle(const Vec2& x, const Vec2& eta, const Mat2& p) {
    return -2.0 * p.apply(x - eta);
}

}  // namespace swarm

#endif
