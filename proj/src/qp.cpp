#include "swarm/qp.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace swarm {

FxtParams fxt_params(double mu, double t_ud) {
    if (mu <= 1.0) throw std::invalid_argument("fxt_params: mu must be > 1");
    if (t_ud <= 0.0) throw std::invalid_argument("fxt_params: T_ud must be > 0");
    FxtParams p;
    p.mu = mu;
    p.t_ud = t_ud;
    p.alpha1 = p.alpha2 = mu * M_PI / (2.0 * t_ud);
    p.gamma1 = 1.0 + 1.0 / mu;
    p.gamma2 = 1.0 - 1.0 / mu;
    return p;
}

double clf_rhs(double h, const FxtParams& p) {
    if (h <= 0.0) return 0.0;
    return -p.alpha1 * std::pow(h, p.gamma1) - p.alpha2 * std::pow(h, p.gamma2);
}

void QpConfig::validate() const {
    if (d_g <= 0 || d_f <= 0 || d_o <= 0 || u_max <= 0 || h_u <= 0 || h_delta1 <= 0 ||
        h_delta2 <= 0 || w_delta1 <= 0 || delta2_max <= 0)
        throw std::invalid_argument("QpConfig: all parameters must be positive");
}

std::string ConstraintTag::describe() const {
    switch (kind) {
        case Kind::InputBound:
            return "input-bound(robot " + std::to_string(i) + ", axis " + std::to_string(axis) +
                   (sign > 0 ? ", +)" : ", -)");
        case Kind::ClfCentroid: return "clf-centroid";
        case Kind::ClfFormation: return "clf-formation(" + std::to_string(i) + "," + std::to_string(j) + ")";
        case Kind::CbfSeparation: return "cbf-separation(" + std::to_string(i) + "," + std::to_string(j) + ")";
        case Kind::CbfObstacle: return "cbf-obstacle(" + std::to_string(i) + "," + std::to_string(j) + ")";
        case Kind::SlackBound: return i == 0 ? "slack-bound(delta2 >= 0)" : "slack-bound(delta2 <= max)";
    }
    return "?";
}

double QpProblem::max_violation(const Eigen::VectorXd& z) const {
    double v = 0.0;
    for (const auto& row : rows) v = std::max(v, row.a.dot(z) - row.b);
    return v;
}

std::vector<Vec2> QpSolution::inputs(std::size_t robots) const {
    std::vector<Vec2> u(robots);
    for (std::size_t i = 0; i < robots; ++i) u[i] = {z(2 * i), z(2 * i + 1)};
    return u;
}

QpProblem build_qp(const SwarmState& state, const Vec2& w, const Formation& f,
                   const GridWorld& world, const QpConfig& cfg, const FxtParams& params) {
    cfg.validate();
    const std::size_t r = state.size();
    if (f.robots() != r) throw std::invalid_argument("build_qp: formation robot count mismatch");
    const int dim = static_cast<int>(2 * r + 2);
    const int i_d1 = dim - 2, i_d2 = dim - 1;

    QpProblem qp;
    qp.h_diag = Eigen::VectorXd::Constant(dim, cfg.h_u);
    qp.h_diag(i_d1) = cfg.h_delta1;
    qp.h_diag(i_d2) = cfg.h_delta2;
    qp.q = Eigen::VectorXd::Zero(dim);
    qp.q(i_d1) = cfg.w_delta1;

    auto zero_row = [dim]() { return Eigen::VectorXd::Zero(dim); };

    // (3b) per-axis input bounds, the inscribed box of the Euclidean ball.
    const double box = cfg.u_max / std::sqrt(2.0);
    for (std::size_t i = 0; i < r; ++i)
        for (int axis = 0; axis < 2; ++axis)
            for (int sign : {+1, -1}) {
                Eigen::VectorXd a = zero_row();
                a(2 * i + axis) = sign;
                qp.rows.push_back({a, box,
                                   {ConstraintTag::Kind::InputBound, static_cast<int>(i), -1, axis, sign}});
            }

    // (3c) centroid CLF; u_c = (1/r) sum u_i.
    const Vec2 x_c = centroid(state);
    const double h_w = h_waypoint(x_c, w, cfg.d_g);
    {
        const Vec2 g = grad_h_waypoint(x_c, w);
        Eigen::VectorXd a = zero_row();
        for (std::size_t i = 0; i < r; ++i) {
            a(2 * i) = g.x / static_cast<double>(r);
            a(2 * i + 1) = g.y / static_cast<double>(r);
        }
        a(i_d1) = -h_w;
        qp.rows.push_back({a, clf_rhs(h_w, params), {ConstraintTag::Kind::ClfCentroid}});
    }

    // (3d) formation CLF, one row per pair, sharing delta1.
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = i + 1; j < r; ++j) {
            const Vec2 x_ij = displacement(state, i, j);
            const Vec2 f_ij = f.displacement(i, j);
            const double h_f = h_formation(x_ij, f_ij, cfg.d_f);
            const Vec2 g = grad_h_formation(x_ij, f_ij);
            Eigen::VectorXd a = zero_row();
            a(2 * i) = g.x;
            a(2 * i + 1) = g.y;
            a(2 * j) = -g.x;
            a(2 * j + 1) = -g.y;
            a(i_d1) = -h_f;
            qp.rows.push_back({a, clf_rhs(h_f, params),
                               {ConstraintTag::Kind::ClfFormation, static_cast<int>(i), static_cast<int>(j)}});
        }

    // (3e) separation CBF: grad . (u_i - u_j) >= -delta2 h_D, negated into <=.
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = i + 1; j < r; ++j) {
            const Vec2 x_ij = displacement(state, i, j);
            const double h_d = h_separation(x_ij, cfg.d_o);
            const Vec2 g = grad_h_separation(x_ij);
            Eigen::VectorXd a = zero_row();
            a(2 * i) = -g.x;
            a(2 * i + 1) = -g.y;
            a(2 * j) = g.x;
            a(2 * j + 1) = g.y;
            a(i_d2) = -h_d;
            qp.rows.push_back({a, 0.0,
                               {ConstraintTag::Kind::CbfSeparation, static_cast<int>(i), static_cast<int>(j)}});
        }

    // (3f) obstacle CBF on the flipped barrier b = -h_O, ellipses then bounds.
    const auto planes = world.bound_planes();
    const std::size_t n_obs = world.obstacles().size() + planes.size();
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t k = 0; k < n_obs; ++k) {
            double barrier;
            Vec2 g;
            if (k < world.obstacles().size()) {
                const auto& o = world.obstacles()[k];
                barrier = -h_obstacle(state.positions[i], o.eta, o.p);
                g = -grad_h_obstacle(state.positions[i], o.eta, o.p);
            } else {
                const auto& pl = planes[k - world.obstacles().size()];
                barrier = pl.barrier(state.positions[i]);
                g = pl.gradient();
            }
            Eigen::VectorXd a = zero_row();
            a(2 * i) = -g.x;
            a(2 * i + 1) = -g.y;
            a(i_d2) = -barrier;
            qp.rows.push_back({a, 0.0,
                               {ConstraintTag::Kind::CbfObstacle, static_cast<int>(i), static_cast<int>(k)}});
        }

    // Slack bounds: 0 <= delta2 <= delta2_max; delta1 stays free.
    {
        Eigen::VectorXd a = zero_row();
        a(i_d2) = -1.0;
        qp.rows.push_back({a, 0.0, {ConstraintTag::Kind::SlackBound, 0}});
        Eigen::VectorXd a2 = zero_row();
        a2(i_d2) = 1.0;
        qp.rows.push_back({a2, cfg.delta2_max, {ConstraintTag::Kind::SlackBound, 1}});
    }

    return qp;
}

std::string dump_qp(const QpProblem& problem) {
    nlohmann::json doc;
    doc["dimension"] = problem.dimension();
    doc["H_diag"] = std::vector<double>(problem.h_diag.data(), problem.h_diag.data() + problem.h_diag.size());
    doc["q"] = std::vector<double>(problem.q.data(), problem.q.data() + problem.q.size());
    doc["rows"] = nlohmann::json::array();
    for (const auto& row : problem.rows)
        doc["rows"].push_back({{"a", std::vector<double>(row.a.data(), row.a.data() + row.a.size())},
                               {"b", row.b},
                               {"tag", row.tag.describe()}});
    return doc.dump(2) + "\n";
}

}  // namespace swarm
