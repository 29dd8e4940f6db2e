#ifndef SWARM_QP_HPP
#define SWARM_QP_HPP

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "swarm/geometry.hpp"
#include "swarm/world.hpp"

namespace swarm {

// Fixed-time convergence parameters: alpha1 = alpha2 = mu*pi/(2*T_ud),
// gamma1 = 1 + 1/mu, gamma2 = 1 - 1/mu.
struct FxtParams {
    double mu;
    double t_ud;
    double alpha1;
    double alpha2;
    double gamma1;
    double gamma2;
};

FxtParams fxt_params(double mu, double t_ud);

// -alpha1*max(0,h)^gamma1 - alpha2*max(0,h)^gamma2: the slack-free right-hand
// side of the fixed-time CLF constraints. Zero for h <= 0.
double clf_rhs(double h, const FxtParams& p);

struct QpConfig {
    double d_g = 0.10;         // centroid tolerance [m]
    double d_f = 0.05;         // formation tolerance [m]
    double d_o = 0.30;         // minimum inter-robot distance [m]
    double u_max = 5.0;        // per-robot speed limit [m/s]
    double h_u = 1.0;          // objective weight on each input component
    double h_delta1 = 1.0;     // objective weight on delta1^2
    double h_delta2 = 1.0;     // objective weight on delta2^2
    double w_delta1 = 100.0;   // linear penalty on delta1
    double delta2_max = 10.0;  // upper bound on the CBF slack

    void validate() const;
};

struct ConstraintTag {
    enum class Kind { InputBound, ClfCentroid, ClfFormation, CbfSeparation, CbfObstacle, SlackBound };
    Kind kind;
    int i = -1;     // robot / pair-first / slack index
    int j = -1;     // pair-second / obstacle index
    int axis = -1;  // InputBound only
    int sign = 0;   // InputBound only: +1 or -1

    std::string describe() const;
};

// One control step of the program: minimize z^T H z + q^T z subject to
// a_k . z <= b_k, with z = [u_1x, u_1y, ..., u_rx, u_ry, delta1, delta2].
struct QpProblem {
    Eigen::VectorXd h_diag;  // strictly positive
    Eigen::VectorXd q;
    struct Row {
        Eigen::VectorXd a;
        double b;
        ConstraintTag tag;
    };
    std::vector<Row> rows;

    int dimension() const { return static_cast<int>(h_diag.size()); }
    double objective(const Eigen::VectorXd& z) const {
        return z.dot(h_diag.cwiseProduct(z)) + q.dot(z);
    }
    double max_violation(const Eigen::VectorXd& z) const;
};

enum class QpStatus { Optimal, Infeasible, IterationLimit };

const char* qp_status_name(QpStatus s);

struct QpSolution {
    Eigen::VectorXd z;
    QpStatus status = QpStatus::IterationLimit;
    double max_violation = 0.0;
    double stationarity_residual = 0.0;
    int iterations = 0;
    // Farkas-style infeasibility witness: y >= 0 over rows with sum y_k a_k = 0
    // and sum y_k b_k < 0. Only set when status == Infeasible.
    std::optional<Eigen::VectorXd> certificate;

    std::vector<Vec2> inputs(std::size_t robots) const;
    double delta1() const { return z(z.size() - 2); }
    double delta2() const { return z(z.size() - 1); }
};

// Assembles the control-step QP for reaching waypoint w in formation f:
// per-axis input bounds |u_ik| <= u_max/sqrt(2) (inscribed box of the speed
// ball), the centroid and formation fixed-time CLF rows sharing slack delta1,
// pairwise-separation and obstacle CBF rows sharing slack delta2 (ellipses
// first, then workspace bound half-planes when the world has bounds), and
// 0 <= delta2 <= delta2_max.
QpProblem build_qp(const SwarmState& state, const Vec2& w, const Formation& f,
                   const GridWorld& world, const QpConfig& cfg, const FxtParams& params);

// Dense dual active-set solve (Goldfarb-Idnani). Deterministic for identical
// inputs; status Optimal implies max_violation <= feas_tol and stationarity
// residual <= 1e-5.
QpSolution solve_qp(const QpProblem& problem, double feas_tol = 1e-6, int max_iter = 0);

std::string dump_qp(const QpProblem& problem);

}  // namespace swarm

#endif
