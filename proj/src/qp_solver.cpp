#include <algorithm>
#include <cmath>
#include <limits>

#include "swarm/qp.hpp"

namespace swarm {

const char* qp_status_name(QpStatus s) {
    switch (s) {
        case QpStatus::Optimal: return "optimal";
        case QpStatus::Infeasible: return "infeasible";
        case QpStatus::IterationLimit: return "iteration_limit";
    }
    return "?";
}

namespace {

constexpr double kDependenceTol = 1e-11;
constexpr double kDualTol = 1e-12;

}  // namespace

// Dual active-set method after Goldfarb and Idnani. The objective is
// z^T H z + q^T z with H diagonal positive, so the Hessian is Ht = 2H and the
// unconstrained minimizer -q/(2H) is the starting iterate. Violated
// constraints are added one at a time; each addition moves (z, lambda) along
// the direction that keeps the active rows tight, dropping blocking active
// constraints on the way. When a violated row is linearly dependent on the
// active set and no active dual blocks, the dual is unbounded and the primal
// is infeasible; the dependence coefficients form a Farkas certificate.
QpSolution solve_qp(const QpProblem& problem, double feas_tol, int max_iter) {
    const int n = problem.dimension();
    const int m = static_cast<int>(problem.rows.size());
    if (max_iter <= 0) max_iter = 50 + 10 * (n + m);
    for (int k = 0; k < n; ++k)
        if (!(problem.h_diag(k) > 0.0))
            throw std::invalid_argument("solve_qp: H must be strictly positive");

    const Eigen::VectorXd ht_inv = (2.0 * problem.h_diag).cwiseInverse();

    QpSolution sol;
    sol.z = -0.5 * problem.q.cwiseProduct(problem.h_diag.cwiseInverse());

    std::vector<int> active;          // row indices, in addition order
    std::vector<double> lambda;       // matching duals, >= 0

    auto finish = [&](QpStatus status) {
        sol.status = status;
        sol.max_violation = problem.max_violation(sol.z);
        Eigen::VectorXd grad = 2.0 * problem.h_diag.cwiseProduct(sol.z) + problem.q;
        for (std::size_t k = 0; k < active.size(); ++k) grad += lambda[k] * problem.rows[active[k]].a;
        sol.stationarity_residual = grad.lpNorm<Eigen::Infinity>();
        return sol;
    };

    for (int iter = 0; iter < max_iter; ++iter) {
        sol.iterations = iter;

        // Most violated inactive row; first index wins ties for determinism.
        int p = -1;
        double worst = feas_tol;
        for (int k = 0; k < m; ++k) {
            if (std::find(active.begin(), active.end(), k) != active.end()) continue;
            double s = problem.rows[k].a.dot(sol.z) - problem.rows[k].b;
            if (s > worst) {
                worst = s;
                p = k;
            }
        }
        if (p < 0) return finish(QpStatus::Optimal);

        const Eigen::VectorXd& ap = problem.rows[p].a;
        double lambda_p = 0.0;

        while (true) {
            const int na = static_cast<int>(active.size());

            // Step directions: r for the active duals, d for the iterate.
            Eigen::VectorXd r(na), d;
            if (na > 0) {
                Eigen::MatrixXd nmat(n, na);
                for (int k = 0; k < na; ++k) nmat.col(k) = problem.rows[active[k]].a;
                Eigen::MatrixXd mmat = nmat.transpose() * ht_inv.asDiagonal() * nmat;
                r = mmat.ldlt().solve(nmat.transpose() * (ht_inv.asDiagonal() * ap));
                d = ht_inv.asDiagonal() * (ap - nmat * r);
            } else {
                d = ht_inv.asDiagonal() * ap;
            }
            const double d_ap = ap.dot(d);  // (ap - N r)^T Ht^{-1} (ap - N r) >= 0

            if (d_ap <= kDependenceTol) {
                // ap is in the span of the active normals. Either an active dual
                // blocks, or the problem is infeasible.
                int drop = -1;
                double t1 = std::numeric_limits<double>::infinity();
                for (int k = 0; k < na; ++k)
                    if (r(k) > kDualTol && lambda[k] / r(k) < t1) {
                        t1 = lambda[k] / r(k);
                        drop = k;
                    }
                if (drop < 0) {
                    Eigen::VectorXd cert = Eigen::VectorXd::Zero(m);
                    cert(p) = 1.0;
                    for (int k = 0; k < na; ++k) cert(active[k]) = std::max(0.0, -r(k));
                    sol.certificate = cert;
                    return finish(QpStatus::Infeasible);
                }
                for (int k = 0; k < na; ++k) lambda[k] -= t1 * r(k);
                lambda_p += t1;
                active.erase(active.begin() + drop);
                lambda.erase(lambda.begin() + drop);
                continue;
            }

            const double s_p = ap.dot(sol.z) - problem.rows[p].b;
            const double t2 = s_p / d_ap;
            int drop = -1;
            double t1 = std::numeric_limits<double>::infinity();
            for (int k = 0; k < na; ++k)
                if (r(k) > kDualTol && lambda[k] / r(k) < t1) {
                    t1 = lambda[k] / r(k);
                    drop = k;
                }
            const double t = std::min(t1, t2);

            sol.z -= t * d;
            for (int k = 0; k < na; ++k) lambda[k] -= t * r(k);
            lambda_p += t;

            if (t == t2) {
                active.push_back(p);
                lambda.push_back(lambda_p);
                break;
            }
            active.erase(active.begin() + drop);
            lambda.erase(lambda.begin() + drop);
        }
    }
    return finish(QpStatus::IterationLimit);
}

}  // namespace swarm
