#ifndef SWARM_TESTS_HELPERS_HPP
#define SWARM_TESTS_HELPERS_HPP

// Test-only oracles, independent of the implementation paths they check.

#include <Eigen/Dense>
#include <deque>
#include <functional>
#include <optional>
#include <random>
#include <vector>

#include "swarm/game.hpp"
#include "swarm/qp.hpp"

namespace swarm::testing {

// Central finite differences of a scalar field on the plane.
inline Vec2 central_difference(const std::function<double(const Vec2&)>& f, const Vec2& x,
                               double step) {
    return {(f({x.x + step, x.y}) - f({x.x - step, x.y})) / (2.0 * step),
            (f({x.x, x.y + step}) - f({x.x, x.y - step})) / (2.0 * step)};
}

// Brute-force QP oracle: enumerate every active set of size <= dim with
// linearly independent rows, solve the equality-constrained system, and keep
// the best candidate that is feasible for the full problem. The optimum of a
// strictly convex QP is the equality-solution of its (reduced) active set, so
// the enumeration finds it whenever the problem is feasible.
struct OracleResult {
    bool feasible = false;
    double objective = 0.0;
    Eigen::VectorXd z;
};

inline OracleResult qp_enumeration_oracle(const QpProblem& qp, double feas_tol = 1e-7) {
    const int n = qp.dimension();
    const int m = static_cast<int>(qp.rows.size());
    OracleResult best;

    auto consider = [&](const Eigen::VectorXd& z) {
        if (qp.max_violation(z) > feas_tol) return;
        const double obj = qp.objective(z);
        if (!best.feasible || obj < best.objective) {
            best.feasible = true;
            best.objective = obj;
            best.z = z;
        }
    };

    std::vector<int> subset;
    std::function<void(int)> recurse = [&](int start) {
        if (!subset.empty()) {
            const int k = static_cast<int>(subset.size());
            Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(n + k, n + k);
            Eigen::VectorXd rhs(n + k);
            for (int i = 0; i < n; ++i) {
                kkt(i, i) = 2.0 * qp.h_diag(i);
                rhs(i) = -qp.q(i);
            }
            for (int c = 0; c < k; ++c) {
                kkt.block(0, n + c, n, 1) = qp.rows[subset[c]].a;
                kkt.block(n + c, 0, 1, n) = qp.rows[subset[c]].a.transpose();
                rhs(n + c) = qp.rows[subset[c]].b;
            }
            Eigen::FullPivLU<Eigen::MatrixXd> lu(kkt);
            if (lu.isInvertible()) consider(lu.solve(rhs).head(n));
        } else {
            consider(-0.5 * qp.q.cwiseQuotient(qp.h_diag));
        }
        if (static_cast<int>(subset.size()) == std::min(n, m)) return;
        for (int next = start; next < m; ++next) {
            subset.push_back(next);
            recurse(next + 1);
            subset.pop_back();
        }
    };
    recurse(0);
    return best;
}

// Random feasible QP: constraints are anchored at a known interior point.
inline QpProblem random_feasible_qp(std::mt19937_64& rng, int max_dim = 10, int extra_rows = 8) {
    std::uniform_int_distribution<int> dim_dist(1, max_dim);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    std::uniform_real_distribution<double> pos(0.2, 2.0);

    QpProblem qp;
    const int n = dim_dist(rng);
    std::uniform_int_distribution<int> row_dist(1, n + extra_rows);
    const int m = row_dist(rng);
    qp.h_diag.resize(n);
    qp.q.resize(n);
    for (int i = 0; i < n; ++i) {
        qp.h_diag(i) = pos(rng);
        qp.q(i) = 2.0 * unit(rng);
    }
    Eigen::VectorXd z0(n);
    for (int i = 0; i < n; ++i) z0(i) = unit(rng);
    for (int k = 0; k < m; ++k) {
        Eigen::VectorXd a(n);
        for (int i = 0; i < n; ++i) a(i) = unit(rng);
        if (a.norm() < 1e-3) a(0) = 1.0;
        const double slack = 0.05 + std::abs(unit(rng));
        qp.rows.push_back({a, a.dot(z0) + slack, {ConstraintTag::Kind::SlackBound}});
    }
    return qp;
}

// Random infeasible QP: a contradictory pair a.z <= b, -a.z <= -b - gap plus noise rows.
inline QpProblem random_infeasible_qp(std::mt19937_64& rng, int max_dim = 10) {
    QpProblem qp = random_feasible_qp(rng, max_dim, 4);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    const int n = qp.dimension();
    Eigen::VectorXd a(n);
    for (int i = 0; i < n; ++i) a(i) = unit(rng);
    if (a.norm() < 1e-3) a(0) = 1.0;
    const double b = unit(rng);
    const double gap = 0.1 + std::abs(unit(rng));
    qp.rows.push_back({a, b, {ConstraintTag::Kind::SlackBound}});
    qp.rows.push_back({-a, -b - gap, {ConstraintTag::Kind::SlackBound}});
    return qp;
}

// Random small game for oracle comparisons. Every position keeps a non-empty
// env-move set and every state at least one successor.
inline GameStructure random_game(std::mt19937_64& rng, int max_states, int env_bits, int n_goals) {
    std::uniform_int_distribution<int> state_dist(2, max_states);
    const int n_states = state_dist(rng);
    const std::size_t n_env = std::size_t{1} << env_bits;
    const std::size_t n_pos = static_cast<std::size_t>(n_states) * n_env;

    GameStructure::Raw raw;
    raw.n_states = n_states;
    for (int b = 0; b < env_bits; ++b) raw.env_vars.push_back("e" + std::to_string(b));

    std::uniform_int_distribution<int> succ_count(1, 3);
    std::uniform_int_distribution<int> state_pick(0, n_states - 1);
    raw.sys_succ.resize(n_states);
    for (int s = 0; s < n_states; ++s) {
        const int k = succ_count(rng);
        for (int a = 0; a < k; ++a) raw.sys_succ[s].emplace_back(a, state_pick(rng));
    }

    std::uniform_int_distribution<std::uint64_t> mask_dist(1, (std::uint64_t{1} << n_env) - 1);
    raw.env_moves.resize(n_pos);
    for (std::size_t p = 0; p < n_pos; ++p) raw.env_moves[p] = mask_dist(rng);

    raw.safe = PositionSet::all(n_pos);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int g = 0; g < n_goals; ++g) {
        PositionSet goal(n_pos);
        bool any = false;
        for (std::size_t p = 0; p < n_pos; ++p)
            if (unit(rng) < 0.3) {
                goal.set(p);
                any = true;
            }
        if (!any) goal.set(rng() % n_pos);
        raw.sys_justice.push_back(std::move(goal));
    }
    raw.initial_positions.push_back(rng() % n_pos);
    return GameStructure(std::move(raw));
}

// Backward induction on the doubled (turn-based) game for the single-goal,
// trivial-env-justice case: alternating attractor iterations on explicit env
// and system nodes. Positions with empty env moves are losing for the system,
// matching the cpre convention.
inline PositionSet buchi_backward_induction(const GameStructure& game, const PositionSet& goal) {
    const std::size_t n = game.position_count();

    // reach[p] via: env node p -> sys nodes (p, e'); sys node -> positions.
    auto attractor = [&](const PositionSet& target, const PositionSet& domain) {
        PositionSet reach(n);
        while (true) {
            bool changed = false;
            for (std::size_t p = 0; p < n; ++p) {
                if (reach.test(p) || !domain.test(p)) continue;
                if (target.test(p)) {
                    reach.set(p);
                    changed = true;
                    continue;
                }
                const std::uint64_t moves = game.env_moves(p);
                if (moves == 0) continue;
                bool all_env = true;
                for (std::size_t e2 = 0; e2 < game.env_count() && all_env; ++e2) {
                    if (!((moves >> e2) & 1)) continue;
                    bool sys_can = false;
                    for (const auto& [a, s2] : game.sys_succ(game.state_of(p))) {
                        (void)a;
                        const std::size_t q = game.position(s2, e2);
                        if (domain.test(q) && reach.test(q)) {
                            sys_can = true;
                            break;
                        }
                    }
                    all_env = sys_can;
                }
                if (all_env) {
                    reach.set(p);
                    changed = true;
                }
            }
            if (!changed) break;
        }
        return reach;
    };

    PositionSet domain = game.safe_set();
    while (true) {
        // Positions that are goals and can force one more step inside the domain.
        PositionSet recurrent(n);
        for (std::size_t p = 0; p < n; ++p) {
            if (!domain.test(p) || !goal.test(p)) continue;
            const std::uint64_t moves = game.env_moves(p);
            if (moves == 0) continue;
            bool all_env = true;
            for (std::size_t e2 = 0; e2 < game.env_count() && all_env; ++e2) {
                if (!((moves >> e2) & 1)) continue;
                bool sys_can = false;
                for (const auto& [a, s2] : game.sys_succ(game.state_of(p))) {
                    (void)a;
                    if (domain.test(game.position(s2, e2))) {
                        sys_can = true;
                        break;
                    }
                }
                all_env = sys_can;
            }
            if (all_env) recurrent.set(p);
        }
        PositionSet next = attractor(recurrent, domain);
        if (next == domain) return domain;
        domain = std::move(next);
    }
}

}  // namespace swarm::testing

#endif
