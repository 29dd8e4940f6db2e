#ifndef SWARM_GAME_HPP
#define SWARM_GAME_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "swarm/bitset.hpp"
#include "swarm/dfts.hpp"
#include "swarm/gr1spec.hpp"

namespace swarm {

// Two-player game over positions (dfts state, env valuation). The environment
// reveals its next valuation first; the system responds with an action within
// the same symbolic step.
//
// Positions are indexed densely as state * env_count + env. Env valuations are
// indexed by the bitmask of true atoms (bit k = env_vars[k]), so at most 6
// environment atoms are supported; that keeps env-move sets in one word.
class GameStructure {
public:
    static constexpr std::size_t kMaxEnvVars = 6;

    GameStructure() = default;
    GameStructure(const Dfts& dfts, const Gr1Spec& spec, const FormationCatalog& catalog);

    // Direct construction for tests and synthetic games.
    struct Raw {
        int n_states = 0;
        std::vector<std::string> env_vars;
        std::vector<std::vector<std::pair<int, int>>> sys_succ;  // per state: (action, succ)
        std::vector<std::uint64_t> env_moves;                    // per position: bitmask of allowed next env
        PositionSet safe;
        std::vector<PositionSet> sys_justice;
        std::vector<PositionSet> env_justice;
        std::vector<std::size_t> initial_positions;
    };
    explicit GameStructure(Raw raw);

    std::size_t position_count() const { return n_positions_; }
    int state_count() const { return n_states_; }
    std::size_t env_count() const { return n_env_; }
    const std::vector<std::string>& env_vars() const { return env_vars_; }

    std::size_t position(int state, std::size_t env) const { return static_cast<std::size_t>(state) * n_env_ + env; }
    int state_of(std::size_t pos) const { return static_cast<int>(pos / n_env_); }
    std::size_t env_of(std::size_t pos) const { return pos % n_env_; }

    std::uint64_t env_moves(std::size_t pos) const { return env_moves_[pos]; }
    const std::vector<std::pair<int, int>>& sys_succ(int state) const { return sys_succ_[state]; }

    bool safe(std::size_t pos) const { return safe_.test(pos); }
    const PositionSet& safe_set() const { return safe_; }
    const std::vector<PositionSet>& sys_justice() const { return sys_justice_; }
    const std::vector<PositionSet>& env_justice() const { return env_justice_; }
    const std::vector<std::size_t>& initial_positions() const { return initial_positions_; }

    EnvValuation env_valuation(std::size_t env_index) const;
    std::size_t env_index(const EnvValuation& v) const;

    // Positions reachable from the initial set whose env-move set is empty;
    // a non-empty result means the assumptions can deadlock there.
    std::vector<std::size_t> blocked_positions() const;

    std::string describe_position(std::size_t pos, const Dfts* dfts, const FormationCatalog* catalog) const;

private:
    int n_states_ = 0;
    std::size_t n_env_ = 1;
    std::size_t n_positions_ = 0;
    std::vector<std::string> env_vars_;
    std::vector<std::vector<std::pair<int, int>>> sys_succ_;
    std::vector<std::uint64_t> env_moves_;
    PositionSet safe_;
    std::vector<PositionSet> sys_justice_;
    std::vector<PositionSet> env_justice_;
    std::vector<std::size_t> initial_positions_;
};

}  // namespace swarm

#endif
