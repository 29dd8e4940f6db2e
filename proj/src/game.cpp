#include "swarm/game.hpp"

#include <deque>
#include <stdexcept>

namespace swarm {

GameStructure::GameStructure(Raw raw)
    : n_states_(raw.n_states),
      n_env_(std::size_t{1} << raw.env_vars.size()),
      n_positions_(static_cast<std::size_t>(raw.n_states) * (std::size_t{1} << raw.env_vars.size())),
      env_vars_(std::move(raw.env_vars)),
      sys_succ_(std::move(raw.sys_succ)),
      env_moves_(std::move(raw.env_moves)),
      safe_(std::move(raw.safe)),
      sys_justice_(std::move(raw.sys_justice)),
      env_justice_(std::move(raw.env_justice)),
      initial_positions_(std::move(raw.initial_positions)) {
    if (env_vars_.size() > kMaxEnvVars) throw std::invalid_argument("GameStructure: too many env vars");
    if (env_moves_.size() != n_positions_ || safe_.size() != n_positions_)
        throw std::invalid_argument("GameStructure: size mismatch");
    if (sys_justice_.empty()) sys_justice_.push_back(PositionSet::all(n_positions_));
    if (env_justice_.empty()) env_justice_.push_back(PositionSet::all(n_positions_));
}

GameStructure::GameStructure(const Dfts& dfts, const Gr1Spec& spec, const FormationCatalog& catalog) {
    if (spec.env_vars.size() > kMaxEnvVars)
        throw std::invalid_argument("GameStructure: at most 6 environment atoms supported");
    n_states_ = dfts.state_count();
    env_vars_ = spec.env_vars;
    n_env_ = std::size_t{1} << env_vars_.size();
    n_positions_ = static_cast<std::size_t>(n_states_) * n_env_;

    sys_succ_.resize(n_states_);
    for (int s = 0; s < n_states_; ++s) sys_succ_[s] = dfts.successors(s);

    // Valuation at a position: state labels plus the env bits. Atoms that are
    // neither labels here nor env vars still need a truth value for eval; any
    // declared system atom not in the label set is false.
    std::set<std::string> sys_atoms;
    for (int s = 0; s < n_states_; ++s)
        for (const auto& l : dfts.labels(s)) sys_atoms.insert(l);
    for (const auto& f : catalog)
        for (const auto& l : f.labels()) sys_atoms.insert(l);
    sys_atoms.insert({"freespace", "home", "goal", "obstacle"});
    spec.validate_atoms(sys_atoms);

    auto valuation_at = [&](int state, std::size_t env) {
        Valuation v;
        for (const auto& a : sys_atoms) v[a] = dfts.labels(state).count(a) > 0;
        for (std::size_t k = 0; k < env_vars_.size(); ++k) v[env_vars_[k]] = (env >> k) & 1;
        return v;
    };
    auto env_only = [&](std::size_t env) {
        Valuation v;
        for (std::size_t k = 0; k < env_vars_.size(); ++k) v[env_vars_[k]] = (env >> k) & 1;
        return v;
    };

    safe_ = PositionSet(n_positions_);
    for (std::size_t j = 0; j < spec.sys_justice.size(); ++j) sys_justice_.emplace_back(n_positions_);
    for (std::size_t i = 0; i < spec.env_justice.size(); ++i) env_justice_.emplace_back(n_positions_);
    env_moves_.assign(n_positions_, 0);

    for (int s = 0; s < n_states_; ++s) {
        for (std::size_t e = 0; e < n_env_; ++e) {
            const std::size_t pos = position(s, e);
            Valuation v = valuation_at(s, e);

            bool ok = true;
            for (const auto& f : spec.sys_safety)
                if (!f.eval(v)) ok = false;
            if (ok) safe_.set(pos);

            for (std::size_t j = 0; j < spec.sys_justice.size(); ++j)
                if (spec.sys_justice[j].eval(v)) sys_justice_[j].set(pos);
            for (std::size_t i = 0; i < spec.env_justice.size(); ++i)
                if (spec.env_justice[i].eval(v)) env_justice_[i].set(pos);

            std::uint64_t mask = 0;
            for (std::size_t e2 = 0; e2 < n_env_; ++e2) {
                Valuation nv = env_only(e2);
                bool allowed = true;
                for (const auto& f : spec.env_safety)
                    if (!f.eval(v, &nv)) allowed = false;
                if (allowed) mask |= std::uint64_t{1} << e2;
            }
            env_moves_[pos] = mask;
        }
    }

    for (std::size_t e = 0; e < n_env_; ++e) {
        Valuation v = valuation_at(dfts.initial(), e);
        if (spec.env_init.eval(v)) initial_positions_.push_back(position(dfts.initial(), e));
    }
}

EnvValuation GameStructure::env_valuation(std::size_t env_index) const {
    EnvValuation v;
    for (std::size_t k = 0; k < env_vars_.size(); ++k)
        v.assignments[env_vars_[k]] = (env_index >> k) & 1;
    return v;
}

std::size_t GameStructure::env_index(const EnvValuation& v) const {
    std::size_t idx = 0;
    for (std::size_t k = 0; k < env_vars_.size(); ++k) {
        auto it = v.assignments.find(env_vars_[k]);
        if (it == v.assignments.end())
            throw std::invalid_argument("env valuation missing atom '" + env_vars_[k] + "'");
        if (it->second) idx |= std::size_t{1} << k;
    }
    if (v.assignments.size() != env_vars_.size())
        throw std::invalid_argument("env valuation has extra atoms");
    return idx;
}

std::vector<std::size_t> GameStructure::blocked_positions() const {
    std::vector<std::size_t> blocked;
    PositionSet seen(n_positions_);
    std::deque<std::size_t> queue;
    for (auto p : initial_positions_)
        if (!seen.test(p)) {
            seen.set(p);
            queue.push_back(p);
        }
    while (!queue.empty()) {
        std::size_t p = queue.front();
        queue.pop_front();
        if (env_moves_[p] == 0) {
            blocked.push_back(p);
            continue;
        }
        for (std::size_t e2 = 0; e2 < n_env_; ++e2) {
            if (!((env_moves_[p] >> e2) & 1)) continue;
            for (const auto& [a, s2] : sys_succ_[state_of(p)]) {
                (void)a;
                std::size_t q = position(s2, e2);
                if (!seen.test(q)) {
                    seen.set(q);
                    queue.push_back(q);
                }
            }
        }
    }
    return blocked;
}

std::string GameStructure::describe_position(std::size_t pos, const Dfts* dfts,
                                             const FormationCatalog* catalog) const {
    std::string out = "position " + std::to_string(pos);
    if (dfts != nullptr && catalog != nullptr) {
        const DftsState& s = dfts->state(state_of(pos));
        out += " (cell " + std::to_string(s.cell.cx) + "," + std::to_string(s.cell.cy) +
               ", formation " + catalog->at(s.formation).id();
    } else {
        out += " (state " + std::to_string(state_of(pos));
    }
    std::size_t e = env_of(pos);
    for (std::size_t k = 0; k < env_vars_.size(); ++k)
        out += ", " + env_vars_[k] + "=" + (((e >> k) & 1) ? "true" : "false");
    out += ")";
    return out;
}

}  // namespace swarm
