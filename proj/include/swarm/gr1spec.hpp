#ifndef SWARM_GR1SPEC_HPP
#define SWARM_GR1SPEC_HPP

#include <set>
#include <string>
#include <vector>

#include "swarm/prop.hpp"

namespace swarm {

// GR(1) specification psi = psi_e -> psi_s. Box is implicit on safety lines,
// box-diamond on justice lines. System transition structure comes from the
// DFTS, not from formulas; sys_safety constrains state labels only.
struct Gr1Spec {
    std::vector<std::string> env_vars;   // AP_e, declared order
    Prop env_init = Prop::make_true();
    std::vector<Prop> env_safety;        // over current atoms and X(env atom)
    std::vector<Prop> env_justice;       // position predicates; [true] if empty
    Prop sys_init = Prop::make_true();
    std::vector<Prop> sys_safety;        // position predicates
    std::vector<Prop> sys_justice;       // position predicates; [true] if empty

    // Checks that every referenced atom is declared: env atoms from env_vars,
    // system atoms from the given universe (workspace + formation labels).
    void validate_atoms(const std::set<std::string>& sys_atoms) const;
};

// Document format: sections ENV_VARS, ENV_INIT, ENV_SAFETY, ENV_JUSTICE,
// SYS_INIT, SYS_SAFETY, SYS_JUSTICE, one atom/formula per line; '#' comments.
Gr1Spec parse_gr1(const std::string& document);
Gr1Spec load_gr1_file(const std::string& path);

}  // namespace swarm

#endif
