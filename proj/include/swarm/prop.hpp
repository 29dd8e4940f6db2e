#ifndef SWARM_PROP_HPP
#define SWARM_PROP_HPP

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace swarm {

// Boolean valuation over atomic propositions. Atoms absent from the map are
// treated as undeclared (evaluation errors), not as false.
using Valuation = std::map<std::string, bool>;

struct ParseError : std::runtime_error {
    std::size_t position;
    ParseError(std::size_t pos, const std::string& msg)
        : std::runtime_error("parse error at position " + std::to_string(pos) + ": " + msg),
          position(pos) {}
};

// Propositional formula with a one-step next operator restricted to atoms:
//   f ::= true | false | atom | X(atom) | !f | f & f | f | f | f -> f
class Prop {
public:
    enum class Kind { True, False, Atom, Next, Not, And, Or, Implies };

    static Prop make_true() { return Prop(Kind::True); }
    static Prop make_false() { return Prop(Kind::False); }
    static Prop atom(std::string name);
    static Prop next(std::string atom_name);
    static Prop negate(Prop f);
    static Prop conj(Prop a, Prop b);
    static Prop disj(Prop a, Prop b);
    static Prop implies(Prop a, Prop b);

    Kind kind() const { return kind_; }
    const std::string& atom_name() const { return atom_; }  // Atom and Next nodes
    const Prop& child(std::size_t i) const { return kids_.at(i); }
    std::size_t arity() const { return kids_.size(); }

    bool operator==(const Prop& o) const;

    bool contains_next() const;
    void collect_atoms(std::set<std::string>& current, std::set<std::string>& next) const;

    // Standard evaluation; X(p) reads next_env. Throws on atoms missing from the
    // relevant valuation or on X without a next valuation.
    bool eval(const Valuation& current, const Valuation* next_env = nullptr) const;

    // Canonical printer; parse(print(f)) == f.
    std::string print() const;

private:
    explicit Prop(Kind k) : kind_(k) {}
    Kind kind_;
    std::string atom_;
    std::vector<Prop> kids_;

    void print_rec(std::string& out, int parent_prec) const;
};

// Grammar: atoms are identifiers; operators !, &, |, -> and X(...) for next;
// parentheses; precedence ! > & > | > ->; -> associates to the right.
Prop parse_prop(const std::string& text);

}  // namespace swarm

#endif
