#include "swarm/prop.hpp"

#include <cctype>

namespace swarm {

Prop Prop::atom(std::string name) {
    Prop p(Kind::Atom);
    p.atom_ = std::move(name);
    return p;
}

Prop Prop::next(std::string atom_name) {
    Prop p(Kind::Next);
    p.atom_ = std::move(atom_name);
    return p;
}

Prop Prop::negate(Prop f) {
    Prop p(Kind::Not);
    p.kids_.push_back(std::move(f));
    return p;
}

Prop Prop::conj(Prop a, Prop b) {
    Prop p(Kind::And);
    p.kids_.push_back(std::move(a));
    p.kids_.push_back(std::move(b));
    return p;
}

Prop Prop::disj(Prop a, Prop b) {
    Prop p(Kind::Or);
    p.kids_.push_back(std::move(a));
    p.kids_.push_back(std::move(b));
    return p;
}

Prop Prop::implies(Prop a, Prop b) {
    Prop p(Kind::Implies);
    p.kids_.push_back(std::move(a));
    p.kids_.push_back(std::move(b));
    return p;
}

bool Prop::operator==(const Prop& o) const {
    if (kind_ != o.kind_ || atom_ != o.atom_ || kids_.size() != o.kids_.size()) return false;
    for (std::size_t i = 0; i < kids_.size(); ++i)
        if (!(kids_[i] == o.kids_[i])) return false;
    return true;
}

bool Prop::contains_next() const {
    if (kind_ == Kind::Next) return true;
    for (const auto& k : kids_)
        if (k.contains_next()) return true;
    return false;
}

void Prop::collect_atoms(std::set<std::string>& current, std::set<std::string>& next) const {
    switch (kind_) {
        case Kind::Atom: current.insert(atom_); break;
        case Kind::Next: next.insert(atom_); break;
        default:
            for (const auto& k : kids_) k.collect_atoms(current, next);
    }
}

bool Prop::eval(const Valuation& current, const Valuation* next_env) const {
    switch (kind_) {
        case Kind::True: return true;
        case Kind::False: return false;
        case Kind::Atom: {
            auto it = current.find(atom_);
            if (it == current.end()) throw std::invalid_argument("eval: atom '" + atom_ + "' missing from valuation");
            return it->second;
        }
        case Kind::Next: {
            if (next_env == nullptr) throw std::invalid_argument("eval: X(" + atom_ + ") but no next valuation");
            auto it = next_env->find(atom_);
            if (it == next_env->end())
                throw std::invalid_argument("eval: atom '" + atom_ + "' missing from next valuation");
            return it->second;
        }
        case Kind::Not: return !kids_[0].eval(current, next_env);
        case Kind::And: return kids_[0].eval(current, next_env) && kids_[1].eval(current, next_env);
        case Kind::Or: return kids_[0].eval(current, next_env) || kids_[1].eval(current, next_env);
        case Kind::Implies: return !kids_[0].eval(current, next_env) || kids_[1].eval(current, next_env);
    }
    throw std::logic_error("eval: bad node");
}

namespace {
// Precedence levels used by both printer and parser: -> 1, | 2, & 3, ! 4.
constexpr int kPrecImplies = 1;
constexpr int kPrecOr = 2;
constexpr int kPrecAnd = 3;
constexpr int kPrecNot = 4;
}  // namespace

void Prop::print_rec(std::string& out, int parent_prec) const {
    switch (kind_) {
        case Kind::True: out += "true"; return;
        case Kind::False: out += "false"; return;
        case Kind::Atom: out += atom_; return;
        case Kind::Next:
            out += "X(";
            out += atom_;
            out += ")";
            return;
        case Kind::Not:
            out += "!";
            kids_[0].print_rec(out, kPrecNot);
            return;
        case Kind::And:
        case Kind::Or:
        case Kind::Implies: {
            int prec = kind_ == Kind::And ? kPrecAnd : kind_ == Kind::Or ? kPrecOr : kPrecImplies;
            bool paren = prec < parent_prec;
            if (paren) out += "(";
            // -> is right-associative, & and | associate to the left; print the
            // left child at prec+1 for ->, the right child at prec+1 otherwise.
            const char* op = kind_ == Kind::And ? " & " : kind_ == Kind::Or ? " | " : " -> ";
            kids_[0].print_rec(out, kind_ == Kind::Implies ? prec + 1 : prec);
            out += op;
            kids_[1].print_rec(out, kind_ == Kind::Implies ? prec : prec + 1);
            if (paren) out += ")";
            return;
        }
    }
}

std::string Prop::print() const {
    std::string out;
    print_rec(out, 0);
    return out;
}

namespace {

class Parser {
public:
    explicit Parser(const std::string& text) : text_(text) {}

    Prop parse() {
        Prop f = parse_implies();
        skip_ws();
        if (pos_ != text_.size()) throw ParseError(pos_, "unexpected trailing input");
        return f;
    }

private:
    const std::string& text_;
    std::size_t pos_ = 0;

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    bool try_consume(const char* tok) {
        skip_ws();
        std::size_t len = std::char_traits<char>::length(tok);
        if (text_.compare(pos_, len, tok) == 0) {
            pos_ += len;
            return true;
        }
        return false;
    }

    char peek() {
        skip_ws();
        return pos_ < text_.size() ? text_[pos_] : '\0';
    }

    Prop parse_implies() {
        Prop lhs = parse_or();
        if (try_consume("->")) return Prop::implies(std::move(lhs), parse_implies());
        return lhs;
    }

    Prop parse_or() {
        Prop lhs = parse_and();
        while (true) {
            skip_ws();
            // careful: "->"'s '-' can't be confused with '|', but '|' alone is ours
            if (pos_ < text_.size() && text_[pos_] == '|') {
                ++pos_;
                lhs = Prop::disj(std::move(lhs), parse_and());
            } else {
                return lhs;
            }
        }
    }

    Prop parse_and() {
        Prop lhs = parse_unary();
        while (try_consume("&")) lhs = Prop::conj(std::move(lhs), parse_unary());
        return lhs;
    }

    Prop parse_unary() {
        if (try_consume("!")) return Prop::negate(parse_unary());
        return parse_primary();
    }

    Prop parse_primary() {
        skip_ws();
        if (pos_ >= text_.size()) throw ParseError(pos_, "unexpected end of formula");
        if (text_[pos_] == '(') {
            ++pos_;
            Prop f = parse_implies();
            skip_ws();
            if (pos_ >= text_.size() || text_[pos_] != ')') throw ParseError(pos_, "expected ')'");
            ++pos_;
            return f;
        }
        std::string ident = parse_ident();
        if (ident == "true") return Prop::make_true();
        if (ident == "false") return Prop::make_false();
        if (ident == "X") {
            skip_ws();
            if (pos_ >= text_.size() || text_[pos_] != '(') throw ParseError(pos_, "expected '(' after X");
            ++pos_;
            skip_ws();
            std::string name = parse_ident();
            skip_ws();
            if (pos_ >= text_.size() || text_[pos_] != ')')
                throw ParseError(pos_, "X(...) takes a single atom");
            ++pos_;
            return Prop::next(std::move(name));
        }
        return Prop::atom(std::move(ident));
    }

    std::string parse_ident() {
        skip_ws();
        std::size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
            ++pos_;
        if (pos_ == start) throw ParseError(pos_, "expected an atom");
        return text_.substr(start, pos_ - start);
    }
};

}  // namespace

Prop parse_prop(const std::string& text) { return Parser(text).parse(); }

}  // namespace swarm
