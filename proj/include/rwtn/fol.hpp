#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "rwtn/errors.hpp"

namespace rwtn::fol {

/// Parse failure with a 1-based character position into the input.
struct ParseError : std::runtime_error {
    std::size_t position;  // 1-based
    ParseError(std::size_t pos, const std::string& msg)
        : std::runtime_error("position " + std::to_string(pos) + ": " + msg), position(pos) {}
};

/// First-order signature: constants, functions, predicates. Declaration order
/// is preserved; grounding-vector layouts depend on it. Symbols are unique
/// across all three sets. Predicates are unary (P1) or binary (P2).
class Signature {
public:
    void add_constant(const std::string& name);
    void add_function(const std::string& name, int arity);
    void add_predicate(const std::string& name, int arity);

    bool is_constant(const std::string& name) const { return constants_.count(name) > 0; }
    bool is_function(const std::string& name) const { return functions_.count(name) > 0; }
    bool is_predicate(const std::string& name) const { return predicates_.count(name) > 0; }
    int function_arity(const std::string& name) const { return functions_.at(name); }
    int predicate_arity(const std::string& name) const { return predicates_.at(name); }

    const std::vector<std::string>& constants() const { return constant_order_; }
    const std::vector<std::pair<std::string, int>>& functions() const { return function_order_; }
    const std::vector<std::pair<std::string, int>>& predicates() const { return predicate_order_; }

    /// Unary predicates in declaration order (the class list P1).
    std::vector<std::string> unary_predicates() const;
    /// Binary predicates in declaration order (P2).
    std::vector<std::string> binary_predicates() const;

private:
    void check_fresh(const std::string& name) const;

    std::map<std::string, int> constants_;  // value unused; set semantics
    std::map<std::string, int> functions_;
    std::map<std::string, int> predicates_;
    std::vector<std::string> constant_order_;
    std::vector<std::pair<std::string, int>> function_order_;
    std::vector<std::pair<std::string, int>> predicate_order_;
};

struct Term {
    enum class Kind { Variable, Constant, Apply };
    Kind kind = Kind::Variable;
    std::string name;        // variable name, constant symbol, or function symbol
    std::vector<Term> args;  // Apply only

    static Term var(std::string n) { return {Kind::Variable, std::move(n), {}}; }
    static Term constant(std::string n) { return {Kind::Constant, std::move(n), {}}; }
    static Term apply(std::string f, std::vector<Term> a) {
        return {Kind::Apply, std::move(f), std::move(a)};
    }

    bool operator==(const Term&) const = default;
};

struct Formula {
    enum class Kind { Atom, Not, And, Or, Implies, ForAll, Exists };
    Kind kind = Kind::Atom;
    std::string pred;                // Atom
    std::vector<Term> terms;         // Atom
    std::vector<std::string> vars;   // ForAll / Exists
    std::vector<Formula> kids;       // 1 for Not and quantifiers, 2 for binary ops

    bool operator==(const Formula&) const = default;
};

Formula atom(std::string pred, std::vector<Term> terms);
Formula lnot(Formula f);
Formula land(Formula a, Formula b);
Formula lor(Formula a, Formula b);
Formula implies(Formula a, Formula b);
Formula forall(std::vector<std::string> vars, Formula body);
Formula exists(std::vector<std::string> vars, Formula body);

/// Parses one clause. Grammar: `~` not, `&` and, `|` or, `->` implies
/// (right-assoc, weakest), prefix `forall x,y:` / `exists x:` binding the
/// remainder, `Pred(t1,t2)` atoms; precedence ~ > & > | > ->. Identifiers in
/// term position resolve to bound variables or declared constants; anything
/// else is an error with a 1-based position.
Formula parse_formula(const std::string& text, const Signature& sig);

/// Canonical text with minimal parentheses; parse_formula(print_formula(f))
/// is structurally identical to f.
std::string print_formula(const Formula& f);

/// Free variables in first-occurrence order.
std::vector<std::string> free_variables(const Formula& f);

/// Arity and boundness checks for programmatically built formulas.
/// Throws ParseError (position 0) on violation.
void validate(const Formula& f, const Signature& sig);

/// Theory file: `#` comments, `const`/`func<k>`/`pred1`/`pred2` header
/// directives, then one clause per line.
struct Theory {
    Signature sig;
    std::vector<Formula> clauses;
};

Theory load_theory(std::istream& in);
void write_theory(const Signature& sig, const std::vector<Formula>& clauses, std::ostream& out);

}  // namespace rwtn::fol
