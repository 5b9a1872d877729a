#include <doctest.h>

#include <sstream>

#include "rwtn/fol.hpp"
#include "rwtn/rng.hpp"

using namespace rwtn;
using namespace rwtn::fol;

namespace {

Signature sii_sig() {
    Signature s;
    s.add_constant("b1");
    s.add_constant("b2");
    s.add_predicate("Dog", 1);
    s.add_predicate("Cat", 1);
    s.add_predicate("Tail", 1);
    s.add_predicate("partOf", 2);
    return s;
}

// Random closed formulas for the round-trip property. Quantified variables
// are unique per formula so shadowing never muddies structural equality.
struct AstGen {
    RngStream rng;
    const Signature& sig;
    int var_counter = 0;

    Term term(const std::vector<std::string>& scope) {
        if (!scope.empty() && rng.bernoulli(0.6))
            return Term::var(scope[rng.below(scope.size())]);
        return Term::constant(rng.bernoulli(0.5) ? "b1" : "b2");
    }

    Formula gen(int depth, std::vector<std::string> scope) {
        const bool leaf = depth <= 0 || rng.bernoulli(0.25);
        if (leaf) {
            switch (rng.below(4)) {
                case 0: return atom("Dog", {term(scope)});
                case 1: return atom("Cat", {term(scope)});
                case 2: return atom("Tail", {term(scope)});
                default: return atom("partOf", {term(scope), term(scope)});
            }
        }
        switch (rng.below(6)) {
            case 0: return lnot(gen(depth - 1, scope));
            case 1: return land(gen(depth - 1, scope), gen(depth - 1, scope));
            case 2: return lor(gen(depth - 1, scope), gen(depth - 1, scope));
            case 3: return implies(gen(depth - 1, scope), gen(depth - 1, scope));
            default: {
                std::vector<std::string> vars;
                const std::size_t nv = 1 + rng.below(2);
                for (std::size_t i = 0; i < nv; ++i)
                    vars.push_back("v" + std::to_string(var_counter++));
                for (const std::string& v : vars) scope.push_back(v);
                Formula body = gen(depth - 1, scope);
                return rng.bernoulli(0.7) ? forall(vars, std::move(body))
                                          : exists(vars, std::move(body));
            }
        }
    }
};

}  // namespace

TEST_SUITE_BEGIN("fol");

TEST_CASE("parses the asymmetry clause") {
    const Signature sig = sii_sig();
    const Formula f = parse_formula("forall x,y: partOf(x,y) -> ~partOf(y,x)", sig);
    const Formula want = forall(
        {"x", "y"}, implies(atom("partOf", {Term::var("x"), Term::var("y")}),
                            lnot(atom("partOf", {Term::var("y"), Term::var("x")}))));
    CHECK(f == want);
}

TEST_CASE("parses a ground atom") {
    const Formula f = parse_formula("Dog(b1)", sii_sig());
    CHECK(f == atom("Dog", {Term::constant("b1")}));
}

TEST_CASE("rejects unbound variables with a position") {
    const Signature sig = sii_sig();
    try {
        parse_formula("Cat(b) | Dog(b)", sig);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.position == 5);  // the 'b'
        CHECK(std::string(e.what()).find("unbound variable") != std::string::npos);
    }
}

TEST_CASE("error taxonomy carries 1-based positions") {
    const Signature sig = sii_sig();
    CHECK_THROWS_AS(parse_formula("Dog(b1) $ Cat(b2)", sig), ParseError);  // lexical
    try {
        parse_formula("Wolf(b1)", sig);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.position == 1);
        CHECK(std::string(e.what()).find("unknown predicate") != std::string::npos);
    }
    try {
        parse_formula("partOf(b1)", sig);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("arity mismatch") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_formula("forall x: partOf(x, x) ->", sig), ParseError);
    CHECK_THROWS_AS(parse_formula("forall Dog: Dog(b1)", sig), ParseError);
}

TEST_CASE("free variables in first-occurrence order") {
    CHECK(free_variables(atom("partOf", {Term::var("x"), Term::var("y")})) ==
          std::vector<std::string>{"x", "y"});
    CHECK(free_variables(forall({"x"}, atom("Dog", {Term::var("x")}))).empty());
    const Formula f = implies(atom("Dog", {Term::var("x")}),
                              forall({"y"}, atom("partOf", {Term::var("x"), Term::var("y")})));
    CHECK(free_variables(f) == std::vector<std::string>{"x"});
}

TEST_CASE("printer emits minimal parentheses") {
    CHECK(print_formula(lnot(atom("Dog", {Term::constant("b1")}))) == "~Dog(b1)");
    const Formula a = atom("Dog", {Term::constant("b1")});
    const Formula b = atom("Cat", {Term::constant("b1")});
    const Formula c = atom("Tail", {Term::constant("b2")});
    CHECK(print_formula(land(a, lor(b, c))) == "Dog(b1) & (Cat(b1) | Tail(b2))");
    CHECK(print_formula(lor(land(a, b), c)) == "Dog(b1) & Cat(b1) | Tail(b2)");
    CHECK(print_formula(implies(a, implies(b, c))) == "Dog(b1) -> Cat(b1) -> Tail(b2)");
    CHECK(print_formula(implies(implies(a, b), c)) == "(Dog(b1) -> Cat(b1)) -> Tail(b2)");
}

TEST_CASE("parse-print round trip on 1000 random formulas") {
    const Signature sig = sii_sig();
    AstGen gen{RngStream::named(77, "ast-gen"), sig};
    for (int i = 0; i < 1000; ++i) {
        const Formula f = gen.gen(6, {});
        const std::string text = print_formula(f);
        CAPTURE(text);
        const Formula back = parse_formula(text, sig);
        CHECK(back == f);
    }
}

TEST_CASE("theory files round trip") {
    std::string text =
        "# a tiny theory\n"
        "const b1 b2\n"
        "pred1 Dog Cat\n"
        "pred2 partOf\n"
        "\n"
        "Dog(b1)  # a fact\n"
        "forall x,y: partOf(x,y) -> ~partOf(y,x)\n";
    std::istringstream in(text);
    Theory th = load_theory(in);
    CHECK(th.sig.constants().size() == 2);
    CHECK(th.sig.unary_predicates() == std::vector<std::string>{"Dog", "Cat"});
    CHECK(th.sig.binary_predicates() == std::vector<std::string>{"partOf"});
    REQUIRE(th.clauses.size() == 2);

    std::ostringstream out;
    write_theory(th.sig, th.clauses, out);
    std::istringstream in2(out.str());
    Theory th2 = load_theory(in2);
    CHECK(th2.clauses == th.clauses);
    CHECK(th2.sig.constants() == th.sig.constants());

    std::istringstream bad("pred1 Dog\nDog(nope)\n");
    CHECK_THROWS_AS(load_theory(bad), DataError);
}

TEST_CASE("signature rejects duplicates and bad arities") {
    Signature s;
    s.add_constant("a");
    CHECK_THROWS_AS(s.add_predicate("a", 1), ConfigError);
    CHECK_THROWS_AS(s.add_predicate("P", 3), ConfigError);
    CHECK_THROWS_AS(s.add_function("f", 0), ConfigError);
}

TEST_SUITE_END();
