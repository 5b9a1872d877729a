#include <doctest.h>

#include <cmath>
#include <map>

#include "rwtn/semantics.hpp"

using namespace rwtn;
using namespace rwtn::semantics;
using fol::atom;
using fol::forall;
using fol::implies;
using fol::lnot;
using fol::Term;

TEST_SUITE_BEGIN("semantics");

TEST_CASE("Lukasiewicz connectives") {
    CHECK(eval_connectives(Connective::And, 0.7, 0.6) == doctest::Approx(0.3).epsilon(1e-15));
    CHECK(eval_connectives(Connective::Implies, 0.8, 0.3) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(eval_connectives(Connective::Not, eval_connectives(Connective::Not, 0.42)) ==
          doctest::Approx(0.42).epsilon(1e-15));

    // Laws on a coarse grid (the acceptance suite runs the 101x101 one).
    for (int ia = 0; ia <= 20; ++ia)
        for (int ib = 0; ib <= 20; ++ib) {
            const double a = ia / 20.0, b = ib / 20.0;
            CHECK(eval_connectives(Connective::And, a, b) ==
                  eval_connectives(Connective::And, b, a));
            CHECK(eval_connectives(Connective::Or, a, b) ==
                  eval_connectives(Connective::Or, b, a));
            // a -> b == ~a | b
            CHECK(eval_connectives(Connective::Implies, a, b) ==
                  doctest::Approx(eval_connectives(Connective::Or, 1.0 - a, b)).epsilon(1e-15));
            // Monotonicity in the first argument.
            if (ia < 20) {
                const double a2 = (ia + 1) / 20.0;
                CHECK(eval_connectives(Connective::And, a2, b) >=
                      eval_connectives(Connective::And, a, b));
            }
        }
}

TEST_CASE("harmonic mean with floor") {
    CHECK(harmonic_mean_floored({1.0, 1.0, 1.0}) == 1.0);
    CHECK(harmonic_mean_floored({1.0, 0.25}) == doctest::Approx(0.4).epsilon(1e-15));
    CHECK(harmonic_mean_floored({0.5, 0.5}) == doctest::Approx(0.5).epsilon(1e-15));
    // A zero element is floored, not fatal, and pins the mean near zero.
    CHECK(harmonic_mean_floored({1.0, 0.0}) ==
          doctest::Approx(2.0 / (1.0 + 1.0 / kTruthFloor)).epsilon(1e-12));
    CHECK_THROWS_AS(harmonic_mean_floored({}), DataError);
}

namespace {

// A tiny world: three items, crisp table-backed predicates.
struct World {
    fol::Signature sig;
    Grounding g;
    std::vector<Vec> domain;

    explicit World(const std::map<std::pair<int, int>, double>& part_of_truth) {
        sig.add_predicate("P", 1);
        sig.add_predicate("partOf", 2);
        for (int i = 0; i < 3; ++i) domain.push_back(Vec{static_cast<double>(i)});
        g.predicate_map.emplace("P", FnGrounder{[](const Vec& v) { return v[0] >= 1.0 ? 1.0 : 0.0; }});
        g.predicate_map.emplace("partOf", FnGrounder{[part_of_truth](const Vec& v) {
                                    return part_of_truth.at({static_cast<int>(v[0]),
                                                             static_cast<int>(v[1])});
                                }});
    }
};

}  // namespace

TEST_CASE("eval_formula") {
    SUBCASE("forall over crisp-true predicate is 1") {
        fol::Signature sig;
        sig.add_predicate("T", 1);
        Grounding g;
        g.predicate_map.emplace("T", FnGrounder{[](const Vec&) { return 1.0; }});
        std::vector<Vec> domain(5, Vec{0.0});
        const fol::Formula f = forall({"x"}, atom("T", {Term::var("x")}));
        CHECK(eval_formula(f, g, domain, EvalMode::Eval) == 1.0);
    }
    SUBCASE("forall of constant 0.5 truths is 0.5") {
        fol::Signature sig;
        Grounding g;
        g.predicate_map.emplace("H", FnGrounder{[](const Vec&) { return 0.5; }});
        std::vector<Vec> domain(2, Vec{0.0});
        const fol::Formula f = forall({"x"}, atom("H", {Term::var("x")}));
        CHECK(eval_formula(f, g, domain, EvalMode::Eval) == doctest::Approx(0.5).epsilon(1e-15));
    }
    SUBCASE("asymmetry clause matches exhaustive substitution over 9 pairs") {
        std::map<std::pair<int, int>, double> truth;
        RngStream rng = RngStream::named(13, "pairs");
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) truth[{i, j}] = rng.uniform01();
        World w(truth);
        const fol::Formula f =
            forall({"x", "y"}, implies(atom("partOf", {Term::var("x"), Term::var("y")}),
                                       lnot(atom("partOf", {Term::var("y"), Term::var("x")}))));
        const double got = eval_formula(f, w.g, w.domain, EvalMode::Eval);

        // Independent oracle: loop the 9 substitutions by hand.
        double inv = 0.0;
        for (int x = 0; x < 3; ++x)
            for (int y = 0; y < 3; ++y) {
                const double t = std::min(1.0, 1.0 - truth[{x, y}] + (1.0 - truth[{y, x}]));
                inv += 1.0 / std::max(t, kTruthFloor);
            }
        CHECK(got == doctest::Approx(9.0 / inv).epsilon(1e-15));
    }
    SUBCASE("exists takes the maximum") {
        World w({{{0, 0}, 0.1}, {{0, 1}, 0.4}, {{0, 2}, 0.2}, {{1, 0}, 0.0}, {{1, 1}, 0.0},
                 {{1, 2}, 0.0}, {{2, 0}, 0.0}, {{2, 1}, 0.0}, {{2, 2}, 0.0}});
        const fol::Formula f =
            fol::exists({"y"}, atom("partOf", {Term::constant("c0"), Term::var("y")}));
        w.sig.add_constant("c0");
        w.g.constant_map.emplace("c0", Vec{0.0});
        CHECK(eval_formula(f, w.g, w.domain, EvalMode::Eval) == doctest::Approx(0.4));
    }
    SUBCASE("outputs stay in [0,1] even for rogue grounders") {
        Grounding g;
        g.predicate_map.emplace("R", FnGrounder{[](const Vec&) { return 7.0; }});
        g.constant_map.emplace("c", Vec{0.0});
        CHECK(eval_formula(atom("R", {Term::constant("c")}), g, {}, EvalMode::Eval) == 1.0);
    }
    SUBCASE("errors: unmapped symbol and empty domain") {
        Grounding g;
        CHECK_THROWS_AS(eval_formula(atom("Q", {Term::constant("c")}), g, {}, EvalMode::Eval),
                        DataError);
        Grounding g2;
        g2.predicate_map.emplace("Q", FnGrounder{[](const Vec&) { return 1.0; }});
        CHECK_THROWS_AS(
            eval_formula(forall({"x"}, atom("Q", {Term::var("x")})), g2, {}, EvalMode::Eval),
            DataError);
    }
}

TEST_CASE("mereology constraint generation") {
    SUBCASE("empty table yields only asymmetry") {
        fol::Signature sig;
        sig.add_predicate("partOf", 2);
        const auto cs = mereology_constraints(grounders::PartWholeTable(0), sig);
        REQUIRE(cs.size() == 1);
        CHECK(fol::print_formula(cs[0]) == "forall x,y: partOf(x,y) -> ~partOf(y,x)");

        // A class with no table entries counts as a whole: asymmetry plus the
        // whole-not-part rule over the single class.
        fol::Signature sig1;
        sig1.add_predicate("A", 1);
        sig1.add_predicate("partOf", 2);
        CHECK(mereology_constraints(grounders::PartWholeTable(1), sig1).size() == 2);
    }
    SUBCASE("one whole, one part, compatible") {
        fol::Signature sig;
        sig.add_predicate("W", 1);
        sig.add_predicate("P", 1);
        sig.add_predicate("partOf", 2);
        grounders::PartWholeTable t(2);
        t.set(1, 0);
        const auto cs = mereology_constraints(t, sig);
        // asymmetry + (c): W over {W, P} + (d): P over parts {P} = 4
        CHECK(cs.size() == 4);
        CHECK(fol::print_formula(cs[1]) == "forall x,y: W(x) & W(y) -> ~partOf(x,y)");
        CHECK(fol::print_formula(cs[2]) == "forall x,y: W(x) & P(y) -> ~partOf(x,y)");
        CHECK(fol::print_formula(cs[3]) == "forall x,y: P(x) & P(y) -> ~partOf(x,y)");
    }
    SUBCASE("closed-form clause count") {
        // 2 wholes, 2 parts, all compatible: 1 + 0 + 2*4 + 2*2 = 13.
        fol::Signature sig;
        for (const char* n : {"W0", "W1", "P0", "P1"}) sig.add_predicate(n, 1);
        sig.add_predicate("partOf", 2);
        grounders::PartWholeTable t(4);
        t.set(2, 0);
        t.set(2, 1);
        t.set(3, 0);
        t.set(3, 1);
        CHECK(mereology_constraints(t, sig).size() == 13);

        // Same but incompatible pairs present: 1:1 compatibility adds
        // (b) with 2 parts x 1 incompatible whole each.
        grounders::PartWholeTable t2(4);
        t2.set(2, 0);
        t2.set(3, 1);
        CHECK(mereology_constraints(t2, sig).size() == 15);
    }
}

TEST_CASE("satisfiability") {
    fol::Signature sig;
    sig.add_predicate("T", 1);
    sig.add_constant("a");

    GroundedTheory th;
    th.sig = sig;
    th.grounding.constant_map.emplace("a", Vec{1.0});

    SUBCASE("all clauses true gives 1.0") {
        th.grounding.predicate_map.emplace("T", FnGrounder{[](const Vec&) { return 1.0; }});
        for (int i = 0; i < 4; ++i) th.clauses.push_back(atom("T", {Term::constant("a")}));
        CHECK(satisfiability(th, EvalMode::Eval) == 1.0);
    }
    SUBCASE("harmonic mean of clause truths") {
        // Truth depends on the clause: T(a) = 1.0, ~T(a) has truth 0.25 when
        // T(a) = 0.75... instead use two grounders via two predicates.
        th.sig.add_predicate("U", 1);
        th.grounding.predicate_map.emplace("T", FnGrounder{[](const Vec&) { return 1.0; }});
        th.grounding.predicate_map.emplace("U", FnGrounder{[](const Vec&) { return 0.25; }});
        th.clauses.push_back(atom("T", {Term::constant("a")}));
        th.clauses.push_back(atom("U", {Term::constant("a")}));
        CHECK(satisfiability(th, EvalMode::Eval) == doctest::Approx(0.4).epsilon(1e-15));
    }
    SUBCASE("toy crisp theory matches hand computation") {
        th.sig.add_predicate("U", 1);
        th.grounding.predicate_map.emplace("T", FnGrounder{[](const Vec&) { return 0.8; }});
        th.grounding.predicate_map.emplace("U", FnGrounder{[](const Vec&) { return 0.6; }});
        const fol::Formula t = atom("T", {Term::constant("a")});
        const fol::Formula u = atom("U", {Term::constant("a")});
        th.clauses = {t, lnot(u), fol::land(t, u), fol::implies(t, u)};
        // truths: 0.8, 0.4, max(0, 1.4-1)=0.4, min(1, 0.2+0.6)=0.8
        const double want = 4.0 / (1 / 0.8 + 1 / 0.4 + 1 / 0.4 + 1 / 0.8);
        CHECK(satisfiability(th, EvalMode::Eval) == doctest::Approx(want).epsilon(1e-15));
    }
    SUBCASE("monotone in any clause truth") {
        th.sig.add_predicate("U", 1);
        double u_truth = 0.3;
        th.grounding.predicate_map.emplace("T", FnGrounder{[](const Vec&) { return 0.9; }});
        th.grounding.predicate_map.emplace("U", FnGrounder{[&u_truth](const Vec&) { return u_truth; }});
        th.clauses.push_back(atom("T", {Term::constant("a")}));
        th.clauses.push_back(atom("U", {Term::constant("a")}));
        double prev = satisfiability(th, EvalMode::Eval);
        for (u_truth = 0.35; u_truth <= 1.0; u_truth += 0.05) {
            const double cur = satisfiability(th, EvalMode::Eval);
            CHECK(cur >= prev);
            prev = cur;
        }
    }
    SUBCASE("empty clause set is an error") {
        GroundedTheory empty;
        CHECK_THROWS_AS(satisfiability(empty, EvalMode::Eval), DataError);
    }
    SUBCASE("eval mode is deterministic") {
        th.grounding.predicate_map.emplace("T", FnGrounder{[](const Vec&) { return 0.7; }});
        th.clauses.push_back(atom("T", {Term::constant("a")}));
        const double a = satisfiability(th, EvalMode::Eval);
        const double b = satisfiability(th, EvalMode::Eval);
        CHECK(a == b);
    }
}

TEST_SUITE_END();
