#include <doctest.h>

#include "rwtn/compiled_theory.hpp"
#include "test_helpers.hpp"

using namespace rwtn;
using namespace rwtn::semantics;

TEST_SUITE_BEGIN("compiled");

// The batched evaluator must agree with the recursive reference bit for bit:
// same per-atom kernels, same aggregation order.
TEST_CASE("compiled forward equals the recursive evaluator exactly") {
    SUBCASE("ltn grounders, eval and train modes") {
        GroundedTheory th = testing::toy_theory(21, 3, 6, true);
        testing::ground_with_ltn(th, 22, 2, 3);
        CompiledTheory ct(th);
        CHECK(ct.forward(EvalMode::Eval) == satisfiability(th, EvalMode::Eval));
        NoiseContext noise{5, 3};
        CHECK(ct.forward(EvalMode::Train, &noise) ==
              satisfiability(th, EvalMode::Train, &noise));
    }
    SUBCASE("rwtn grounders with live noise") {
        GroundedTheory th = testing::toy_theory(23, 3, 5, true);
        testing::ground_with_rwtn(th, 24, 6, 3, 3, 0.05);
        CompiledTheory ct(th);
        CHECK(ct.forward(EvalMode::Eval) == satisfiability(th, EvalMode::Eval));
        NoiseContext noise{9, 1};
        CHECK(ct.forward(EvalMode::Train, &noise) ==
              satisfiability(th, EvalMode::Train, &noise));
        // Different epochs draw different noise; same epoch agrees again.
        NoiseContext noise2{9, 2};
        const double e2_compiled = ct.forward(EvalMode::Train, &noise2);
        CHECK(e2_compiled == satisfiability(th, EvalMode::Train, &noise2));
        CHECK(e2_compiled != ct.forward(EvalMode::Train, &noise));
    }
    SUBCASE("crisp grounders are cached but identical") {
        GroundedTheory th = testing::toy_theory(25, 3, 6, true);
        th.grounding.predicate_map.emplace(
            "A", FnGrounder{[](const Vec& v) { return v[0] > 0 ? 0.9 : 0.2; }});
        th.grounding.predicate_map.emplace(
            "rel", FnGrounder{[](const Vec& v) { return v[0] * v[0]; }});
        CompiledTheory ct(th);
        const double a = ct.forward(EvalMode::Eval);
        CHECK(a == satisfiability(th, EvalMode::Eval));
        CHECK(a == ct.forward(EvalMode::Eval));  // cached second pass
    }
}

TEST_CASE("compiled evaluation is reproducible across instances") {
    GroundedTheory th = testing::toy_theory(31, 3, 6, true);
    testing::ground_with_rwtn(th, 32, 5, 2, 3, 0.1);
    CompiledTheory a(th);
    CompiledTheory b(th);
    NoiseContext noise{7, 11};
    CHECK(a.forward(EvalMode::Train, &noise) == b.forward(EvalMode::Train, &noise));
    CHECK(a.forward(EvalMode::Eval) == b.forward(EvalMode::Eval));
    CHECK(a.clause_truths() == b.clause_truths());
}

TEST_CASE("atoms are deduplicated across literals and constraints") {
    GroundedTheory th = testing::toy_theory(33, 3, 4, true);
    testing::ground_with_ltn(th, 34, 1, 3);
    CompiledTheory ct(th);
    // 4 unary atoms + rel atoms: 2 literal pairs plus the full 4x4 grid from
    // the constraint; the grid subsumes the literals.
    CHECK(ct.atom_count() == 4 + 16);
}

TEST_CASE("trainer restrictions are reported") {
    SUBCASE("nested quantifiers") {
        GroundedTheory th = testing::toy_theory(35, 3, 3, false);
        testing::ground_with_ltn(th, 36, 1, 3);
        th.clauses.push_back(fol::forall(
            {"x"}, fol::lnot(fol::exists({"y"}, fol::atom("rel", {fol::Term::var("x"),
                                                                  fol::Term::var("y")})))));
        CHECK_THROWS_AS(CompiledTheory{th}, ConfigError);
    }
    SUBCASE("unmapped predicate") {
        GroundedTheory th = testing::toy_theory(37, 3, 3, false);
        testing::ground_with_ltn(th, 38, 1, 3);
        th.clauses.push_back(fol::atom("ghost", {fol::Term::constant("c0")}));
        CHECK_THROWS_AS(CompiledTheory{th}, DataError);
    }
}

TEST_SUITE_END();
