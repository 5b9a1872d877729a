#include <doctest.h>

#include <cmath>
#include <limits>

#include "rwtn/scenes.hpp"
#include "rwtn/serialize.hpp"
#include "rwtn/sii.hpp"
#include "rwtn/training.hpp"
#include "test_helpers.hpp"

using namespace rwtn;
using namespace rwtn::semantics;
using namespace rwtn::training;

namespace {

// Central finite differences of the loss over every learnable parameter.
// Returns the largest relative disagreement with the analytic gradients.
double max_fd_error(GroundedTheory& th, double lambda, const NoiseContext& noise) {
    CompiledTheory ct(th);
    loss_gradients(ct, lambda, &noise);

    const double h = 1e-5;
    double worst = 0.0;
    auto check = [&](double* p, double analytic) {
        const double saved = *p;
        *p = saved + h;
        const double up = loss_value(ct, lambda, EvalMode::Train, &noise);
        *p = saved - h;
        const double dn = loss_value(ct, lambda, EvalMode::Train, &noise);
        *p = saved;
        const double fd = (up - dn) / (2.0 * h);
        const double err = std::abs(analytic - fd) /
                           std::max({std::abs(analytic), std::abs(fd), 1e-6});
        worst = std::max(worst, err);
    };
    for (auto& e : ct.ltn_entries()) {
        auto params = testing::ltn_param_ptrs(*e.params);
        auto grads = testing::ltn_param_ptrs(e.grad);
        for (std::size_t i = 0; i < params.size(); ++i) check(params[i], *grads[i]);
    }
    for (auto& e : ct.rwtn_entries()) {
        auto params = testing::rwtn_param_ptrs(*e.params);
        auto grads = testing::rwtn_param_ptrs(e.grad);
        for (std::size_t i = 0; i < params.size(); ++i) check(params[i], *grads[i]);
    }
    return worst;
}

// 2-class linearly separable toy data: class decided by the sign of the
// first feature, rel(b, b') true when both features agree in sign.
GroundedTheory separable_theory(std::uint64_t seed, std::size_t n_const) {
    using namespace fol;
    GroundedTheory th;
    th.sig.add_predicate("A", 1);
    th.sig.add_predicate("rel", 2);
    RngStream rng = RngStream::named(seed, "separable");
    std::vector<std::string> names;
    std::vector<std::string> group;
    for (std::size_t i = 0; i < n_const; ++i) {
        const std::string c = "c" + std::to_string(i);
        th.sig.add_constant(c);
        Vec v(4);
        for (double& x : v) x = rng.uniform(-1.0, 1.0);
        v[0] += v[0] >= 0 ? 0.5 : -0.5;  // margin
        const bool pos = v[0] >= 0;
        th.grounding.constant_map.emplace(c, std::move(v));
        names.push_back(c);
        group.push_back(c);
        Formula a = atom("A", {Term::constant(c)});
        th.clauses.push_back(pos ? std::move(a) : lnot(std::move(a)));
    }
    th.domain_groups.push_back(group);
    for (std::size_t i = 0; i + 1 < n_const; i += 2) {
        const bool same = (th.grounding.constant_map.at(names[i])[0] >= 0) ==
                          (th.grounding.constant_map.at(names[i + 1])[0] >= 0);
        Formula r = atom("rel", {Term::constant(names[i]), Term::constant(names[i + 1])});
        th.clauses.push_back(same ? std::move(r) : lnot(std::move(r)));
    }
    return th;
}

std::vector<double> snapshot(GroundedTheory& th) {
    std::vector<double> out;
    for (auto& [name, g] : th.grounding.predicate_map) {
        if (auto* ltn = std::get_if<LtnGrounder>(&g))
            for (double* p : testing::ltn_param_ptrs(ltn->params)) out.push_back(*p);
        if (auto* rw = std::get_if<RwtnGrounder>(&g))
            for (double* p : testing::rwtn_param_ptrs(rw->decoder)) out.push_back(*p);
    }
    return out;
}

}  // namespace

TEST_SUITE_BEGIN("training");

TEST_CASE("loss value") {
    SUBCASE("perfectly satisfied crisp theory with lambda 0 has loss 0") {
        GroundedTheory th = testing::toy_theory(41, 3, 4, false);
        th.grounding.predicate_map.emplace("A", FnGrounder{[](const Vec&) { return 1.0; }});
        th.grounding.predicate_map.emplace("rel", FnGrounder{[](const Vec&) { return 1.0; }});
        // Negated literals would not be satisfied; keep only the positives.
        std::vector<fol::Formula> kept;
        for (auto& c : th.clauses)
            if (c.kind == fol::Formula::Kind::Atom) kept.push_back(c);
        th.clauses = kept;
        CompiledTheory ct(th);
        CHECK(loss_value(ct, 0.0, EvalMode::Eval) == 0.0);
    }
    SUBCASE("with satisfiability pinned at 1 the loss is exactly the penalty") {
        GroundedTheory th;
        th.sig.add_predicate("T", 1);
        th.sig.add_predicate("L", 1);
        th.sig.add_constant("a");
        th.grounding.constant_map.emplace("a", Vec{1.0, 0.0});
        th.grounding.predicate_map.emplace("T", FnGrounder{[](const Vec&) { return 1.0; }});
        // A learnable grounder that no clause mentions: contributes only the
        // L2 term.
        th.grounding.predicate_map.emplace(
            "L", LtnGrounder{grounders::LtnPredicateParams::init(
                     2, 2, 0.4, RngStream::named(42, "pin"))});
        th.clauses.push_back(fol::atom("T", {fol::Term::constant("a")}));
        const double lambda = 0.125;
        CompiledTheory ct(th);
        CHECK(loss_value(ct, lambda, EvalMode::Eval) ==
              doctest::Approx(lambda * learnable_sqnorm(th)).epsilon(1e-15));
    }
}

TEST_CASE("gradients match central finite differences") {
    SUBCASE("zero upstream gives zero gradients") {
        GroundedTheory th = testing::toy_theory(43, 3, 4, true);
        testing::ground_with_ltn(th, 44, 2, 3);
        CompiledTheory ct(th);
        NoiseContext noise{1, 1};
        ct.forward(EvalMode::Train, &noise);
        ct.zero_grads();
        ct.backward(0.0);
        for (auto& e : ct.ltn_entries())
            for (double* g : testing::ltn_param_ptrs(e.grad)) CHECK(*g == 0.0);
    }
    SUBCASE("ltn: single-atom theory, k=1, mn=2") {
        GroundedTheory th;
        th.sig.add_predicate("A", 1);
        th.sig.add_constant("a");
        th.grounding.constant_map.emplace("a", Vec{0.7, -0.4});
        th.grounding.predicate_map.emplace(
            "A", LtnGrounder{grounders::LtnPredicateParams::init(
                     1, 2, 0.5, RngStream::named(45, "fd1"))});
        th.clauses.push_back(fol::atom("A", {fol::Term::constant("a")}));
        NoiseContext noise{1, 1};
        CHECK(max_fd_error(th, 1e-4, noise) <= 1e-4);
    }
    SUBCASE("ltn with constraints and connectives") {
        for (std::uint64_t seed : {46u, 47u, 48u}) {
            GroundedTheory th = testing::toy_theory(seed, 3, 5, true);
            testing::ground_with_ltn(th, seed + 100, 2, 3);
            NoiseContext noise{seed, 2};
            CHECK(max_fd_error(th, 1e-6, noise) <= 1e-4);
        }
    }
    SUBCASE("rwtn decoder on a multi-clause theory, R=6, t=3") {
        for (std::uint64_t seed : {49u, 50u, 51u}) {
            GroundedTheory th = testing::toy_theory(seed, 3, 4, true);
            testing::ground_with_rwtn(th, seed + 100, 6, 3, 3, 0.05);
            NoiseContext noise{seed, 3};
            CHECK(max_fd_error(th, 1e-6, noise) <= 1e-4);
        }
    }
}

TEST_CASE("train") {
    SUBCASE("already-satisfied crisp theory stays at 1.0 with no parameters") {
        GroundedTheory th;
        th.sig.add_predicate("T", 1);
        th.sig.add_constant("a");
        th.grounding.constant_map.emplace("a", Vec{1.0});
        th.grounding.predicate_map.emplace("T", FnGrounder{[](const Vec&) { return 1.0; }});
        th.clauses.push_back(fol::atom("T", {fol::Term::constant("a")}));
        TrainConfig cfg;
        cfg.epochs = 5;
        TrainResult r = train(th, cfg);
        REQUIRE(r.trace.size() == 5);
        for (const auto& row : r.trace) CHECK(row.satisfiability == 1.0);
    }
    SUBCASE("separable toy reaches 0.9 within 1000 epochs, both architectures") {
        TrainConfig cfg;
        cfg.epochs = 1000;
        cfg.seed = 7;
        {
            GroundedTheory th = separable_theory(52, 20);
            testing::ground_with_ltn(th, 53, 2, 4);
            TrainResult r = train(th, cfg);
            CHECK(r.final_satisfiability >= 0.9);
        }
        {
            GroundedTheory th = separable_theory(52, 20);
            testing::ground_with_rwtn(th, 54, 12, 4, 4, 0.01);
            TrainResult r = train(th, cfg);
            CHECK(r.final_satisfiability >= 0.9);
        }
    }
    SUBCASE("same seed twice gives identical final parameter bytes") {
        TrainConfig cfg;
        cfg.epochs = 40;
        cfg.seed = 11;
        GroundedTheory a = separable_theory(55, 12);
        testing::ground_with_rwtn(a, 56, 6, 3, 4, 0.05);
        GroundedTheory b = separable_theory(55, 12);
        testing::ground_with_rwtn(b, 56, 6, 3, 4, 0.05);
        const TrainResult ra = train(a, cfg);
        const TrainResult rb = train(b, cfg);
        CHECK(snapshot(a) == snapshot(b));
        REQUIRE(ra.trace.size() == rb.trace.size());
        for (std::size_t i = 0; i < ra.trace.size(); ++i) {
            CHECK(ra.trace[i].loss == rb.trace[i].loss);
            CHECK(ra.trace[i].satisfiability == rb.trace[i].satisfiability);
        }
    }
    SUBCASE("learning rate 0 leaves parameters untouched") {
        GroundedTheory th = separable_theory(57, 10);
        testing::ground_with_ltn(th, 58, 2, 4);
        const std::vector<double> before = snapshot(th);
        TrainConfig cfg;
        cfg.epochs = 10;
        cfg.rmsprop.learning_rate = 0.0;
        train(th, cfg);
        CHECK(snapshot(th) == before);
    }
    SUBCASE("frozen encoder is untouched and carries no gradient slots") {
        GroundedTheory th = separable_theory(59, 10);
        testing::ground_with_rwtn(th, 60, 6, 3, 4, 0.05);
        const auto* rw = std::get_if<RwtnGrounder>(&th.grounding.predicate_map.at("A"));
        const std::uint64_t hash_before = rw->encoder->content_hash();
        TrainConfig cfg;
        cfg.epochs = 30;
        CompiledTheory probe(th);
        CHECK(probe.rwtn_entries()[0].grad.u.a.empty());  // encoder absent from grads
        train(th, cfg);
        CHECK(rw->encoder->content_hash() == hash_before);
    }
    SUBCASE("non-finite loss raises DivergenceError") {
        GroundedTheory th = separable_theory(61, 6);
        testing::ground_with_ltn(th, 62, 1, 4);
        auto* ltn = std::get_if<LtnGrounder>(&th.grounding.predicate_map.at("A"));
        ltn->params.u[0] = std::numeric_limits<double>::quiet_NaN();
        TrainConfig cfg;
        cfg.epochs = 3;
        CHECK_THROWS_AS(train(th, cfg), DivergenceError);
    }
    SUBCASE("config validation") {
        TrainConfig cfg;
        cfg.epochs = 0;
        CHECK_THROWS_AS(cfg.validate(), ConfigError);
        cfg = TrainConfig{};
        cfg.batch_policy = "minibatch";
        CHECK_THROWS_AS(cfg.validate(), ConfigError);
    }
}

TEST_CASE("train_shared matches independent runs bit for bit") {
    scenes::DatasetSpec spec;
    spec.n_whole = 2;
    spec.n_part = 2;
    spec.scenes = 12;
    spec.seed = 63;
    const scenes::Dataset ds = scenes::generate(spec);
    sii::ModelHyper hyper;
    hyper.reservoir.R = 8;
    hyper.t = 3;
    TrainConfig cfg;
    cfg.epochs = 25;
    cfg.seed = 3;

    // Shared: one model, three class theories against one encoder.
    sii::SiiModel shared =
        sii::build_model(sii::ModelKind::RwtnShared, ds, hyper, 3, {"W0", "W1", "P0"});
    std::vector<GroundedTheory> theories;
    for (const std::string& cls : shared.trained)
        theories.push_back(sii::build_class_theory(shared, ds.train, cls, 2));
    std::vector<GroundedTheory*> ptrs;
    for (auto& t : theories) ptrs.push_back(&t);
    REQUIRE(shared.encoders.size() == 1);
    const std::uint64_t encoder_hash = shared.encoders[0]->content_hash();
    train_shared(ptrs, *shared.encoders[0], cfg);
    CHECK(shared.encoders[0]->content_hash() == encoder_hash);

    // Independent: a fresh single-class model per class, same seed.
    for (std::size_t i = 0; i < shared.trained.size(); ++i) {
        sii::SiiModel solo =
            sii::build_model(sii::ModelKind::RwtnShared, ds, hyper, 3, {shared.trained[i]});
        CHECK(solo.encoders[0]->content_hash() == encoder_hash);
        GroundedTheory th = sii::build_class_theory(solo, ds.train, shared.trained[i], 2);
        train(th, cfg);
        const auto* a = std::get_if<RwtnGrounder>(
            &theories[i].grounding.predicate_map.at(shared.trained[i]));
        const auto* b = std::get_if<RwtnGrounder>(&th.grounding.predicate_map.at(shared.trained[i]));
        CHECK(a->decoder.u.a == b->decoder.u.a);
        CHECK(a->decoder.k_out == b->decoder.k_out);
    }
}

TEST_CASE("ridge mode fits separable literals") {
    GroundedTheory th = separable_theory(64, 24);
    testing::ground_with_rwtn(th, 65, 32, 20, 4, 0.0);
    CompiledTheory before(th);
    const double sat_before = before.forward(EvalMode::Eval);
    ridge_fit_decoders(th, 1e-8);
    // A t-unit random-feature readout separates most literals; the exact
    // count depends on the frozen draw.
    CompiledTheory ct(th);
    const double sat = ct.forward(EvalMode::Eval);
    CHECK(sat > sat_before);
    CHECK(sat > 0.7);
    std::size_t correct = 0;
    for (double t : ct.clause_truths())
        if (t > 0.5) ++correct;
    CHECK(correct >= ct.clause_truths().size() * 9 / 10);
}

TEST_SUITE_END();
