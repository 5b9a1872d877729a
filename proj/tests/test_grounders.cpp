#include <doctest.h>

#include <cmath>

#include "rwtn/geometry.hpp"
#include "rwtn/grounders.hpp"
#include "rwtn/rng.hpp"

using namespace rwtn;
using namespace rwtn::grounders;

namespace {

double sigmoid_ref(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

TEST_SUITE_BEGIN("grounders");

TEST_CASE("ltn predicate") {
    SUBCASE("all-zero parameters give 0.5") {
        LtnPredicateParams p;
        p.W = Tensor3(2, 3);
        p.V = Mat(2, 3);
        p.b = Vec(2, 0.0);
        p.u = Vec(2, 0.0);
        CHECK(ltn_predicate(p, Vec{0.4, -0.2, 0.9}) == 0.5);
    }
    SUBCASE("zero output weights give 0.5 for any input") {
        RngStream rng = RngStream::named(1, "ltn-u0");
        LtnPredicateParams p = LtnPredicateParams::init(3, 4, 0.5, rng);
        p.u.assign(3, 0.0);
        CHECK(ltn_predicate(p, Vec{1.0, 2.0, -1.0, 0.5}) == 0.5);
    }
    SUBCASE("hand-set k=2 mn=3 matches the unrolled arithmetic to 1e-12") {
        LtnPredicateParams p;
        p.W = Tensor3(2, 3);
        double c = 0.1;
        for (Mat& s : p.W.slices)
            for (double& x : s.a) x = (c += 0.07);
        p.V = Mat(2, 3);
        for (double& x : p.V.a) x = (c -= 0.05);
        p.b = Vec{0.2, -0.3};
        p.u = Vec{0.9, -1.1};
        const Vec v{0.5, -0.25, 0.75};

        double s = 0.0;
        for (int q = 0; q < 2; ++q) {
            double z = p.b[q];
            for (int a = 0; a < 3; ++a)
                for (int b = 0; b < 3; ++b) z += v[a] * p.W.slices[q].at(a, b) * v[b];
            for (int a = 0; a < 3; ++a) z += p.V.at(q, a) * v[a];
            s += p.u[q] * std::tanh(z);
        }
        CHECK(ltn_predicate(p, v) == doctest::Approx(sigmoid_ref(s)).epsilon(1e-12));
    }
    SUBCASE("dimension mismatch") {
        RngStream rng = RngStream::named(2, "ltn-dim");
        LtnPredicateParams p = LtnPredicateParams::init(2, 3, 0.1, rng);
        CHECK_THROWS_AS(ltn_predicate(p, Vec(4, 0.0)), DimensionError);
    }
}

TEST_CASE("rwtn predicate") {
    reservoir::ReservoirConfig cfg;
    cfg.R = 4;
    cfg.seed = 7;
    SUBCASE("zero input and no noise give 0.5") {
        RwtnEncoderParams enc = RwtnEncoderParams::generate(3, cfg);
        RngStream rng = RngStream::named(3, "rwtn-0");
        RwtnDecoderParams dec = RwtnDecoderParams::init(4, 2, 0.3, rng);
        CHECK(rwtn_predicate(enc, dec, Vec(3, 0.0), nullptr) == 0.5);
    }
    SUBCASE("zero output weights give 0.5") {
        RwtnEncoderParams enc = RwtnEncoderParams::generate(3, cfg);
        RngStream rng = RngStream::named(4, "rwtn-k0");
        RwtnDecoderParams dec = RwtnDecoderParams::init(4, 2, 0.3, rng);
        dec.k_out.assign(2, 0.0);
        CHECK(rwtn_predicate(enc, dec, Vec{0.1, -0.7, 0.4}, nullptr) == 0.5);
    }
    SUBCASE("hand-set R=4 t=2 mn=3 matches the unrolled arithmetic") {
        RwtnEncoderParams enc = RwtnEncoderParams::generate(3, cfg);
        RngStream rng = RngStream::named(5, "rwtn-hand");
        RwtnDecoderParams dec = RwtnDecoderParams::init(4, 2, 0.4, rng);
        const Vec v{0.2, -0.5, 0.8};
        const Vec noise{0.01, -0.02, 0.03, -0.04};

        Vec z(4);
        for (int q = 0; q < 4; ++q) {
            double acc = noise[q];
            for (int a = 0; a < 3; ++a) {
                for (int b = 0; b < 3; ++b) acc += v[a] * enc.W_res.slices[q].at(a, b) * v[b];
                acc += enc.V_in.at(q, a) * v[a];
            }
            z[q] = std::tanh(acc);
        }
        double s = 0.0;
        for (int j = 0; j < 2; ++j) {
            double a = 0.0;
            for (int r = 0; r < 4; ++r) a += dec.u.at(r, j) * z[r];
            s += dec.k_out[j] * std::tanh(a);
        }
        CHECK(rwtn_predicate(enc, dec, v, &noise) ==
              doctest::Approx(sigmoid_ref(s)).epsilon(1e-12));
    }
    SUBCASE("output strictly inside (0,1) on random inputs") {
        RwtnEncoderParams enc = RwtnEncoderParams::generate(3, cfg);
        RngStream rng = RngStream::named(6, "rwtn-range");
        RwtnDecoderParams dec = RwtnDecoderParams::init(4, 2, 5.0, rng);
        for (int i = 0; i < 100; ++i) {
            Vec v{rng.uniform(-10, 10), rng.uniform(-10, 10), rng.uniform(-10, 10)};
            const double p = rwtn_predicate(enc, dec, v, nullptr);
            CHECK(p > 0.0);
            CHECK(p < 1.0);
        }
    }
}

TEST_CASE("encoder generation and immutability") {
    reservoir::ReservoirConfig cfg;
    cfg.R = 8;
    cfg.seed = 42;
    RwtnEncoderParams enc = RwtnEncoderParams::generate(5, cfg);
    SUBCASE("slices hit the spectral radius target") {
        for (const Mat& s : enc.W_res.slices)
            CHECK(std::abs(spectral_radius(s, 1e-13) - cfg.rho) <= 1e-6);
    }
    SUBCASE("input weights bounded by omega") {
        for (double x : enc.V_in.a) CHECK(std::abs(x) <= cfg.omega);
    }
    SUBCASE("generation is deterministic and hashes are stable") {
        RwtnEncoderParams enc2 = RwtnEncoderParams::generate(5, cfg);
        CHECK(enc.content_hash() == enc2.content_hash());
        CHECK(enc.W_res == enc2.W_res);
        cfg.seed = 43;
        CHECK(RwtnEncoderParams::generate(5, cfg).content_hash() != enc.content_hash());
    }
    SUBCASE("weight_count matches the space formula") {
        CHECK(enc.weight_count() == (5 * 5 + 5) * 8);
    }
}

TEST_CASE("ground_function") {
    LinearFunctionParams f;
    f.M = Mat::identity(3);
    f.N = Vec(3, 0.0);
    const Vec v{1.0, 2.0, 3.0};
    CHECK(ground_function(f, v) == v);
    f.N = Vec{0.5, -0.5, 1.0};
    CHECK(ground_function(f, Vec(3, 0.0)) == f.N);

    RngStream rng = RngStream::named(7, "fn");
    LinearFunctionParams g;
    g.M = Mat(3, 6);
    for (double& x : g.M.a) x = rng.uniform(-1, 1);
    g.N = Vec{0.1, 0.2, 0.3};
    Vec args(6);
    for (double& x : args) x = rng.uniform(-1, 1);
    const Vec got = ground_function(g, args);
    const Vec want = affine(g.M, args, g.N);
    CHECK(got == want);
}

TEST_CASE("crisp type grounding") {
    CHECK(crisp_type(Vec{0.9, 0.1, 0, 0, 1, 1}, 0, 2) == 1.0);
    CHECK(crisp_type(Vec{0.9, 0.1, 0, 0, 1, 1}, 1, 2) == 0.0);
    // Ties go to the lowest index.
    CHECK(crisp_type(Vec{0.5, 0.5, 0, 0, 1, 1}, 0, 2) == 1.0);
    CHECK(crisp_type(Vec{0.5, 0.5, 0, 0, 1, 1}, 1, 2) == 0.0);
    CHECK_THROWS_AS(crisp_type(Vec{0.5, 0.5, 0, 0, 1, 1}, 2, 2), DimensionError);
}

TEST_CASE("crisp part-of grounding") {
    PartWholeTable t(2);
    t.set(1, 0);  // class 1 is a part of class 0
    auto pair_vec = [](const Vec& scores_a, const Box& a, const Vec& scores_b, const Box& b) {
        Vec v = scores_a;
        v.insert(v.end(), {a.x0, a.y0, a.x1, a.y1});
        v.insert(v.end(), scores_b.begin(), scores_b.end());
        v.insert(v.end(), {b.x0, b.y0, b.x1, b.y1});
        return v;
    };
    const Vec part{0.0, 1.0}, whole{1.0, 0.0};

    SUBCASE("disjoint boxes score 0") {
        Vec v = pair_vec(part, Box{0, 0, 0.2, 0.2}, whole, Box{0.5, 0.5, 1, 1});
        CHECK(crisp_part_of(v, t, 0.7, 2) == 0.0);
    }
    SUBCASE("nested one-hot compatible pair scores 1") {
        Vec v = pair_vec(part, Box{0.4, 0.4, 0.6, 0.6}, whole, Box{0.2, 0.2, 0.9, 0.9});
        CHECK(crisp_part_of(v, t, 0.7, 2) == 1.0);
    }
    SUBCASE("half-inside box misses th_ir = 0.7") {
        Vec v = pair_vec(part, Box{0, 0, 1, 1}, whole, Box{0.5, 0, 1.5, 1});
        CHECK(crisp_part_of(v, t, 0.7, 2) == 0.0);  // ir = 0.5
    }
    SUBCASE("no self-parthood when the diagonal is empty") {
        Vec v = pair_vec(part, Box{0.1, 0.1, 0.3, 0.3}, part, Box{0.1, 0.1, 0.3, 0.3});
        CHECK(crisp_part_of(v, t, 0.7, 2) == 0.0);
    }
    SUBCASE("table validation rejects part-owning parts") {
        PartWholeTable bad(3);
        bad.set(1, 0);
        bad.set(2, 1);  // 1 is a part yet owns 2
        CHECK_THROWS_AS(bad.validate(), ConfigError);
    }
}

TEST_CASE("parameter accounting") {
    CHECK(ltn_param_count(64, 1, 6) == 24972);
    CHECK(rwtn_param_count(200, 20) == 4020);
    const SharedSpace s = shared_space(64, 1, 200, 20, 11);
    CHECK(s.unshared == 9196220);
    CHECK(s.shared == 876220);

    // Field-by-field counts agree with the closed forms.
    RngStream rng = RngStream::named(8, "count");
    LtnPredicateParams p = LtnPredicateParams::init(6, 64, 0.1, rng);
    CHECK(p.param_count() == ltn_param_count(64, 1, 6));
    RwtnDecoderParams d = RwtnDecoderParams::init(200, 20, 0.1, rng);
    CHECK(d.param_count() == rwtn_param_count(200, 20));
}

TEST_SUITE_END();
