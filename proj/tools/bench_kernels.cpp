// Times the parallel kernels against the naive serial reference and checks
// they agree. Run manually: rwtn_bench [repeats]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "rwtn/compiled_theory.hpp"
#include "rwtn/parallel.hpp"
#include "rwtn/ref_kernels.hpp"
#include "rwtn/rng.hpp"
#include "rwtn/scenes.hpp"
#include "rwtn/sii.hpp"

using namespace rwtn;

namespace {

double now_ms() {
    using clock = std::chrono::steady_clock;
    return std::chrono::duration<double, std::milli>(clock::now().time_since_epoch()).count();
}

template <class F>
double time_ms(int repeats, F&& f) {
    f();  // warm up
    const double t0 = now_ms();
    for (int i = 0; i < repeats; ++i) f();
    return (now_ms() - t0) / repeats;
}

double max_abs_diff(const Vec& a, const Vec& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

void bench_bilinear(int repeats) {
    RngStream rng = RngStream::named(7, "bench");
    const std::size_t k = 200, d = 40;
    Tensor3 w(k, d);
    for (Mat& s : w.slices)
        for (double& x : s.a) x = rng.uniform(-1.0, 1.0);
    Vec v(d);
    for (double& x : v) x = rng.uniform(-1.0, 1.0);

    Vec out_par, out_ref;
    const double par = time_ms(repeats, [&] { out_par = bilinear_form(v, w); });
    const double ser = time_ms(repeats, [&] { out_ref = ref::bilinear_form(v, w); });
    std::printf("bilinear_form  %zux%zux%zu   parallel %8.3f ms   serial %8.3f ms   x%.2f   |diff| %.2e\n",
                k, d, d, par, ser, ser / par, max_abs_diff(out_par, out_ref));
}

void bench_encoder_batch(int repeats) {
    RngStream rng = RngStream::named(9, "bench");
    const std::size_t atoms = 512, d = 40, r = 200;
    reservoir::ReservoirConfig cfg;
    cfg.seed = 11;
    grounders::RwtnEncoderParams enc = grounders::RwtnEncoderParams::generate(d, cfg);
    Mat inputs(atoms, d);
    for (double& x : inputs.a) x = rng.uniform(-1.0, 1.0);

    Mat out_par(atoms, r), out_ref;
    const double par = time_ms(repeats, [&] {
        parallel_for(static_cast<std::int64_t>(atoms), [&](std::int64_t i) {
            grounders::rwtn_pre_raw(enc, inputs.row(i), out_par.row(i));
        });
    });
    const double ser =
        time_ms(repeats, [&] { out_ref = ref::encoder_preactivations(inputs, enc.W_res, enc.V_in); });
    std::printf("encoder batch  %zu atoms R=%zu  parallel %8.3f ms   serial %8.3f ms   x%.2f   |diff| %.2e\n",
                atoms, r, par, ser, ser / par, max_abs_diff(out_par.a, out_ref.a));
}

void bench_theory_epoch(int repeats) {
    scenes::DatasetSpec spec;
    spec.scenes = 40;
    spec.seed = 3;
    scenes::Dataset ds = scenes::generate(spec);

    sii::ModelHyper hyper;
    sii::SiiModel model = sii::build_model(sii::ModelKind::Ltn, ds, hyper, 1);
    sii::TheoryOptions opt;
    semantics::GroundedTheory theory = sii::build_theory(model, ds.train, opt);
    semantics::CompiledTheory ct(theory);
    semantics::NoiseContext noise{1, 1};

    // Parallel epoch: batched forward + backward.
    const double fwd = time_ms(repeats, [&] { ct.forward(semantics::EvalMode::Train, &noise); });
    ct.zero_grads();
    const double bwd = time_ms(repeats, [&] {
        ct.forward(semantics::EvalMode::Train, &noise);
        ct.zero_grads();
        ct.backward(-1.0);
    });
    // Serial reference: the recursive evaluator over the same theory.
    const double ser = time_ms(std::max(1, repeats / 4),
                               [&] { semantics::satisfiability(theory, semantics::EvalMode::Train, &noise); });
    const double compiled = ct.forward(semantics::EvalMode::Train, &noise);
    const double reference = semantics::satisfiability(theory, semantics::EvalMode::Train, &noise);
    std::printf("ltn epoch      %zu atoms       forward  %8.3f ms   fwd+bwd %8.3f ms\n",
                ct.atom_count(), fwd, bwd);
    std::printf("               recursive reference %8.3f ms   x%.2f   |sat diff| %.2e\n", ser,
                ser / fwd, std::abs(compiled - reference));
}

}  // namespace

int main(int argc, char** argv) {
    const int repeats = argc > 1 ? std::atoi(argv[1]) : 5;
    std::printf("threads: %d, repeats: %d\n", max_threads(), repeats);
    bench_bilinear(repeats);
    bench_encoder_batch(repeats);
    bench_theory_epoch(repeats);
    return 0;
}
