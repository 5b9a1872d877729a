#include "rwtn/training.hpp"

#include <cmath>

namespace rwtn::training {

using semantics::CompiledTheory;
using semantics::EvalMode;
using semantics::GroundedTheory;
using semantics::NoiseContext;

void TrainConfig::validate() const {
    if (epochs < 1) throw ConfigError("train: epochs must be >= 1");
    if (lambda < 0.0) throw ConfigError("train: lambda must be >= 0");
    if (rmsprop.learning_rate < 0.0) throw ConfigError("train: learning rate must be >= 0");
    if (!(rmsprop.decay >= 0.0 && rmsprop.decay < 1.0))
        throw ConfigError("train: rmsprop decay must be in [0, 1)");
    if (rmsprop.epsilon <= 0.0) throw ConfigError("train: rmsprop epsilon must be > 0");
    if (batch_policy != "full")
        throw ConfigError("train: unsupported batch policy '" + batch_policy + "'");
}

namespace {

// Fixed parameter traversal order: W slices, V, b, u / u, k_out.
template <class F>
void for_each(grounders::LtnPredicateParams& p, grounders::LtnPredicateParams& g,
              grounders::LtnPredicateParams& a, F&& f) {
    for (std::size_t q = 0; q < p.W.slices.size(); ++q)
        for (std::size_t i = 0; i < p.W.slices[q].a.size(); ++i)
            f(p.W.slices[q].a[i], g.W.slices[q].a[i], a.W.slices[q].a[i]);
    for (std::size_t i = 0; i < p.V.a.size(); ++i) f(p.V.a[i], g.V.a[i], a.V.a[i]);
    for (std::size_t i = 0; i < p.b.size(); ++i) f(p.b[i], g.b[i], a.b[i]);
    for (std::size_t i = 0; i < p.u.size(); ++i) f(p.u[i], g.u[i], a.u[i]);
}

template <class F>
void for_each(grounders::RwtnDecoderParams& p, grounders::RwtnDecoderParams& g,
              grounders::RwtnDecoderParams& a, F&& f) {
    for (std::size_t i = 0; i < p.u.a.size(); ++i) f(p.u.a[i], g.u.a[i], a.u.a[i]);
    for (std::size_t i = 0; i < p.k_out.size(); ++i) f(p.k_out[i], g.k_out[i], a.k_out[i]);
}

grounders::LtnPredicateParams zeros_like(const grounders::LtnPredicateParams& p) {
    grounders::LtnPredicateParams z;
    z.W = Tensor3(p.k(), p.mn());
    z.V = Mat(p.k(), p.mn());
    z.b.assign(p.k(), 0.0);
    z.u.assign(p.k(), 0.0);
    return z;
}

grounders::RwtnDecoderParams zeros_like(const grounders::RwtnDecoderParams& p) {
    grounders::RwtnDecoderParams z;
    z.u = Mat(p.R(), p.t());
    z.k_out.assign(p.t(), 0.0);
    return z;
}

double sqnorm_ltn(const grounders::LtnPredicateParams& p) {
    double s = 0.0;
    for (const Mat& m : p.W.slices)
        for (double x : m.a) s += x * x;
    for (double x : p.V.a) s += x * x;
    for (double x : p.b) s += x * x;
    for (double x : p.u) s += x * x;
    return s;
}

double sqnorm_rwtn(const grounders::RwtnDecoderParams& p) {
    double s = 0.0;
    for (double x : p.u.a) s += x * x;
    for (double x : p.k_out) s += x * x;
    return s;
}

}  // namespace

double learnable_sqnorm(const GroundedTheory& theory) {
    double s = 0.0;
    for (const auto& [name, g] : theory.grounding.predicate_map) {
        if (const auto* ltn = std::get_if<semantics::LtnGrounder>(&g))
            s += sqnorm_ltn(ltn->params);
        else if (const auto* rw = std::get_if<semantics::RwtnGrounder>(&g))
            s += sqnorm_rwtn(rw->decoder);
    }
    return s;
}

double loss_value(CompiledTheory& ct, double lambda, EvalMode mode, const NoiseContext* noise) {
    double sq = 0.0;
    for (auto& e : ct.ltn_entries()) sq += sqnorm_ltn(*e.params);
    for (auto& e : ct.rwtn_entries()) sq += sqnorm_rwtn(*e.params);
    return 1.0 - ct.forward(mode, noise) + lambda * sq;
}

double loss_gradients(CompiledTheory& ct, double lambda, const NoiseContext* noise) {
    const double sat = ct.forward(EvalMode::Train, noise);
    ct.zero_grads();
    ct.backward(-1.0);  // d(1 - sat)/d theta
    double sq = 0.0;
    for (auto& e : ct.ltn_entries()) {
        sq += sqnorm_ltn(*e.params);
        grounders::LtnPredicateParams dummy = zeros_like(*e.params);
        for_each(*e.params, e.grad, dummy,
                 [lambda](double& p, double& g, double&) { g += 2.0 * lambda * p; });
    }
    for (auto& e : ct.rwtn_entries()) {
        sq += sqnorm_rwtn(*e.params);
        grounders::RwtnDecoderParams dummy = zeros_like(*e.params);
        for_each(*e.params, e.grad, dummy,
                 [lambda](double& p, double& g, double&) { g += 2.0 * lambda * p; });
    }
    return 1.0 - sat + lambda * sq;
}

TrainResult train(GroundedTheory& theory, const TrainConfig& cfg) {
    cfg.validate();
    CompiledTheory ct(theory);

    TrainResult out;
    for (auto& e : ct.ltn_entries()) out.optimizer.ltn_acc.emplace(e.name, zeros_like(*e.params));
    for (auto& e : ct.rwtn_entries()) out.optimizer.rwtn_acc.emplace(e.name, zeros_like(*e.params));
    out.trace.reserve(cfg.epochs);

    NoiseContext noise{cfg.seed, 0};
    const RmsPropConfig& rp = cfg.rmsprop;
    auto rmsprop_step = [&rp](double& p, double& g, double& acc) {
        acc = rp.decay * acc + (1.0 - rp.decay) * g * g;
        p -= rp.learning_rate * g / (std::sqrt(acc) + rp.epsilon);
    };

    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        noise.epoch = static_cast<std::uint64_t>(epoch);
        const double train_loss = loss_gradients(ct, cfg.lambda, &noise);
        if (!std::isfinite(train_loss))
            throw DivergenceError("train: non-finite loss at epoch " + std::to_string(epoch));
        for (auto& e : ct.ltn_entries())
            for_each(*e.params, e.grad, out.optimizer.ltn_acc.at(e.name), rmsprop_step);
        for (auto& e : ct.rwtn_entries())
            for_each(*e.params, e.grad, out.optimizer.rwtn_acc.at(e.name), rmsprop_step);
        ++out.optimizer.step;

        const double sat = ct.forward(EvalMode::Eval);
        const double loss = 1.0 - sat + cfg.lambda * learnable_sqnorm(theory);
        if (!std::isfinite(loss))
            throw DivergenceError("train: non-finite loss at epoch " + std::to_string(epoch));
        out.trace.push_back({epoch, loss, sat});
    }
    out.final_satisfiability = out.trace.back().satisfiability;
    return out;
}

std::vector<TrainResult> train_shared(std::vector<GroundedTheory*> theories,
                                      const grounders::RwtnEncoderParams& encoder,
                                      const TrainConfig& cfg) {
    const std::uint64_t hash_before = encoder.content_hash();
    std::vector<TrainResult> out;
    out.reserve(theories.size());
    for (GroundedTheory* t : theories) {
        bool uses_encoder = false;
        for (const auto& [name, g] : t->grounding.predicate_map)
            if (const auto* rw = std::get_if<semantics::RwtnGrounder>(&g))
                if (rw->encoder.get() == &encoder) uses_encoder = true;
        if (!uses_encoder)
            throw ConfigError("train_shared: theory does not reference the shared encoder");
        out.push_back(train(*t, cfg));
    }
    if (encoder.content_hash() != hash_before)
        throw DataError("train_shared: shared encoder changed during training");
    return out;
}

void ridge_fit_decoders(GroundedTheory& theory, double lambda, double target_logit) {
    for (auto& [name, g] : theory.grounding.predicate_map) {
        auto* rw = std::get_if<semantics::RwtnGrounder>(&g);
        if (!rw) continue;

        // Collect this predicate's ground literals: Atom -> 1, ~Atom -> 0.
        std::vector<const fol::Formula*> atoms;
        std::vector<double> targets;
        for (const fol::Formula& c : theory.clauses) {
            const fol::Formula* a = &c;
            double y = target_logit;
            if (a->kind == fol::Formula::Kind::Not) {
                a = &a->kids[0];
                y = -target_logit;
            }
            if (a->kind != fol::Formula::Kind::Atom || a->pred != name) continue;
            bool ground = true;
            for (const fol::Term& t : a->terms)
                if (t.kind != fol::Term::Kind::Constant) ground = false;
            if (!ground) continue;
            atoms.push_back(a);
            targets.push_back(y);
        }
        if (atoms.empty())
            throw DataError("ridge fit: no ground literals for predicate '" + name + "'");

        const std::size_t t = rw->decoder.t();
        Mat feats(atoms.size(), t);
        for (std::size_t i = 0; i < atoms.size(); ++i) {
            Vec v;
            for (const fol::Term& term : atoms[i]->terms) {
                const Vec& cv = theory.grounding.constant_map.at(term.name);
                v.insert(v.end(), cv.begin(), cv.end());
            }
            const Vec z = tanh_map(grounders::rwtn_preactivation(*rw->encoder, v));
            grounders::rwtn_decode_raw(rw->decoder, z.data(), feats.row(i));
        }
        // feats currently holds tanh(u'z); fit k_out by bias-free ridge.
        Mat gram(t, t);
        Mat rhs(t, 1);
        for (std::size_t i = 0; i < t; ++i) {
            for (std::size_t j = i; j < t; ++j) {
                double s = 0.0;
                for (std::size_t r = 0; r < atoms.size(); ++r) s += feats.at(r, i) * feats.at(r, j);
                gram.at(i, j) = s;
                gram.at(j, i) = s;
            }
            double s = 0.0;
            for (std::size_t r = 0; r < atoms.size(); ++r) s += feats.at(r, i) * targets[r];
            rhs.at(i, 0) = s;
        }
        for (std::size_t i = 0; i < t; ++i) gram.at(i, i) += 2.0 * lambda;
        Mat sol = cholesky_solve(std::move(gram), std::move(rhs));
        for (std::size_t i = 0; i < t; ++i) rw->decoder.k_out[i] = sol.at(i, 0);
    }
}

}  // namespace rwtn::training
