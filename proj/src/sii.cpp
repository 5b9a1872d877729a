#include "rwtn/sii.hpp"

#include <algorithm>

namespace rwtn::sii {

std::string model_kind_name(ModelKind k) {
    switch (k) {
        case ModelKind::Ltn: return "ltn";
        case ModelKind::Rwtn: return "rwtn";
        case ModelKind::RwtnShared: return "rwtn-shared";
    }
    return "?";
}

ModelKind model_kind_from(const std::string& name) {
    if (name == "ltn") return ModelKind::Ltn;
    if (name == "rwtn") return ModelKind::Rwtn;
    if (name == "rwtn-shared") return ModelKind::RwtnShared;
    throw ConfigError("unknown model kind '" + name + "' (ltn | rwtn | rwtn-shared)");
}

std::string box_constant(int id) { return "b" + std::to_string(id); }

namespace {

std::shared_ptr<const grounders::RwtnEncoderParams> make_encoder(
    const ModelHyper& hyper, std::uint64_t seed, std::size_t width,
    std::vector<std::shared_ptr<const grounders::RwtnEncoderParams>>& cache) {
    for (const auto& e : cache)
        if (e->mn() == width) return e;
    reservoir::ReservoirConfig cfg = hyper.reservoir;
    cfg.seed = RngStream::keyed(seed, {RngStream::fnv1a("encoder"), width}).next_u64();
    auto enc = std::make_shared<grounders::RwtnEncoderParams>(
        grounders::RwtnEncoderParams::generate(width, cfg));
    cache.push_back(enc);
    return enc;
}

}  // namespace

SiiModel build_model(ModelKind kind, const scenes::Dataset& ds, const ModelHyper& hyper,
                     std::uint64_t seed, const std::vector<std::string>& class_subset) {
    SiiModel m;
    m.kind = kind;
    m.classes = ds.classes;
    m.table = ds.table;
    m.hyper = hyper;
    m.seed = seed;
    m.n = ds.classes.size() + 4;

    std::vector<std::string> subset = class_subset.empty() ? ds.classes : class_subset;
    for (const std::string& c : subset)
        if (std::find(ds.classes.begin(), ds.classes.end(), c) == ds.classes.end())
            throw ConfigError("unknown class '" + c + "'");

    const std::size_t mn1 = m.n, mn2 = 2 * m.n;
    for (const std::string& c : subset) {
        RngStream init = RngStream::keyed(seed, {RngStream::fnv1a("init"), RngStream::fnv1a(c)});
        if (kind == ModelKind::Ltn) {
            m.grounding.predicate_map.emplace(
                c, semantics::LtnGrounder{grounders::LtnPredicateParams::init(
                       hyper.k, mn1, hyper.init_stddev, init)});
        } else {
            semantics::RwtnGrounder g;
            g.encoder = make_encoder(hyper, seed, mn1, m.encoders);
            g.decoder = grounders::RwtnDecoderParams::init(hyper.reservoir.R, hyper.t,
                                                           hyper.init_stddev, init);
            m.grounding.predicate_map.emplace(c, std::move(g));
        }
        m.trained.push_back(c);
    }

    if (kind != ModelKind::RwtnShared) {
        m.part_of = "partOf";
        RngStream init =
            RngStream::keyed(seed, {RngStream::fnv1a("init"), RngStream::fnv1a(m.part_of)});
        if (kind == ModelKind::Ltn) {
            m.grounding.predicate_map.emplace(
                m.part_of, semantics::LtnGrounder{grounders::LtnPredicateParams::init(
                               hyper.k, mn2, hyper.init_stddev, init)});
        } else {
            semantics::RwtnGrounder g;
            g.encoder = make_encoder(hyper, seed, mn2, m.encoders);
            g.decoder = grounders::RwtnDecoderParams::init(hyper.reservoir.R, hyper.t,
                                                           hyper.init_stddev, init);
            m.grounding.predicate_map.emplace(m.part_of, std::move(g));
        }
        m.trained.push_back(m.part_of);
    }
    return m;
}

semantics::Grounding crisp_grounding(const scenes::Dataset& ds, double th_ir) {
    semantics::Grounding g;
    const std::size_t p1 = ds.classes.size();
    for (std::size_t c = 0; c < p1; ++c)
        g.predicate_map.emplace(ds.classes[c], semantics::CrispTypeGrounder{c, p1});
    g.predicate_map.emplace("partOf", semantics::CrispPartOfGrounder{ds.table, th_ir, p1});
    return g;
}

fol::Signature build_signature(const SiiModel& model, const std::vector<scenes::Scene>& scs) {
    fol::Signature sig;
    for (const scenes::Scene& s : scs)
        for (const scenes::BoxRecord& b : s.boxes) sig.add_constant(box_constant(b.id));
    for (const std::string& c : model.classes) sig.add_predicate(c, 1);
    if (!model.part_of.empty()) sig.add_predicate(model.part_of, 2);
    return sig;
}

std::vector<int> sampled_negatives(std::uint64_t seed, int box_id, int true_class, int n_classes,
                                   int count) {
    std::vector<int> wrong;
    wrong.reserve(n_classes - 1);
    for (int c = 0; c < n_classes; ++c)
        if (c != true_class) wrong.push_back(c);
    if (count <= 0 || count >= static_cast<int>(wrong.size())) return wrong;
    RngStream s = RngStream::keyed(
        seed, {RngStream::fnv1a("unary-negatives"), static_cast<std::uint64_t>(box_id)});
    // Partial Fisher-Yates, then restore class order for a stable clause layout.
    for (int i = 0; i < count; ++i) {
        const std::size_t j = i + s.below(wrong.size() - i);
        std::swap(wrong[i], wrong[j]);
    }
    wrong.resize(count);
    std::sort(wrong.begin(), wrong.end());
    return wrong;
}

namespace {

void add_constants(semantics::Grounding& g, const std::vector<scenes::Scene>& scs) {
    for (const scenes::Scene& s : scs)
        for (const scenes::BoxRecord& b : s.boxes)
            g.constant_map.emplace(box_constant(b.id), grounding_vector(b));
}

fol::Formula class_literal(const std::string& cls, int box_id, bool positive) {
    fol::Formula a = fol::atom(cls, {fol::Term::constant(box_constant(box_id))});
    return positive ? a : fol::lnot(std::move(a));
}

}  // namespace

semantics::GroundedTheory build_theory(const SiiModel& model, const std::vector<scenes::Scene>& scs,
                                       const TheoryOptions& opt) {
    semantics::GroundedTheory th;
    th.sig = build_signature(model, scs);
    th.grounding = model.grounding;  // copies decoders/params; encoders stay shared
    add_constants(th.grounding, scs);

    const bool with_pairs = opt.include_part_of && !model.part_of.empty();
    const int n_classes = static_cast<int>(model.classes.size());

    // Membership in the trained subset, for shared-model class theories.
    auto grounded = [&](const std::string& p) {
        return th.grounding.predicate_map.count(p) > 0;
    };

    for (const scenes::Scene& s : scs) {
        for (const scenes::BoxRecord& b : s.boxes) {
            if (grounded(model.classes[b.true_class]))
                th.clauses.push_back(class_literal(model.classes[b.true_class], b.id, true));
            for (int c : sampled_negatives(model.seed, b.id, b.true_class, n_classes,
                                           opt.unary_negatives))
                if (grounded(model.classes[c]))
                    th.clauses.push_back(class_literal(model.classes[c], b.id, false));
        }
        if (with_pairs) {
            for (const scenes::BoxRecord& b : s.boxes)
                for (const scenes::BoxRecord& bp : s.boxes) {
                    if (b.id == bp.id) continue;
                    fol::Formula a =
                        fol::atom(model.part_of, {fol::Term::constant(box_constant(b.id)),
                                                  fol::Term::constant(box_constant(bp.id))});
                    const bool positive = b.parent && *b.parent == bp.id;
                    th.clauses.push_back(positive ? std::move(a) : fol::lnot(std::move(a)));
                }
        }
    }

    if (with_pairs && opt.include_constraints) {
        std::vector<fol::Formula> axioms = semantics::mereology_constraints(model.table, th.sig);
        for (fol::Formula& f : axioms) th.clauses.push_back(std::move(f));
    }

    if (with_pairs) {
        for (const scenes::Scene& s : scs) {
            std::vector<std::string> group;
            group.reserve(s.boxes.size());
            for (const scenes::BoxRecord& b : s.boxes) group.push_back(box_constant(b.id));
            th.domain_groups.push_back(std::move(group));
        }
    }
    return th;
}

semantics::GroundedTheory build_class_theory(const SiiModel& model,
                                             const std::vector<scenes::Scene>& scs,
                                             const std::string& cls, int unary_negatives) {
    auto it = std::find(model.classes.begin(), model.classes.end(), cls);
    if (it == model.classes.end()) throw ConfigError("unknown class '" + cls + "'");
    const int cls_idx = static_cast<int>(it - model.classes.begin());

    semantics::GroundedTheory th;
    th.sig = build_signature(model, scs);
    th.grounding.predicate_map.emplace(cls, model.grounding.predicate_map.at(cls));
    add_constants(th.grounding, scs);

    const int n_classes = static_cast<int>(model.classes.size());
    for (const scenes::Scene& s : scs)
        for (const scenes::BoxRecord& b : s.boxes) {
            if (b.true_class == cls_idx) {
                th.clauses.push_back(class_literal(cls, b.id, true));
            } else {
                const std::vector<int> negs =
                    sampled_negatives(model.seed, b.id, b.true_class, n_classes, unary_negatives);
                if (std::find(negs.begin(), negs.end(), cls_idx) != negs.end())
                    th.clauses.push_back(class_literal(cls, b.id, false));
            }
        }
    if (th.clauses.empty()) throw DataError("class '" + cls + "' has no literals in these scenes");
    return th;
}

void absorb_trained(SiiModel& model, const semantics::GroundedTheory& theory) {
    for (auto& [name, g] : theory.grounding.predicate_map) {
        auto it = model.grounding.predicate_map.find(name);
        if (it == model.grounding.predicate_map.end()) continue;
        it->second = g;
    }
}

}  // namespace rwtn::sii
