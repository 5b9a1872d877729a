#include "rwtn/semantics.hpp"

#include <algorithm>
#include <cmath>

#include "rwtn/rng.hpp"

namespace rwtn::semantics {

double eval_connectives(Connective op, double a, std::optional<double> b) {
    double r;
    switch (op) {
        case Connective::Not: r = 1.0 - a; break;
        case Connective::And: r = std::max(0.0, a + *b - 1.0); break;
        case Connective::Or: r = std::min(1.0, a + *b); break;
        case Connective::Implies: r = std::min(1.0, 1.0 - a + *b); break;
        default: r = 0.0;
    }
    return std::clamp(r, 0.0, 1.0);
}

double harmonic_mean_floored(const std::vector<double>& truths) {
    if (truths.empty()) throw DataError("harmonic mean of an empty truth set");
    double inv = 0.0;
    for (double t : truths) inv += 1.0 / std::max(t, kTruthFloor);
    return static_cast<double>(truths.size()) / inv;
}

Vec noise_draw(const NoiseContext& ctx, std::size_t r, std::int64_t c1, std::int64_t c2) {
    RngStream s = RngStream::keyed(
        ctx.seed, {RngStream::fnv1a("rwtn-noise"), ctx.epoch, static_cast<std::uint64_t>(c1),
                   static_cast<std::uint64_t>(c2)});
    Vec v(r);
    for (double& x : v) x = s.normal();
    return v;
}

double grounder_eval(const PredicateGrounder& g, const Vec& v, const Vec* noise) {
    return std::visit(
        [&](const auto& gr) -> double {
            using T = std::decay_t<decltype(gr)>;
            if constexpr (std::is_same_v<T, LtnGrounder>) {
                return grounders::ltn_predicate(gr.params, v);
            } else if constexpr (std::is_same_v<T, RwtnGrounder>) {
                return grounders::rwtn_predicate(*gr.encoder, gr.decoder, v, noise);
            } else if constexpr (std::is_same_v<T, CrispTypeGrounder>) {
                return grounders::crisp_type(v, gr.class_index, gr.p1_count);
            } else if constexpr (std::is_same_v<T, CrispPartOfGrounder>) {
                return grounders::crisp_part_of(v, gr.table, gr.th_ir, gr.p1_count);
            } else {
                return gr.fn(v);
            }
        },
        g);
}

namespace {

constexpr std::int64_t kAnonBase = std::int64_t{1} << 40;
constexpr std::int64_t kApplyId = (std::int64_t{1} << 40) - 1;

struct Element {
    const Vec* vec;
    std::int64_t id;
};

struct Binding {
    std::string name;
    Element elem;
};

struct EvalCtx {
    const Grounding* g;
    std::vector<Element> domain;
    EvalMode mode;
    const NoiseContext* noise;
    std::vector<Binding> env;

    const Element* lookup(const std::string& name) const {
        for (auto it = env.rbegin(); it != env.rend(); ++it)
            if (it->name == name) return &it->elem;
        return nullptr;
    }
};

std::int64_t constant_id(const Grounding& g, const std::string& name) {
    // Ordinal in the (lexicographically ordered) constant map; both the
    // recursive and the compiled evaluator key noise off this.
    auto it = g.constant_map.find(name);
    if (it == g.constant_map.end()) throw DataError("unmapped constant symbol '" + name + "'");
    return static_cast<std::int64_t>(std::distance(g.constant_map.begin(), it));
}

// Returns the term's vector; owned receives storage when a value had to be
// materialized (function application).
Element eval_term(const fol::Term& t, EvalCtx& ctx, std::vector<Vec>& owned) {
    switch (t.kind) {
        case fol::Term::Kind::Variable: {
            const Element* e = ctx.lookup(t.name);
            if (!e) throw DataError("unbound variable '" + t.name + "' during evaluation");
            return *e;
        }
        case fol::Term::Kind::Constant: {
            auto it = ctx.g->constant_map.find(t.name);
            if (it == ctx.g->constant_map.end())
                throw DataError("unmapped constant symbol '" + t.name + "'");
            return {&it->second, constant_id(*ctx.g, t.name)};
        }
        case fol::Term::Kind::Apply: {
            auto it = ctx.g->function_map.find(t.name);
            if (it == ctx.g->function_map.end())
                throw DataError("unmapped function symbol '" + t.name + "'");
            Vec args;
            for (const fol::Term& a : t.args) {
                Element e = eval_term(a, ctx, owned);
                args.insert(args.end(), e.vec->begin(), e.vec->end());
            }
            owned.push_back(grounders::ground_function(it->second, args));
            return {&owned.back(), kApplyId};
        }
    }
    throw DataError("corrupt term");
}

double eval_atom(const fol::Formula& f, EvalCtx& ctx) {
    auto it = ctx.g->predicate_map.find(f.pred);
    if (it == ctx.g->predicate_map.end())
        throw DataError("unmapped predicate symbol '" + f.pred + "'");
    std::vector<Vec> owned;
    owned.reserve(f.terms.size());
    Vec v;
    std::int64_t id1 = -1, id2 = -1;
    for (std::size_t i = 0; i < f.terms.size(); ++i) {
        Element e = eval_term(f.terms[i], ctx, owned);
        v.insert(v.end(), e.vec->begin(), e.vec->end());
        (i == 0 ? id1 : id2) = e.id;
    }
    if (ctx.mode == EvalMode::Train && ctx.noise) {
        if (const auto* rw = std::get_if<RwtnGrounder>(&it->second); rw && rw->encoder->xi > 0.0) {
            Vec noise = noise_draw(*ctx.noise, rw->encoder->R(), id1, id2);
            for (double& x : noise) x *= rw->encoder->xi;
            return std::clamp(grounder_eval(it->second, v, &noise), 0.0, 1.0);
        }
    }
    return std::clamp(grounder_eval(it->second, v), 0.0, 1.0);
}

double eval_rec(const fol::Formula& f, EvalCtx& ctx) {
    switch (f.kind) {
        case fol::Formula::Kind::Atom: return eval_atom(f, ctx);
        case fol::Formula::Kind::Not:
            return eval_connectives(Connective::Not, eval_rec(f.kids[0], ctx));
        case fol::Formula::Kind::And:
            return eval_connectives(Connective::And, eval_rec(f.kids[0], ctx),
                                    eval_rec(f.kids[1], ctx));
        case fol::Formula::Kind::Or:
            return eval_connectives(Connective::Or, eval_rec(f.kids[0], ctx),
                                    eval_rec(f.kids[1], ctx));
        case fol::Formula::Kind::Implies:
            return eval_connectives(Connective::Implies, eval_rec(f.kids[0], ctx),
                                    eval_rec(f.kids[1], ctx));
        case fol::Formula::Kind::ForAll:
        case fol::Formula::Kind::Exists: {
            if (ctx.domain.empty()) throw DataError("empty domain under a quantifier");
            const std::size_t nv = f.vars.size();
            const std::size_t n = ctx.domain.size();
            std::vector<std::size_t> odo(nv, 0);
            const std::size_t base = ctx.env.size();
            for (const std::string& v : f.vars) ctx.env.push_back({v, ctx.domain[0]});
            std::vector<double> truths;
            // Row-major tuple order: the last variable advances fastest.
            for (;;) {
                for (std::size_t i = 0; i < nv; ++i) ctx.env[base + i].elem = ctx.domain[odo[i]];
                truths.push_back(eval_rec(f.kids[0], ctx));
                std::size_t i = nv;
                while (i > 0 && ++odo[i - 1] == n) odo[--i] = 0;
                if (i == 0) break;
            }
            ctx.env.resize(base);
            if (f.kind == fol::Formula::Kind::ForAll) return harmonic_mean_floored(truths);
            return *std::max_element(truths.begin(), truths.end());
        }
    }
    throw DataError("corrupt formula");
}

}  // namespace

double eval_formula(const fol::Formula& f, const Grounding& g, const std::vector<Vec>& domain,
                    EvalMode mode, const NoiseContext* noise) {
    EvalCtx ctx{&g, {}, mode, noise, {}};
    ctx.domain.reserve(domain.size());
    for (std::size_t i = 0; i < domain.size(); ++i)
        ctx.domain.push_back({&domain[i], kAnonBase + static_cast<std::int64_t>(i)});
    return eval_rec(f, ctx);
}

namespace {

bool has_quantifier(const fol::Formula& f) {
    if (f.kind == fol::Formula::Kind::ForAll || f.kind == fol::Formula::Kind::Exists) return true;
    for (const fol::Formula& k : f.kids)
        if (has_quantifier(k)) return true;
    return false;
}

// Group elements resolved to vectors and noise ids.
std::vector<Element> resolve_group(const Grounding& g, const std::vector<std::string>& names) {
    std::vector<Element> out;
    out.reserve(names.size());
    for (const std::string& n : names) {
        auto it = g.constant_map.find(n);
        if (it == g.constant_map.end()) throw DataError("unmapped constant symbol '" + n + "'");
        out.push_back({&it->second, constant_id(g, n)});
    }
    return out;
}

}  // namespace

double eval_clause(const GroundedTheory& theory, const fol::Formula& clause, EvalMode mode,
                   const NoiseContext* noise) {
    // Collect a same-kind top-level quantifier prefix.
    const fol::Formula* body = &clause;
    std::vector<std::string> prefix;
    fol::Formula::Kind qkind = fol::Formula::Kind::Atom;
    while (body->kind == fol::Formula::Kind::ForAll || body->kind == fol::Formula::Kind::Exists) {
        if (prefix.empty())
            qkind = body->kind;
        else if (body->kind != qkind)
            break;
        prefix.insert(prefix.end(), body->vars.begin(), body->vars.end());
        body = &body->kids[0];
    }

    if (prefix.empty()) {
        EvalCtx ctx{&theory.grounding, {}, mode, noise, {}};
        if (has_quantifier(clause))
            for (const auto& group : theory.domain_groups)
                for (const Element& e : resolve_group(theory.grounding, group))
                    ctx.domain.push_back(e);
        return eval_rec(clause, ctx);
    }

    if (theory.domain_groups.empty()) throw DataError("empty domain under a quantifier");
    std::vector<double> truths;
    const std::size_t nv = prefix.size();
    for (const auto& group : theory.domain_groups) {
        std::vector<Element> elems = resolve_group(theory.grounding, group);
        if (elems.empty()) continue;
        EvalCtx ctx{&theory.grounding, elems, mode, noise, {}};
        for (const std::string& v : prefix) ctx.env.push_back({v, elems[0]});
        std::vector<std::size_t> odo(nv, 0);
        for (;;) {
            for (std::size_t i = 0; i < nv; ++i) ctx.env[i].elem = elems[odo[i]];
            truths.push_back(eval_rec(*body, ctx));
            std::size_t i = nv;
            while (i > 0 && ++odo[i - 1] == elems.size()) odo[--i] = 0;
            if (i == 0) break;
        }
    }
    if (truths.empty()) throw DataError("empty domain under a quantifier");
    if (qkind == fol::Formula::Kind::ForAll) return harmonic_mean_floored(truths);
    return *std::max_element(truths.begin(), truths.end());
}

double satisfiability(const GroundedTheory& theory, EvalMode mode, const NoiseContext* noise) {
    if (theory.clauses.empty()) throw DataError("satisfiability of an empty clause set");
    std::vector<double> truths;
    truths.reserve(theory.clauses.size());
    for (const fol::Formula& c : theory.clauses) truths.push_back(eval_clause(theory, c, mode, noise));
    return harmonic_mean_floored(truths);
}

std::vector<fol::Formula> mereology_constraints(const grounders::PartWholeTable& table,
                                                const fol::Signature& sig) {
    const std::vector<std::string> classes = sig.unary_predicates();
    if (table.size != classes.size())
        throw ConfigError("mereology_constraints: table size does not match P1");
    const std::vector<std::string> binary = sig.binary_predicates();
    if (binary.size() != 1)
        throw ConfigError("mereology_constraints: expected exactly one binary predicate");
    const std::string& part_of = binary[0];

    auto fresh = [&sig](std::string base) {
        while (sig.is_constant(base) || sig.is_function(base) || sig.is_predicate(base))
            base += '_';
        return base;
    };
    const std::string x = fresh("x"), y = fresh("y");
    auto pox = [&](const std::string& a, const std::string& b) {
        return fol::atom(part_of, {fol::Term::var(a), fol::Term::var(b)});
    };
    auto cls = [&](const std::string& c, const std::string& v) {
        return fol::atom(c, {fol::Term::var(v)});
    };
    auto rule = [&](fol::Formula antecedent) {
        return fol::forall({x, y}, fol::implies(std::move(antecedent), fol::lnot(pox(x, y))));
    };

    std::vector<fol::Formula> out;
    // (a) asymmetry
    out.push_back(fol::forall({x, y}, fol::implies(pox(x, y), fol::lnot(pox(y, x)))));
    // (b) parts never belong to incompatible wholes
    for (std::size_t p = 0; p < classes.size(); ++p) {
        if (!table.is_part(p)) continue;
        for (std::size_t w = 0; w < classes.size(); ++w)
            if (table.is_whole(w) && !table.at(p, w))
                out.push_back(rule(fol::land(cls(classes[p], x), cls(classes[w], y))));
    }
    // (c) wholes are not parts of anything
    for (std::size_t w = 0; w < classes.size(); ++w) {
        if (!table.is_whole(w)) continue;
        for (std::size_t c = 0; c < classes.size(); ++c)
            out.push_back(rule(fol::land(cls(classes[w], x), cls(classes[c], y))));
    }
    // (d) nothing is a part of a part; whole-left cases already emitted in (c)
    for (std::size_t c = 0; c < classes.size(); ++c) {
        if (table.is_whole(c)) continue;
        for (std::size_t p = 0; p < classes.size(); ++p)
            if (table.is_part(p))
                out.push_back(rule(fol::land(cls(classes[c], x), cls(classes[p], y))));
    }
    return out;
}

}  // namespace rwtn::semantics
