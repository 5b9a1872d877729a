#include "rwtn/compiled_theory.hpp"

#include <algorithm>
#include <cmath>

#include "rwtn/parallel.hpp"

namespace rwtn::semantics {

namespace {

// Slot argument descriptor: prefix-variable index (>= 0) or ~dense_const_id.
struct SlotDesc {
    std::size_t pred;
    std::int32_t a1;
    std::int32_t a2;  // INT32_MIN when unary
};
constexpr std::int32_t kNoArg = INT32_MIN;

}  // namespace

std::size_t CompiledTheory::atom_count() const {
    std::size_t n = 0;
    for (const PredBatch& b : preds_) n += b.atom_args.size();
    return n;
}

int CompiledTheory::intern_atom(std::size_t pred, std::int32_t c1, std::int32_t c2) {
    PredBatch& b = preds_[pred];
    auto [it, inserted] = b.index.try_emplace({c1, c2}, static_cast<std::int32_t>(b.atom_args.size()));
    if (inserted) b.atom_args.push_back({c1, c2});
    return it->second;
}

CompiledTheory::CompiledTheory(GroundedTheory& theory) : theory_(&theory) {
    // Dense constant ids follow the constant map's (ordered) iteration; the
    // recursive evaluator keys noise off the same ordinals.
    for (auto& [name, vec] : theory.grounding.constant_map) {
        const_ids_.emplace(name, static_cast<std::int32_t>(const_names_.size()));
        const_names_.push_back(name);
        const_vecs_.push_back(&vec);
    }
    groups_.reserve(theory.domain_groups.size());
    for (const auto& group : theory.domain_groups) {
        std::vector<std::int32_t> ids;
        ids.reserve(group.size());
        for (const std::string& n : group) {
            auto it = const_ids_.find(n);
            if (it == const_ids_.end()) throw DataError("unmapped constant symbol '" + n + "'");
            ids.push_back(it->second);
        }
        groups_.push_back(std::move(ids));
    }

    for (auto& [name, grounder] : theory.grounding.predicate_map) {
        pred_ids_.emplace(name, preds_.size());
        PredBatch b;
        b.name = name;
        b.grounder = &grounder;
        if (auto* ltn = std::get_if<LtnGrounder>(&grounder)) {
            b.kind = PredBatch::Kind::Ltn;
            b.entry = static_cast<int>(ltn_.size());
            ltn_.push_back({name, &ltn->params, {}});
        } else if (auto* rw = std::get_if<RwtnGrounder>(&grounder)) {
            b.kind = PredBatch::Kind::Rwtn;
            b.entry = static_cast<int>(rwtn_.size());
            rwtn_.push_back({name, &rw->decoder, rw->encoder.get(), {}});
        }
        preds_.push_back(std::move(b));
    }

    clauses_.reserve(theory.clauses.size());
    for (const fol::Formula& f : theory.clauses) compile_clause(f);
    clause_truths_.assign(clauses_.size(), 0.0);

    // Materialize per-atom input vectors and tapes. RWTN batches share one
    // input/state table per encoder.
    auto build_input_row = [&](const std::array<std::int32_t, 2>& args, std::size_t mn,
                               double* row, const std::string& name) {
        const Vec& v1 = *const_vecs_[args[0]];
        if (v1.size() + (args[1] >= 0 ? const_vecs_[args[1]]->size() : 0) != mn)
            throw DimensionError("inconsistent grounding vector lengths for '" + name + "'");
        std::copy(v1.begin(), v1.end(), row);
        if (args[1] >= 0)
            std::copy(const_vecs_[args[1]]->begin(), const_vecs_[args[1]]->end(),
                      row + v1.size());
    };

    for (PredBatch& b : preds_) {
        const std::size_t n = b.atom_args.size();
        if (n == 0) continue;
        b.mn = const_vecs_[b.atom_args[0][0]]->size() +
               (b.atom_args[0][1] >= 0 ? const_vecs_[b.atom_args[0][1]]->size() : 0);
        b.truths.assign(n, 0.0);
        b.upstream.assign(n, 0.0);
        if (b.kind == PredBatch::Kind::Rwtn) {
            const auto& e = *rwtn_[b.entry].encoder;
            if (e.mn() != b.mn)
                throw DimensionError("rwtn encoder for '" + b.name + "' expects mn=" +
                                     std::to_string(e.mn()) + ", atoms have " +
                                     std::to_string(b.mn));
            int slot_idx = -1;
            for (std::size_t s = 0; s < encoders_.size(); ++s)
                if (encoders_[s].enc == &e) slot_idx = static_cast<int>(s);
            if (slot_idx < 0) {
                slot_idx = static_cast<int>(encoders_.size());
                encoders_.emplace_back();
                encoders_[slot_idx].enc = &e;
            }
            EncoderSlot& slot = encoders_[slot_idx];
            b.enc_slot = slot_idx;
            b.z_row.resize(n);
            for (std::size_t i = 0; i < n; ++i) {
                const auto& args = b.atom_args[i];
                auto [it, inserted] = slot.rows.try_emplace(
                    {args[0], args[1]}, static_cast<std::int32_t>(slot.row_args.size()));
                if (inserted) slot.row_args.push_back(args);
                b.z_row[i] = it->second;
            }
            b.zh = Mat(n, rwtn_[b.entry].params->t());
            continue;
        }
        b.inputs = Mat(n, b.mn);
        for (std::size_t i = 0; i < n; ++i)
            build_input_row(b.atom_args[i], b.mn, b.inputs.row(i), b.name);
        if (b.kind == PredBatch::Kind::Ltn) {
            const auto& p = *ltn_[b.entry].params;
            if (p.mn() != b.mn)
                throw DimensionError("ltn grounder '" + b.name + "' expects mn=" +
                                     std::to_string(p.mn()) + ", atoms have " +
                                     std::to_string(b.mn));
            b.h = Mat(n, p.k());
        }
    }
    for (EncoderSlot& slot : encoders_) {
        const std::size_t rows = slot.row_args.size();
        const std::size_t mn = slot.enc->mn();
        slot.inputs = Mat(rows, mn);
        for (std::size_t i = 0; i < rows; ++i)
            build_input_row(slot.row_args[i], mn, slot.inputs.row(i), "rwtn encoder");
        slot.pre = Mat(rows, slot.enc->R());
        slot.z_eval = Mat(rows, slot.enc->R());
        slot.z = Mat(rows, slot.enc->R());
    }
}

void CompiledTheory::prepare_encoder_slot(EncoderSlot& slot, EvalMode mode,
                                          const NoiseContext* noise) {
    const std::size_t R = slot.enc->R();
    if (!slot.pre_built) {
        parallel_for(static_cast<std::int64_t>(slot.row_args.size()), [&](std::int64_t i) {
            double* prow = slot.pre.row(i);
            grounders::rwtn_pre_raw(*slot.enc, slot.inputs.row(i), prow);
            double* ze = slot.z_eval.row(i);
            for (std::size_t q = 0; q < R; ++q) ze[q] = tanh_strict(prow[q]);
        });
        slot.pre_built = true;
    }
    if (mode == EvalMode::Eval) return;
    const bool noisy = noise && slot.enc->xi > 0.0;
    if (!noisy) {
        if (!slot.z_valid || slot.z_noisy) {
            slot.z = slot.z_eval;
            slot.z_valid = true;
            slot.z_noisy = false;
        }
        return;
    }
    if (slot.z_valid && slot.z_noisy && slot.z_seed == noise->seed &&
        slot.z_epoch == noise->epoch)
        return;
    const double xi = slot.enc->xi;
    parallel_for(static_cast<std::int64_t>(slot.row_args.size()), [&](std::int64_t i) {
        const auto& [c1, c2] = slot.row_args[i];
        Vec nd = noise_draw(*noise, R, c1, c2);
        const double* prow = slot.pre.row(i);
        double* zrow = slot.z.row(i);
        for (std::size_t q = 0; q < R; ++q) zrow[q] = tanh_strict(prow[q] + xi * nd[q]);
    });
    slot.z_valid = true;
    slot.z_noisy = true;
    slot.z_seed = noise->seed;
    slot.z_epoch = noise->epoch;
}

void CompiledTheory::compile_clause(const fol::Formula& f) {
    Clause c;
    const fol::Formula* body = &f;
    std::vector<std::string> prefix;
    fol::Formula::Kind qkind = fol::Formula::Kind::Atom;
    while (body->kind == fol::Formula::Kind::ForAll || body->kind == fol::Formula::Kind::Exists) {
        if (prefix.empty())
            qkind = body->kind;
        else if (body->kind != qkind)
            throw ConfigError("trainer: mixed quantifier prefixes are not supported");
        prefix.insert(prefix.end(), body->vars.begin(), body->vars.end());
        body = &body->kids[0];
    }
    c.quantified = !prefix.empty();
    c.existential = qkind == fol::Formula::Kind::Exists;

    std::vector<SlotDesc> slots;
    auto term_desc = [&](const fol::Term& t) -> std::int32_t {
        if (t.kind == fol::Term::Kind::Variable) {
            auto it = std::find(prefix.begin(), prefix.end(), t.name);
            if (it == prefix.end())
                throw ConfigError("trainer: variable '" + t.name + "' not bound by the clause prefix");
            return static_cast<std::int32_t>(it - prefix.begin());
        }
        if (t.kind == fol::Term::Kind::Constant) {
            auto it = const_ids_.find(t.name);
            if (it == const_ids_.end()) throw DataError("unmapped constant symbol '" + t.name + "'");
            return ~it->second;
        }
        throw ConfigError("trainer: function symbols are not supported in clauses");
    };

    // Postorder compile of the quantifier-free body.
    auto rec = [&](auto&& self, const fol::Formula& g) -> std::int32_t {
        switch (g.kind) {
            case fol::Formula::Kind::Atom: {
                auto pit = pred_ids_.find(g.pred);
                if (pit == pred_ids_.end())
                    throw DataError("unmapped predicate symbol '" + g.pred + "'");
                SlotDesc d{pit->second, term_desc(g.terms[0]),
                           g.terms.size() > 1 ? term_desc(g.terms[1]) : kNoArg};
                slots.push_back(d);
                c.nodes.push_back({Node::Slot, static_cast<std::int32_t>(slots.size() - 1), -1});
                break;
            }
            case fol::Formula::Kind::Not: {
                std::int32_t a = self(self, g.kids[0]);
                c.nodes.push_back({Node::Not, a, -1});
                break;
            }
            case fol::Formula::Kind::And:
            case fol::Formula::Kind::Or:
            case fol::Formula::Kind::Implies: {
                std::int32_t a = self(self, g.kids[0]);
                std::int32_t b = self(self, g.kids[1]);
                const Node::Op op = g.kind == fol::Formula::Kind::And  ? Node::And
                                    : g.kind == fol::Formula::Kind::Or ? Node::Or
                                                                       : Node::Implies;
                c.nodes.push_back({op, a, b});
                break;
            }
            default:
                throw ConfigError("trainer: nested quantifiers are not supported");
        }
        return static_cast<std::int32_t>(c.nodes.size() - 1);
    };
    rec(rec, *body);
    c.nslots = static_cast<std::int32_t>(slots.size());

    auto emit_instance = [&](const std::vector<std::int32_t>& binding) {
        for (const SlotDesc& d : slots) {
            const std::int32_t c1 = d.a1 >= 0 ? binding[d.a1] : ~d.a1;
            const std::int32_t c2 = d.a2 == kNoArg ? -1 : (d.a2 >= 0 ? binding[d.a2] : ~d.a2);
            c.inst.push_back(
                {static_cast<std::int32_t>(d.pred), static_cast<std::int32_t>(intern_atom(d.pred, c1, c2))});
        }
        ++c.ninst;
    };

    if (!c.quantified) {
        emit_instance({});
    } else {
        if (groups_.empty()) throw DataError("empty domain under a quantifier");
        const std::size_t nv = prefix.size();
        std::vector<std::int32_t> binding(nv);
        for (const auto& group : groups_) {
            if (group.empty()) continue;
            std::vector<std::size_t> odo(nv, 0);
            // Row-major, last variable fastest: matches the reference evaluator.
            for (;;) {
                for (std::size_t i = 0; i < nv; ++i) binding[i] = group[odo[i]];
                emit_instance(binding);
                std::size_t i = nv;
                while (i > 0 && ++odo[i - 1] == group.size()) odo[--i] = 0;
                if (i == 0) break;
            }
        }
        if (c.ninst == 0) throw DataError("empty domain under a quantifier");
    }
    clauses_.push_back(std::move(c));
}

void CompiledTheory::eval_batch(PredBatch& b, EvalMode mode, const NoiseContext* noise) {
    const std::int64_t n = static_cast<std::int64_t>(b.atom_args.size());
    if (n == 0) return;
    switch (b.kind) {
        case PredBatch::Kind::Ltn: {
            const grounders::LtnPredicateParams& p = *ltn_[b.entry].params;
            parallel_for(n, [&](std::int64_t i) {
                b.truths[i] = grounders::ltn_forward_raw(p, b.inputs.row(i), b.h.row(i));
            });
            break;
        }
        case PredBatch::Kind::Rwtn: {
            const RwtnEntry& e = rwtn_[b.entry];
            const grounders::RwtnDecoderParams& dec = *e.params;
            EncoderSlot& slot = encoders_[b.enc_slot];
            prepare_encoder_slot(slot, mode, noise);
            const Mat& zsrc = mode == EvalMode::Train ? slot.z : slot.z_eval;
            parallel_for(n, [&](std::int64_t i) {
                b.truths[i] = grounders::rwtn_decode_raw(
                    dec, zsrc.row(b.z_row[i]), mode == EvalMode::Train ? b.zh.row(i) : nullptr);
            });
            break;
        }
        case PredBatch::Kind::Fixed: {
            if (b.fixed_truths_built) return;
            parallel_for(n, [&](std::int64_t i) {
                Vec v(b.inputs.row(i), b.inputs.row(i) + b.mn);
                b.truths[i] = std::clamp(grounder_eval(*b.grounder, v), 0.0, 1.0);
            });
            b.fixed_truths_built = true;
            break;
        }
    }
}

double CompiledTheory::clause_value(const Clause& c, Vec& scratch) const {
    scratch.resize(c.nodes.size());
    double inv_sum = 0.0;
    double best = 0.0;
    const AtomRef* ref = c.inst.data();
    for (std::int64_t inst = 0; inst < c.ninst; ++inst, ref += c.nslots) {
        for (std::size_t ni = 0; ni < c.nodes.size(); ++ni) {
            const Node& nd = c.nodes[ni];
            switch (nd.op) {
                case Node::Slot: {
                    const AtomRef& r = ref[nd.a];
                    scratch[ni] = preds_[r.pred].truths[r.row];
                    break;
                }
                case Node::Not: scratch[ni] = 1.0 - scratch[nd.a]; break;
                case Node::And: scratch[ni] = std::max(0.0, scratch[nd.a] + scratch[nd.b] - 1.0); break;
                case Node::Or: scratch[ni] = std::min(1.0, scratch[nd.a] + scratch[nd.b]); break;
                case Node::Implies:
                    scratch[ni] = std::min(1.0, 1.0 - scratch[nd.a] + scratch[nd.b]);
                    break;
            }
        }
        const double v = scratch.back();
        if (!c.quantified) return v;
        if (c.existential)
            best = std::max(best, v);
        else
            inv_sum += 1.0 / std::max(v, kTruthFloor);
    }
    if (c.existential) return best;
    return static_cast<double>(c.ninst) / inv_sum;
}

double CompiledTheory::forward(EvalMode mode, const NoiseContext* noise) {
    for (PredBatch& b : preds_) eval_batch(b, mode, noise);

    const std::int64_t nc = static_cast<std::int64_t>(clauses_.size());
    if (nc == 0) throw DataError("satisfiability of an empty clause set");
    parallel_for_dynamic(nc, [&](std::int64_t i) {
        Vec scratch;
        clause_truths_[i] = clause_value(clauses_[i], scratch);
    });
    double inv = 0.0;
    for (double t : clause_truths_) inv += 1.0 / std::max(t, kTruthFloor);
    have_train_tape_ = mode == EvalMode::Train;
    return static_cast<double>(nc) / inv;
}

void CompiledTheory::zero_grads() {
    auto zero_ltn = [](grounders::LtnPredicateParams& g, const grounders::LtnPredicateParams& shape) {
        g.W = Tensor3(shape.k(), shape.mn());
        g.V = Mat(shape.k(), shape.mn());
        g.b.assign(shape.k(), 0.0);
        g.u.assign(shape.k(), 0.0);
    };
    for (LtnEntry& e : ltn_) zero_ltn(e.grad, *e.params);
    for (RwtnEntry& e : rwtn_) {
        e.grad.u = Mat(e.params->R(), e.params->t());
        e.grad.k_out.assign(e.params->t(), 0.0);
    }
}

void CompiledTheory::clause_backward(const Clause& c, double upstream, Vec& vals, Vec& grads) {
    vals.resize(c.nodes.size());
    grads.resize(c.nodes.size());

    // For "forall" clauses: d harmonic/d inst_i needs the clause's inv_sum.
    double inv_sum = 0.0;
    std::int64_t best_inst = 0;
    double best = -1.0;
    const AtomRef* ref = c.inst.data();
    auto eval_instance = [&](const AtomRef* r) {
        for (std::size_t ni = 0; ni < c.nodes.size(); ++ni) {
            const Node& nd = c.nodes[ni];
            switch (nd.op) {
                case Node::Slot: vals[ni] = preds_[r[nd.a].pred].truths[r[nd.a].row]; break;
                case Node::Not: vals[ni] = 1.0 - vals[nd.a]; break;
                case Node::And: vals[ni] = std::max(0.0, vals[nd.a] + vals[nd.b] - 1.0); break;
                case Node::Or: vals[ni] = std::min(1.0, vals[nd.a] + vals[nd.b]); break;
                case Node::Implies: vals[ni] = std::min(1.0, 1.0 - vals[nd.a] + vals[nd.b]); break;
            }
        }
        return vals.back();
    };

    if (c.quantified) {
        for (std::int64_t inst = 0; inst < c.ninst; ++inst, ref += c.nslots) {
            const double v = eval_instance(ref);
            if (c.existential) {
                if (v > best) best = v, best_inst = inst;
            } else {
                inv_sum += 1.0 / std::max(v, kTruthFloor);
            }
        }
    }

    const double hmean = c.quantified && !c.existential ? static_cast<double>(c.ninst) / inv_sum : 0.0;
    ref = c.inst.data();
    for (std::int64_t inst = 0; inst < c.ninst; ++inst, ref += c.nslots) {
        double g_inst;
        const double v = eval_instance(ref);
        if (!c.quantified) {
            g_inst = upstream;
        } else if (c.existential) {
            g_inst = inst == best_inst ? upstream : 0.0;
        } else {
            // d/dv [ N / sum(1/max(v_i, eps)) ] = H^2 / (N max^2), 0 below floor.
            g_inst = v > kTruthFloor
                         ? upstream * hmean * hmean / (static_cast<double>(c.ninst) * v * v)
                         : 0.0;
        }
        if (g_inst == 0.0) continue;

        std::fill(grads.begin(), grads.end(), 0.0);
        grads.back() = g_inst;
        for (std::size_t ni = c.nodes.size(); ni-- > 0;) {
            const Node& nd = c.nodes[ni];
            const double g = grads[ni];
            if (g == 0.0) continue;
            switch (nd.op) {
                case Node::Slot: {
                    const AtomRef& r = ref[nd.a];
                    preds_[r.pred].upstream[r.row] += g;
                    break;
                }
                case Node::Not: grads[nd.a] -= g; break;
                case Node::And:
                    if (vals[nd.a] + vals[nd.b] - 1.0 > 0.0) {
                        grads[nd.a] += g;
                        grads[nd.b] += g;
                    }
                    break;
                case Node::Or:
                    if (vals[nd.a] + vals[nd.b] < 1.0) {
                        grads[nd.a] += g;
                        grads[nd.b] += g;
                    }
                    break;
                case Node::Implies:
                    if (vals[nd.a] > vals[nd.b]) {  // min() inactive side
                        grads[nd.a] -= g;
                        grads[nd.b] += g;
                    }
                    break;
            }
        }
    }
}

void CompiledTheory::backward(double upstream) {
    if (!have_train_tape_) throw DataError("backward() requires a train-mode forward pass");
    for (PredBatch& b : preds_) std::fill(b.upstream.begin(), b.upstream.end(), 0.0);

    // d sat / d clause_j, then per-clause instance backward (serial: fixed
    // accumulation order into the atom upstream slots).
    const double n = static_cast<double>(clauses_.size());
    double inv = 0.0;
    for (double t : clause_truths_) inv += 1.0 / std::max(t, kTruthFloor);
    const double sat = n / inv;
    Vec vals, grads;
    for (std::size_t j = 0; j < clauses_.size(); ++j) {
        const double t = clause_truths_[j];
        if (t <= kTruthFloor) continue;
        const double g_clause = upstream * sat * sat / (n * t * t);
        clause_backward(clauses_[j], g_clause, vals, grads);
    }

    // Per-predicate parameter accumulation: fixed-size atom blocks in
    // parallel, merged in block order.
    constexpr std::int64_t kBlock = 64;
    for (PredBatch& b : preds_) {
        const std::int64_t n_atoms = static_cast<std::int64_t>(b.atom_args.size());
        if (n_atoms == 0 || b.kind == PredBatch::Kind::Fixed) continue;
        if (b.kind == PredBatch::Kind::Ltn) {
            LtnEntry& e = ltn_[b.entry];
            const grounders::LtnPredicateParams& p = *e.params;
            const std::size_t k = p.k(), mn = b.mn;
            const std::int64_t nb = block_count(n_atoms, kBlock);
            std::vector<grounders::LtnPredicateParams> partial(nb);
            parallel_blocks(n_atoms, kBlock, [&](std::int64_t blk, std::int64_t lo, std::int64_t hi) {
                grounders::LtnPredicateParams& g = partial[blk];
                g.W = Tensor3(k, mn);
                g.V = Mat(k, mn);
                g.b.assign(k, 0.0);
                g.u.assign(k, 0.0);
                for (std::int64_t i = lo; i < hi; ++i) {
                    const double gup = b.upstream[i];
                    if (gup == 0.0) continue;
                    const double* v = b.inputs.row(i);
                    const double* hrow = b.h.row(i);
                    const double pv = b.truths[i];
                    const double ds = gup * pv * (1.0 - pv);
                    for (std::size_t q = 0; q < k; ++q) {
                        g.u[q] += ds * hrow[q];
                        const double dz = ds * p.u[q] * (1.0 - hrow[q] * hrow[q]);
                        if (dz == 0.0) continue;
                        g.b[q] += dz;
                        double* gv = g.V.row(q);
                        Mat& gw = g.W.slices[q];
                        for (std::size_t a = 0; a < mn; ++a) {
                            gv[a] += dz * v[a];
                            const double dza = dz * v[a];
                            double* gwrow = gw.row(a);
                            for (std::size_t bb = 0; bb < mn; ++bb) gwrow[bb] += dza * v[bb];
                        }
                    }
                }
            });
            for (const auto& g : partial) {
                for (std::size_t q = 0; q < k; ++q) {
                    e.grad.u[q] += g.u[q];
                    e.grad.b[q] += g.b[q];
                    for (std::size_t a = 0; a < mn; ++a) {
                        e.grad.V.at(q, a) += g.V.at(q, a);
                        const double* src = g.W.slices[q].row(a);
                        double* dst = e.grad.W.slices[q].row(a);
                        for (std::size_t bb = 0; bb < mn; ++bb) dst[bb] += src[bb];
                    }
                }
            }
        } else {
            RwtnEntry& e = rwtn_[b.entry];
            const grounders::RwtnDecoderParams& dec = *e.params;
            const EncoderSlot& slot = encoders_[b.enc_slot];
            const std::size_t R = dec.R(), t = dec.t();
            const std::int64_t nb = block_count(n_atoms, kBlock);
            std::vector<grounders::RwtnDecoderParams> partial(nb);
            parallel_blocks(n_atoms, kBlock, [&](std::int64_t blk, std::int64_t lo, std::int64_t hi) {
                grounders::RwtnDecoderParams& g = partial[blk];
                g.u = Mat(R, t);
                g.k_out.assign(t, 0.0);
                Vec da(t);
                for (std::int64_t i = lo; i < hi; ++i) {
                    const double gup = b.upstream[i];
                    if (gup == 0.0) continue;
                    const double* z = slot.z.row(b.z_row[i]);
                    const double* hrow = b.zh.row(i);
                    const double pv = b.truths[i];
                    const double ds = gup * pv * (1.0 - pv);
                    for (std::size_t j = 0; j < t; ++j) {
                        g.k_out[j] += ds * hrow[j];
                        da[j] = ds * dec.k_out[j] * (1.0 - hrow[j] * hrow[j]);
                    }
                    for (std::size_t r = 0; r < R; ++r) {
                        const double zr = z[r];
                        if (zr == 0.0) continue;
                        double* gu = g.u.row(r);
                        for (std::size_t j = 0; j < t; ++j) gu[j] += zr * da[j];
                    }
                }
            });
            for (const auto& g : partial) {
                for (std::size_t j = 0; j < t; ++j) e.grad.k_out[j] += g.k_out[j];
                for (std::size_t r = 0; r < R; ++r) {
                    const double* src = g.u.row(r);
                    double* dst = e.grad.u.row(r);
                    for (std::size_t j = 0; j < t; ++j) dst[j] += src[j];
                }
            }
        }
    }
}

}  // namespace rwtn::semantics
