#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "rwtn/semantics.hpp"

namespace rwtn::semantics {

/// Batched evaluator for a grounded theory. Ground atoms are deduplicated
/// into per-predicate batches evaluated by parallel kernels; clause truths
/// are scalar programs over the atom table. Aggregation orders match the
/// recursive evaluator exactly, so both paths produce bit-identical truth
/// values; the recursive path is the serial reference.
///
/// Restrictions (trainer scope): clauses must be ground or carry one
/// top-level quantifier prefix over a quantifier-free body, and terms must
/// be variables or constants.
class CompiledTheory {
public:
    explicit CompiledTheory(GroundedTheory& theory);

    CompiledTheory(const CompiledTheory&) = delete;
    CompiledTheory& operator=(const CompiledTheory&) = delete;

    /// Satisfiability under the current parameters. Train mode stores the
    /// tapes backward() consumes and applies keyed noise draws.
    double forward(EvalMode mode, const NoiseContext* noise = nullptr);

    void zero_grads();

    /// Accumulates upstream * d(satisfiability)/d(learnable params) into the
    /// gradient entries. Requires a preceding train-mode forward().
    void backward(double upstream);

    struct LtnEntry {
        std::string name;
        grounders::LtnPredicateParams* params;  // into theory.grounding
        grounders::LtnPredicateParams grad;
    };
    struct RwtnEntry {
        std::string name;
        grounders::RwtnDecoderParams* params;
        const grounders::RwtnEncoderParams* encoder;
        grounders::RwtnDecoderParams grad;
    };

    std::vector<LtnEntry>& ltn_entries() { return ltn_; }
    std::vector<RwtnEntry>& rwtn_entries() { return rwtn_; }

    const Vec& clause_truths() const { return clause_truths_; }
    std::size_t atom_count() const;

private:
    // Per-encoder state shared by every predicate grounded through the same
    // frozen encoder (all unary predicates of an rwtn model, for instance).
    // Rows are distinct (c1, c2) argument tuples; noise draws key off those
    // tuples, so one z row serves every predicate that looks at the tuple.
    struct EncoderSlot {
        const grounders::RwtnEncoderParams* enc = nullptr;
        std::map<std::pair<std::int32_t, std::int32_t>, std::int32_t> rows;
        std::vector<std::array<std::int32_t, 2>> row_args;
        Mat inputs;  // rows x mn
        Mat pre;     // rows x R, built once
        Mat z_eval;  // tanh(pre), built once
        Mat z;       // train-mode rows, refreshed per (seed, epoch)
        bool pre_built = false;
        bool z_valid = false;
        bool z_noisy = false;
        std::uint64_t z_seed = 0;
        std::uint64_t z_epoch = 0;
    };

    struct PredBatch {
        std::string name;
        PredicateGrounder* grounder;
        std::size_t mn = 0;
        std::vector<std::array<std::int32_t, 2>> atom_args;  // dense const ids, -1 if unary
        std::map<std::pair<std::int32_t, std::int32_t>, std::int32_t> index;
        Mat inputs;   // atoms x mn (LTN / fixed kinds)
        Vec truths;
        Vec upstream;
        Mat h;        // LTN tape: atoms x k
        Mat zh;       // RWTN train tape: atoms x t
        int enc_slot = -1;                 // RWTN: shared encoder state
        std::vector<std::int32_t> z_row;   // RWTN: per-atom row in the slot
        bool fixed_truths_built = false;   // crisp / fn grounders never change
        int entry = -1;                    // index into ltn_ / rwtn_
        enum class Kind { Ltn, Rwtn, Fixed } kind = Kind::Fixed;
    };

    struct Node {
        enum Op : std::uint8_t { Slot, Not, And, Or, Implies };
        Op op;
        std::int32_t a = -1;  // child index or slot index
        std::int32_t b = -1;
    };

    struct AtomRef {
        std::int32_t pred;
        std::int32_t row;
    };

    struct Clause {
        std::vector<Node> nodes;  // postorder, root last
        std::int32_t nslots = 0;
        std::vector<AtomRef> inst;  // ninst x nslots
        std::int64_t ninst = 0;
        bool quantified = false;
        bool existential = false;
    };

    int intern_atom(std::size_t pred, std::int32_t c1, std::int32_t c2);
    void compile_clause(const fol::Formula& f);
    void prepare_encoder_slot(EncoderSlot& slot, EvalMode mode, const NoiseContext* noise);
    void eval_batch(PredBatch& b, EvalMode mode, const NoiseContext* noise);
    double clause_value(const Clause& c, Vec& scratch) const;
    void clause_backward(const Clause& c, double upstream, Vec& vals, Vec& grads);

    GroundedTheory* theory_;
    std::vector<std::string> const_names_;
    std::vector<const Vec*> const_vecs_;
    std::map<std::string, std::int32_t> const_ids_;
    std::vector<std::vector<std::int32_t>> groups_;

    std::vector<PredBatch> preds_;
    std::vector<EncoderSlot> encoders_;
    std::map<std::string, std::size_t> pred_ids_;
    std::vector<Clause> clauses_;
    Vec clause_truths_;

    std::vector<LtnEntry> ltn_;
    std::vector<RwtnEntry> rwtn_;
    bool have_train_tape_ = false;
};

}  // namespace rwtn::semantics
