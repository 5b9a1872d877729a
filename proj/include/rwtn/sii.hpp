#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "rwtn/scenes.hpp"
#include "rwtn/semantics.hpp"

namespace rwtn::sii {

enum class ModelKind { Ltn, Rwtn, RwtnShared };

std::string model_kind_name(ModelKind k);
ModelKind model_kind_from(const std::string& name);

struct ModelHyper {
    std::size_t k = 6;   // LTN tensor slices
    std::size_t t = 20;  // RWTN hidden units
    reservoir::ReservoirConfig reservoir;  // rho, beta, R, omega, xi
    double init_stddev = 0.1;
    double th = 0.7;  // classification / part-of decision threshold
};

/// A set of predicate grounders over a dataset's class list. Encoders are
/// drawn once per input width from (seed, width), so every predicate of the
/// same width sees bit-identical frozen weights and a shared-encoder model
/// matches per-class models trained with the same seed.
struct SiiModel {
    ModelKind kind = ModelKind::Ltn;
    std::vector<std::string> classes;  // dataset class list (unary predicates)
    std::vector<std::string> trained;  // predicates carrying learnable grounders
    std::string part_of;               // empty when the model has no pair predicate
    grounders::PartWholeTable table;
    ModelHyper hyper;
    std::uint64_t seed = 0;
    std::size_t n = 0;  // grounding-vector length: classes + 4
    semantics::Grounding grounding;  // predicate grounders only (no constants)
    std::vector<std::shared_ptr<const grounders::RwtnEncoderParams>> encoders;
};

std::string box_constant(int id);

/// class_subset: empty = all classes. Shared models take unary predicates
/// only; ltn/rwtn also ground the part-of predicate.
SiiModel build_model(ModelKind kind, const scenes::Dataset& ds, const ModelHyper& hyper,
                     std::uint64_t seed, const std::vector<std::string>& class_subset = {});

/// Crisp grounding of every class (argmax of scores) plus part-of (inclusion
/// ratio against the table), for baselines and consistency checks.
semantics::Grounding crisp_grounding(const scenes::Dataset& ds, double th_ir);

/// Signature over the model's predicates with one constant per box.
fol::Signature build_signature(const SiiModel& model, const std::vector<scenes::Scene>& scs);

struct TheoryOptions {
    int unary_negatives = 3;  // wrong-class literals per box; 0 = all wrong classes
    bool include_part_of = true;       // pair literals (every same-scene non-parent
                                       // ordered pair is a negative)
    bool include_constraints = true;   // mereological axioms
};

/// Literal and constraint clauses over the given scenes, with per-scene
/// domain groups. Copies the model's predicate grounders into the theory;
/// training mutates those copies (encoders stay shared).
semantics::GroundedTheory build_theory(const SiiModel& model, const std::vector<scenes::Scene>& scs,
                                       const TheoryOptions& opt);

/// One-vs-rest theory for a single class: positive literals for its boxes,
/// negative literals where the class is among the box's sampled negatives.
semantics::GroundedTheory build_class_theory(const SiiModel& model,
                                             const std::vector<scenes::Scene>& scs,
                                             const std::string& cls, int unary_negatives);

/// Copies trained predicate grounders back from a theory into the model.
void absorb_trained(SiiModel& model, const semantics::GroundedTheory& theory);

/// The sampled wrong classes for a box (see TheoryOptions::unary_negatives);
/// keyed by (seed, box id) so every theory built at one seed agrees.
std::vector<int> sampled_negatives(std::uint64_t seed, int box_id, int true_class, int n_classes,
                                   int count);

}  // namespace rwtn::sii
