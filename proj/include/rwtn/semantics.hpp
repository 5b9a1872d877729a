#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "rwtn/fol.hpp"
#include "rwtn/grounders.hpp"
#include "rwtn/linalg.hpp"

namespace rwtn::semantics {

// Instance and clause truths are floored here before harmonic aggregation;
// a zero would otherwise make the mean undefined and kill gradients.
inline constexpr double kTruthFloor = 1e-6;

enum class EvalMode { Train, Eval };

enum class Connective { Not, And, Or, Implies };

/// Lukasiewicz semantics: ~a = 1-a, a&b = max(0,a+b-1), a|b = min(1,a+b),
/// a->b = min(1,1-a+b). b is ignored for Not.
double eval_connectives(Connective op, double a, std::optional<double> b = std::nullopt);

double harmonic_mean_floored(const std::vector<double>& truths);

/// Predicate grounders. Ltn and Rwtn carry learnable weights; the crisp and
/// function-backed ones are fixed.
struct LtnGrounder {
    grounders::LtnPredicateParams params;
};
struct RwtnGrounder {
    std::shared_ptr<const grounders::RwtnEncoderParams> encoder;  // frozen, shareable
    grounders::RwtnDecoderParams decoder;
};
struct CrispTypeGrounder {
    std::size_t class_index;
    std::size_t p1_count;
};
struct CrispPartOfGrounder {
    grounders::PartWholeTable table;
    double th_ir;
    std::size_t p1_count;
};
struct FnGrounder {
    std::function<double(const Vec&)> fn;
};

using PredicateGrounder =
    std::variant<LtnGrounder, RwtnGrounder, CrispTypeGrounder, CrispPartOfGrounder, FnGrounder>;

/// Train-mode noise addressing. Draws are keyed by (seed, epoch, argument
/// constant ids); evaluation order and thread count never change them.
/// Anonymous domain elements fall back to an ordinal key.
struct NoiseContext {
    std::uint64_t seed = 0;
    std::uint64_t epoch = 0;
};

/// The unit-scale noise vector for an atom over constants (c1, c2); scaled by
/// the encoder's xi at the use site. c2 = -1 for unary atoms.
Vec noise_draw(const NoiseContext& ctx, std::size_t r, std::int64_t c1, std::int64_t c2);

/// Evaluates a grounder on a concatenated argument vector. noise is null for
/// deterministic evaluation.
double grounder_eval(const PredicateGrounder& g, const Vec& v, const Vec* noise = nullptr);

struct Grounding {
    std::map<std::string, Vec> constant_map;
    std::map<std::string, grounders::LinearFunctionParams> function_map;
    std::map<std::string, PredicateGrounder> predicate_map;
};

/// Closed clauses plus a grounding; quantifiers range over domain_groups
/// (per-scene constant sets), tuples drawn within one group.
struct GroundedTheory {
    fol::Signature sig;
    std::vector<fol::Formula> clauses;
    Grounding grounding;
    std::vector<std::vector<std::string>> domain_groups;
};

/// Recursive evaluator over a flat anonymous domain. Atoms ground through the
/// predicate map on concatenated argument vectors; ForAll aggregates by the
/// floored harmonic mean over all tuple substitutions, Exists by max. This is
/// the serial reference the compiled evaluator is checked against.
double eval_formula(const fol::Formula& f, const Grounding& g, const std::vector<Vec>& domain,
                    EvalMode mode, const NoiseContext* noise = nullptr);

/// Truth of one clause of a theory: quantified clauses aggregate tuple
/// instances within each domain group (harmonic mean across all instances of
/// all groups); ground clauses evaluate directly.
double eval_clause(const GroundedTheory& theory, const fol::Formula& clause, EvalMode mode,
                   const NoiseContext* noise = nullptr);

/// Floored harmonic mean of all clause truths, in clause order.
double satisfiability(const GroundedTheory& theory, EvalMode mode,
                      const NoiseContext* noise = nullptr);

/// Mereological axiom set for the part-of relation:
///   (a) asymmetry,
///   (b) a part is never part of an incompatible whole,
///   (c) wholes are not parts of anything,
///   (d) nothing is a part of a part (parts are atomic).
/// Clauses overlapping between (c) and (d) are emitted once. The signature
/// must declare exactly one binary predicate; table row/column i corresponds
/// to the i-th unary predicate.
std::vector<fol::Formula> mereology_constraints(const grounders::PartWholeTable& table,
                                                const fol::Signature& sig);

}  // namespace rwtn::semantics
