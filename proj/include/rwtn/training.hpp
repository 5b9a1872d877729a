#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "rwtn/compiled_theory.hpp"
#include "rwtn/semantics.hpp"

namespace rwtn::training {

struct RmsPropConfig {
    double learning_rate = 1e-3;
    double decay = 0.9;
    double epsilon = 1e-8;
};

struct TrainConfig {
    int epochs = 1000;
    double lambda = 1e-10;  // L2 coefficient over learnable parameters
    RmsPropConfig rmsprop;
    std::string batch_policy = "full";  // all clauses every epoch
    std::uint64_t seed = 0;

    void validate() const;
};

struct TraceRow {
    int epoch;
    double loss;            // noiseless eval-mode loss after the update
    double satisfiability;  // noiseless eval-mode satisfiability
};

/// Per-parameter RMSProp accumulators, keyed by predicate name.
struct OptimizerState {
    std::map<std::string, grounders::LtnPredicateParams> ltn_acc;
    std::map<std::string, grounders::RwtnDecoderParams> rwtn_acc;
    std::int64_t step = 0;
};

struct TrainResult {
    std::vector<TraceRow> trace;
    double final_satisfiability = 0.0;
    OptimizerState optimizer;
};

/// Squared L2 norm of all learnable parameters reachable from the theory.
double learnable_sqnorm(const semantics::GroundedTheory& theory);

/// loss = 1 - satisfiability + lambda * ||learnable params||^2.
double loss_value(semantics::CompiledTheory& ct, double lambda, semantics::EvalMode mode,
                  const semantics::NoiseContext* noise = nullptr);

/// One train-mode forward/backward; gradients of the loss land in the
/// compiled theory's entries (including the 2*lambda*theta term). Returns the
/// train-mode loss.
double loss_gradients(semantics::CompiledTheory& ct, double lambda,
                      const semantics::NoiseContext* noise);

/// Full-batch RMSProp on the best-satisfiability loss. Mutates the theory's
/// learnable grounders in place. Deterministic per (theory, config, seed).
/// Throws DivergenceError when the loss goes non-finite.
TrainResult train(semantics::GroundedTheory& theory, const TrainConfig& cfg);

/// Trains each theory's decoders against a shared frozen encoder, one theory
/// after another. Per-theory updates never touch the encoder, so each result
/// is bit-identical to running train() on that theory alone with the same
/// config. Throws if the theories do not all reference `encoder`.
std::vector<TrainResult> train_shared(
    std::vector<semantics::GroundedTheory*> theories,
    const grounders::RwtnEncoderParams& encoder, const TrainConfig& cfg);

/// Optional closed-form mode: for every RWTN-grounded predicate, keeps the
/// random hidden weights u fixed and fits k_out by (bias-free) ridge
/// regression of the hidden features against the theory's ground literals
/// (targets +/- `target_logit`). Quantified clauses are ignored by the fit.
void ridge_fit_decoders(semantics::GroundedTheory& theory, double lambda,
                        double target_logit = 2.0);

}  // namespace rwtn::training
