#pragma once

#include <cstdint>
#include <vector>

#include "rwtn/linalg.hpp"
#include "rwtn/reservoir.hpp"
#include "rwtn/rng.hpp"

namespace rwtn::grounders {

/// Trained tensor-network predicate: truth = sigmoid(u' tanh(v'W[1:k]v + Vv + b)).
/// Every field is learnable.
struct LtnPredicateParams {
    Tensor3 W;  // k x mn x mn
    Mat V;      // k x mn
    Vec b;      // k
    Vec u;      // k

    std::size_t k() const { return u.size(); }
    std::size_t mn() const { return V.cols; }
    std::size_t param_count() const;
    void check() const;

    static LtnPredicateParams init(std::size_t k, std::size_t mn, double stddev, RngStream rng);

    bool operator==(const LtnPredicateParams&) const = default;
};

/// Frozen random encoder: R-slice tensor plus input weights, drawn by the
/// reservoir recipe (per-slice spectral radius rho, sparsity beta, input
/// scaling omega). Never receives gradients.
struct RwtnEncoderParams {
    Tensor3 W_res;  // R x mn x mn
    Mat V_in;       // R x mn
    double xi = 0.0;
    std::uint64_t seed = 0;

    std::size_t R() const { return V_in.rows; }
    std::size_t mn() const { return V_in.cols; }
    std::size_t weight_count() const { return R() * mn() * mn() + R() * mn(); }

    /// FNV-1a over the weight bytes in storage order.
    std::uint64_t content_hash() const;

    static RwtnEncoderParams generate(std::size_t mn, const reservoir::ReservoirConfig& cfg);
};

/// Trained decoder on top of a frozen encoder: a bias-free single-hidden-layer
/// net, hidden weights u (R x t) and output weights k_out (t).
struct RwtnDecoderParams {
    Mat u;      // R x t
    Vec k_out;  // t

    std::size_t R() const { return u.rows; }
    std::size_t t() const { return u.cols; }
    std::size_t param_count() const { return u.a.size() + k_out.size(); }

    static RwtnDecoderParams init(std::size_t R, std::size_t t, double stddev, RngStream rng);

    bool operator==(const RwtnDecoderParams&) const = default;
};

/// Function symbols ground to affine maps: f(v) = M v + N.
struct LinearFunctionParams {
    Mat M;  // n x mn
    Vec N;  // n
};

Vec ground_function(const LinearFunctionParams& p, const Vec& args);

double ltn_predicate(const LtnPredicateParams& p, const Vec& v);

/// noise may be null (deterministic evaluation) or an R-vector added to the
/// inner pre-activation.
double rwtn_predicate(const RwtnEncoderParams& enc, const RwtnDecoderParams& dec, const Vec& v,
                      const Vec* noise);

/// Forward passes that keep the intermediates the backward pass needs.
struct LtnForward {
    Vec h;     // k, tanh layer
    double p;  // truth
};
LtnForward ltn_forward(const LtnPredicateParams& p, const Vec& v);

/// The encoder half of the RWTN forward: v'W[1:R]v + V_in v. Constant for a
/// fixed input, so callers cache it across epochs.
Vec rwtn_preactivation(const RwtnEncoderParams& enc, const Vec& v);

struct RwtnForward {
    Vec z;     // R, tanh of (pre + noise)
    Vec h;     // t, hidden tanh
    double p;  // truth
};
RwtnForward rwtn_forward_from_pre(const RwtnDecoderParams& dec, const Vec& pre, const Vec* noise);

// Raw-pointer kernels shared by the scalar wrappers above and the batched
// evaluator, so both produce bit-identical values. h_out may be null.
double ltn_forward_raw(const LtnPredicateParams& p, const double* v, double* h_out);
void rwtn_pre_raw(const RwtnEncoderParams& enc, const double* v, double* pre_out);
double rwtn_decode_raw(const RwtnDecoderParams& dec, const double* z, double* h_out);

/// 0/1 class-compatibility matrix over P1 x P1; w(i, j) = 1 when class i is a
/// part of class j. Whole-whole and part-part entries are 0.
struct PartWholeTable {
    std::size_t size = 0;
    std::vector<std::uint8_t> w;

    PartWholeTable() = default;
    explicit PartWholeTable(std::size_t n) : size(n), w(n * n, 0) {}

    std::uint8_t at(std::size_t i, std::size_t j) const { return w[i * size + j]; }
    void set(std::size_t i, std::size_t j) { w[i * size + j] = 1; }

    /// A class is a part if it is a part of something, a whole otherwise.
    bool is_part(std::size_t c) const;
    bool is_whole(std::size_t c) const { return !is_part(c); }
    void validate() const;
};

/// Crisp type grounding on a feature vector laid out scores-first:
/// 1 iff class_index is the argmax of the first p1_count entries
/// (lowest index wins ties).
double crisp_type(const Vec& x, std::size_t class_index, std::size_t p1_count);

/// Crisp part-of grounding on a concatenated pair vector (child first).
/// 1 iff ir(b, b') * max_ij(w_ij x_i x'_j) >= th_ir.
double crisp_part_of(const Vec& pair_v, const PartWholeTable& table, double th_ir,
                     std::size_t p1_count);

/// Learnable-parameter counts. mn = n * m.
std::size_t ltn_param_count(std::size_t n, std::size_t m, std::size_t k);
std::size_t rwtn_param_count(std::size_t R, std::size_t t);

/// Stored-weight totals for i classifiers without and with a shared encoder.
struct SharedSpace {
    std::size_t unshared;
    std::size_t shared;
};
SharedSpace shared_space(std::size_t n, std::size_t m, std::size_t R, std::size_t t,
                         std::size_t i);

}  // namespace rwtn::grounders
