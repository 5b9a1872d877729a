#pragma once

#include <cstdint>
#include <vector>

#include "rwtn/linalg.hpp"

namespace rwtn::reservoir {

/// Random-weight recipe: target spectral radius rho, nonzero-connection
/// fraction beta, unit count R, input-scaling half-range omega, state-noise
/// standard deviation xi.
struct ReservoirConfig {
    double rho = 0.6;
    double beta = 0.25;
    int R = 200;
    double omega = 0.5;
    double xi = 0.01;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Echo-state network weights. W_in and W_r are frozen after generation;
/// only the readout (V_o, v_o) is learnable.
struct EsnParams {
    Mat W_in;  // R x d_in
    Mat W_r;   // R x R
    Mat V_o;   // d_out x R
    Vec v_o;   // d_out
};

/// Each entry is nonzero with probability beta, nonzero values uniform on
/// [-1, 1]. Deterministic per seed.
Mat gen_sparse_matrix(std::size_t rows, std::size_t cols, double beta, std::uint64_t seed);

/// Rescales M so its measured spectral radius equals rho (within the power
/// iteration tolerance). Throws ConfigError for an effectively zero matrix.
Mat scale_to_spectral_radius(Mat m, double rho);

/// Sparse draw scaled to the target radius. Draws whose radius is zero or
/// whose dominant eigenvalues tie in magnitude (small matrices draw cycles)
/// cannot be measured by the power iteration; they are redrawn from the
/// stream, deterministically, up to a bounded number of attempts.
Mat scaled_sparse_matrix(std::size_t n, double beta, double rho, std::uint64_t seed);

/// Entry magnitudes uniform on [0, omega], signs fair Bernoulli.
/// Deterministic per seed.
Mat gen_input_weights(std::size_t rows, std::size_t cols, double omega, std::uint64_t seed);

/// Generates the frozen part of an ESN for the given input width.
EsnParams make_esn(const ReservoirConfig& cfg, std::size_t d_in);

/// Runs h(t) = tanh(W_in x(t) + W_r h(t-1) + noise_t) from h(0) = 0 and
/// returns the states as rows. noise_t is i.i.d. N(0, xi^2) per unit,
/// deterministic per seed; xi = 0 disables it.
Mat esn_run(const EsnParams& params, const std::vector<Vec>& inputs, double xi,
            std::uint64_t seed);

struct RidgeReadout {
    Mat V_o;  // d_out x R
    Vec v_o;  // d_out
};

/// Minimizes 1/2 ||V_o h + v_o - y||^2 + lambda ||V_o||^2 over all rows via
/// the bias-augmented normal equations (Cholesky). The bias column is not
/// penalized. Throws SingularSystemError when lambda = 0 and the states are
/// rank-deficient.
RidgeReadout ridge_readout(const Mat& states, const Mat& targets, double lambda);

/// The ridge objective, summed over rows. Exposed so independent optimizers
/// can be compared against the closed form.
double ridge_objective(const RidgeReadout& r, const Mat& states, const Mat& targets,
                       double lambda);

}  // namespace rwtn::reservoir
