#include "rwtn/reservoir.hpp"

#include <cmath>

#include "rwtn/rng.hpp"

namespace rwtn::reservoir {

void ReservoirConfig::validate() const {
    if (!(rho > 0.0)) throw ConfigError("reservoir: rho must be > 0");
    if (!(beta > 0.0 && beta <= 1.0)) throw ConfigError("reservoir: beta must be in (0, 1]");
    if (R < 1) throw ConfigError("reservoir: R must be >= 1");
    if (omega < 0.0) throw ConfigError("reservoir: omega must be >= 0");
    if (xi < 0.0) throw ConfigError("reservoir: xi must be >= 0");
}

Mat gen_sparse_matrix(std::size_t rows, std::size_t cols, double beta, std::uint64_t seed) {
    RngStream rng = RngStream::named(seed, "sparse-matrix");
    Mat m(rows, cols);
    for (std::size_t i = 0; i < rows * cols; ++i)
        if (rng.bernoulli(beta)) m.a[i] = rng.uniform(-1.0, 1.0);
    return m;
}

Mat scale_to_spectral_radius(Mat m, double rho) {
    // Tight tolerance: rescaling must be idempotent to ~1e-12 relative.
    const double measured = spectral_radius(m, 1e-13);
    if (measured < 1e-12) throw ConfigError("scale_to_spectral_radius: matrix has zero spectral radius");
    const double s = rho / measured;
    for (double& x : m.a) x *= s;
    return m;
}

Mat scaled_sparse_matrix(std::size_t n, double beta, double rho, std::uint64_t seed) {
    RngStream stream(seed);
    for (int attempt = 0; attempt < 64; ++attempt) {
        Mat draw = gen_sparse_matrix(n, n, beta, stream.next_u64());
        try {
            return scale_to_spectral_radius(std::move(draw), rho);
        } catch (const ConfigError&) {
        } catch (const ConvergenceError&) {
        }
    }
    throw ConfigError("scaled_sparse_matrix: no measurable draw after 64 attempts; "
                      "increase beta or the matrix dimension");
}

Mat gen_input_weights(std::size_t rows, std::size_t cols, double omega, std::uint64_t seed) {
    RngStream rng = RngStream::named(seed, "input-weights");
    Mat m(rows, cols);
    for (std::size_t i = 0; i < rows * cols; ++i) {
        const double mag = rng.uniform(0.0, omega);
        m.a[i] = rng.bernoulli(0.5) ? mag : -mag;
    }
    return m;
}

EsnParams make_esn(const ReservoirConfig& cfg, std::size_t d_in) {
    cfg.validate();
    EsnParams p;
    p.W_in = gen_input_weights(cfg.R, d_in, cfg.omega, RngStream::named(cfg.seed, "esn-in").next_u64());
    p.W_r = scaled_sparse_matrix(cfg.R, cfg.beta, cfg.rho,
                                 RngStream::named(cfg.seed, "esn-rec").next_u64());
    return p;
}

Mat esn_run(const EsnParams& params, const std::vector<Vec>& inputs, double xi,
            std::uint64_t seed) {
    const std::size_t r = params.W_r.rows;
    if (params.W_r.cols != r) throw DimensionError("esn_run: W_r must be square");
    if (params.W_in.rows != r) throw DimensionError("esn_run: W_in rows must equal R");
    RngStream noise = RngStream::named(seed, "esn-noise");
    Mat h(inputs.size(), r);
    Vec state(r, 0.0);
    for (std::size_t t = 0; t < inputs.size(); ++t) {
        Vec pre = matvec(params.W_in, inputs[t]);
        Vec rec = matvec(params.W_r, state);
        for (std::size_t i = 0; i < r; ++i) {
            double z = pre[i] + rec[i];
            if (xi > 0.0) z += xi * noise.normal();
            state[i] = tanh_strict(z);
            h.at(t, i) = state[i];
        }
    }
    return h;
}

RidgeReadout ridge_readout(const Mat& states, const Mat& targets, double lambda) {
    if (states.rows != targets.rows)
        throw DimensionError("ridge_readout: row count mismatch between states and targets");
    if (lambda < 0.0) throw ConfigError("ridge_readout: lambda must be >= 0");
    const std::size_t n = states.rows, r = states.cols, d = targets.cols;

    // Augment with a bias column; solve (H'H + 2 lambda D) theta = H'Y with
    // D = diag(1,...,1,0) so the bias is unpenalized.
    Mat gram(r + 1, r + 1);
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = i; j < r; ++j) {
            double s = 0.0;
            for (std::size_t t = 0; t < n; ++t) s += states.at(t, i) * states.at(t, j);
            gram.at(i, j) = s;
            gram.at(j, i) = s;
        }
    for (std::size_t i = 0; i < r; ++i) {
        double s = 0.0;
        for (std::size_t t = 0; t < n; ++t) s += states.at(t, i);
        gram.at(i, r) = s;
        gram.at(r, i) = s;
    }
    gram.at(r, r) = static_cast<double>(n);
    for (std::size_t i = 0; i < r; ++i) gram.at(i, i) += 2.0 * lambda;

    Mat rhs(r + 1, d);
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t c = 0; c < d; ++c) {
            double s = 0.0;
            for (std::size_t t = 0; t < n; ++t) s += states.at(t, i) * targets.at(t, c);
            rhs.at(i, c) = s;
        }
    for (std::size_t c = 0; c < d; ++c) {
        double s = 0.0;
        for (std::size_t t = 0; t < n; ++t) s += targets.at(t, c);
        rhs.at(r, c) = s;
    }

    Mat theta = cholesky_solve(std::move(gram), std::move(rhs));
    RidgeReadout out;
    out.V_o = Mat(d, r);
    out.v_o = Vec(d, 0.0);
    for (std::size_t c = 0; c < d; ++c) {
        for (std::size_t i = 0; i < r; ++i) out.V_o.at(c, i) = theta.at(i, c);
        out.v_o[c] = theta.at(r, c);
    }
    return out;
}

double ridge_objective(const RidgeReadout& r, const Mat& states, const Mat& targets,
                       double lambda) {
    double obj = 0.0;
    for (std::size_t t = 0; t < states.rows; ++t) {
        for (std::size_t c = 0; c < targets.cols; ++c) {
            double pred = r.v_o[c];
            for (std::size_t i = 0; i < states.cols; ++i)
                pred += r.V_o.at(c, i) * states.at(t, i);
            const double e = pred - targets.at(t, c);
            obj += 0.5 * e * e;
        }
    }
    for (double w : r.V_o.a) obj += lambda * w * w;
    return obj;
}

}  // namespace rwtn::reservoir
