#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "rwtn/errors.hpp"

namespace rwtn {

using Vec = std::vector<double>;

/// Dense row-major matrix of 64-bit floats.
struct Mat {
    std::size_t rows = 0;
    std::size_t cols = 0;
    Vec a;

    Mat() = default;
    Mat(std::size_t r, std::size_t c) : rows(r), cols(c), a(r * c, 0.0) {}

    double& at(std::size_t r, std::size_t c) { return a[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return a[r * cols + c]; }
    const double* row(std::size_t r) const { return a.data() + r * cols; }
    double* row(std::size_t r) { return a.data() + r * cols; }

    static Mat identity(std::size_t n) {
        Mat m(n, n);
        for (std::size_t i = 0; i < n; ++i) m.at(i, i) = 1.0;
        return m;
    }

    bool operator==(const Mat&) const = default;
};

/// Order-3 tensor stored as a stack of square slices of equal dimension.
struct Tensor3 {
    std::vector<Mat> slices;

    Tensor3() = default;
    Tensor3(std::size_t k, std::size_t dim) : slices(k, Mat(dim, dim)) {}

    std::size_t order() const { return slices.size(); }
    std::size_t dim() const { return slices.empty() ? 0 : slices[0].rows; }

    void check() const {
        for (const Mat& s : slices)
            if (s.rows != s.cols || s.rows != dim())
                throw DimensionError("Tensor3: slices must be square and uniformly sized");
    }

    bool operator==(const Tensor3&) const = default;
};

double dot(const Vec& x, const Vec& y);

/// y = M x.
Vec matvec(const Mat& m, const Vec& x);

/// y = M x + b.
Vec affine(const Mat& m, const Vec& x, const Vec& b);

/// Elementwise tanh, clamped strictly inside (-1, 1).
Vec tanh_map(const Vec& x);
double tanh_strict(double x);

/// Logistic function, clamped strictly inside (0, 1). sigmoid(0) == 0.5 exactly.
double sigmoid(double x);

/// out[i] = v' * W_i * v for each slice i. Parallel across slices; each
/// slice's accumulation order is fixed, so results are bit-reproducible.
Vec bilinear_form(const Vec& v, const Tensor3& w);

/// Magnitude of the dominant eigenvalue via power iteration with a two-step
/// recurrence fit (handles complex conjugate and +/- real dominant pairs).
/// Deterministic given seed. Throws ConvergenceError if the estimate does not
/// settle within max_iters, DimensionError for non-square input.
double spectral_radius(const Mat& m, double tol = 1e-10, std::uint64_t seed = 0,
                       int max_iters = 50000);

/// Solves A X = B for symmetric positive definite A via Cholesky.
/// Throws SingularSystemError when a pivot collapses.
Mat cholesky_solve(Mat a, Mat b);

bool all_finite(const Vec& x);
bool all_finite(const Mat& m);

}  // namespace rwtn
