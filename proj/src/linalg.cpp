#include "rwtn/linalg.hpp"

#include <cmath>
#include <limits>

#include "rwtn/parallel.hpp"
#include "rwtn/rng.hpp"

namespace rwtn {

double dot(const Vec& x, const Vec& y) {
    if (x.size() != y.size()) throw DimensionError("dot: length mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) acc += x[i] * y[i];
    return acc;
}

Vec matvec(const Mat& m, const Vec& x) {
    if (m.cols != x.size()) throw DimensionError("matvec: dimension mismatch");
    Vec y(m.rows, 0.0);
    for (std::size_t r = 0; r < m.rows; ++r) {
        const double* row = m.row(r);
        double acc = 0.0;
        for (std::size_t c = 0; c < m.cols; ++c) acc += row[c] * x[c];
        y[r] = acc;
    }
    return y;
}

Vec affine(const Mat& m, const Vec& x, const Vec& b) {
    if (m.rows != b.size()) throw DimensionError("affine: bias length mismatch");
    Vec y = matvec(m, x);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += b[i];
    return y;
}

double tanh_strict(double x) {
    double t = std::tanh(x);
    if (t >= 1.0) return std::nextafter(1.0, 0.0);
    if (t <= -1.0) return std::nextafter(-1.0, 0.0);
    return t;
}

Vec tanh_map(const Vec& x) {
    Vec y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = tanh_strict(x[i]);
    return y;
}

double sigmoid(double x) {
    double s;
    if (x >= 0.0) {
        s = 1.0 / (1.0 + std::exp(-x));
    } else {
        double e = std::exp(x);
        s = e / (1.0 + e);
    }
    if (s >= 1.0) return std::nextafter(1.0, 0.0);
    if (s <= 0.0) return std::numeric_limits<double>::denorm_min();
    return s;
}

Vec bilinear_form(const Vec& v, const Tensor3& w) {
    w.check();
    if (w.order() > 0 && v.size() != w.dim())
        throw DimensionError("bilinear_form: vector length does not match slice dimension");
    const std::size_t k = w.order();
    const std::size_t d = v.size();
    Vec out(k, 0.0);
    const bool heavy = k * d * d > 16384;
    auto slice_value = [&](std::int64_t i) {
        const Mat& s = w.slices[static_cast<std::size_t>(i)];
        double acc = 0.0;
        for (std::size_t a = 0; a < d; ++a) {
            const double* row = s.row(a);
            double racc = 0.0;
            for (std::size_t b = 0; b < d; ++b) racc += row[b] * v[b];
            acc += v[a] * racc;
        }
        out[static_cast<std::size_t>(i)] = acc;
    };
    if (heavy) {
        parallel_for(static_cast<std::int64_t>(k), slice_value);
    } else {
        for (std::size_t i = 0; i < k; ++i) slice_value(static_cast<std::int64_t>(i));
    }
    return out;
}

namespace {

double norm2(const Vec& x) { return std::sqrt(dot(x, x)); }

// Least-squares fit u ~ p*w + q*v, then the dominant-modulus root of
// z^2 - p z - q. For a complex conjugate pair the root product is -q.
// Only trustworthy while (v, w) stay well-conditioned, i.e. while at least
// two modes survive in the iterate; once the iteration has collapsed onto a
// single eigenvector the Rayleigh quotient takes over.
bool recurrence_estimate(const Vec& v, const Vec& w, const Vec& u, double* est) {
    const double ww = dot(w, w), wv = dot(w, v), vv = dot(v, v);
    const double wu = dot(w, u), vu = dot(v, u);
    const double det = ww * vv - wv * wv;
    if (det <= 1e-8 * ww * vv || ww == 0.0 || vv == 0.0) return false;
    const double p = (vv * wu - wv * vu) / det;
    const double q = (ww * vu - wv * wu) / det;
    const double disc = p * p + 4.0 * q;
    if (disc >= 0.0) {
        const double r = std::sqrt(disc);
        *est = std::max(std::abs((p + r) / 2.0), std::abs((p - r) / 2.0));
    } else {
        *est = std::sqrt(-q);
    }
    return std::isfinite(*est);
}

}  // namespace

double spectral_radius(const Mat& m, double tol, std::uint64_t seed, int max_iters) {
    if (m.rows != m.cols) throw DimensionError("spectral_radius: matrix must be square");
    if (m.rows == 0) throw DimensionError("spectral_radius: empty matrix");
    const std::size_t n = m.rows;

    RngStream rng = RngStream::named(seed, "spectral-radius");
    auto random_unit = [&]() {
        Vec v(n);
        for (std::size_t i = 0; i < n; ++i) v[i] = rng.uniform(-1.0, 1.0);
        double nv = norm2(v);
        if (nv == 0.0) v[0] = 1.0, nv = 1.0;
        for (double& x : v) x /= nv;
        return v;
    };

    Vec v = random_unit();
    Vec w = matvec(m, v);
    int restarts = 0;
    double prev = -1.0;
    int stable = 0;
    for (int iter = 0; iter < max_iters; ++iter) {
        const double nw = norm2(w);
        if (nw < 1e-300) {
            // Landed in (or near) the kernel. A nilpotent-like matrix keeps
            // collapsing from any start; report radius 0 after a few tries.
            if (++restarts > 3) return 0.0;
            v = random_unit();
            w = matvec(m, v);
            prev = -1.0;
            stable = 0;
            continue;
        }
        Vec u = matvec(m, w);
        double est;
        if (!recurrence_estimate(v, w, u, &est)) {
            // Near-collapsed onto one eigenvector: the Rayleigh quotient
            // converges quadratically from here.
            est = std::abs(dot(v, w) / dot(v, v));
        }
        if (prev >= 0.0 && std::abs(est - prev) <= tol * std::max(1.0, est)) {
            if (++stable >= 3) return est;
        } else {
            stable = 0;
        }
        prev = est;
        for (std::size_t i = 0; i < n; ++i) {
            v[i] = w[i] / nw;
            u[i] /= nw;
        }
        w.swap(u);
    }
    throw ConvergenceError("spectral_radius: no convergence within iteration cap");
}

Mat cholesky_solve(Mat a, Mat b) {
    if (a.rows != a.cols) throw DimensionError("cholesky_solve: A must be square");
    if (a.rows != b.rows) throw DimensionError("cholesky_solve: A and B row mismatch");
    const std::size_t n = a.rows;
    double scale = 0.0;
    for (std::size_t i = 0; i < n; ++i) scale = std::max(scale, std::abs(a.at(i, i)));
    if (scale == 0.0) throw SingularSystemError("cholesky_solve: zero matrix");

    // In-place lower Cholesky factor.
    for (std::size_t j = 0; j < n; ++j) {
        double d = a.at(j, j);
        for (std::size_t k = 0; k < j; ++k) d -= a.at(j, k) * a.at(j, k);
        if (d <= scale * 1e-14)
            throw SingularSystemError("cholesky_solve: matrix not positive definite");
        const double l = std::sqrt(d);
        a.at(j, j) = l;
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = a.at(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= a.at(i, k) * a.at(j, k);
            a.at(i, j) = s / l;
        }
    }
    // Forward then back substitution per column of B.
    for (std::size_t c = 0; c < b.cols; ++c) {
        for (std::size_t i = 0; i < n; ++i) {
            double s = b.at(i, c);
            for (std::size_t k = 0; k < i; ++k) s -= a.at(i, k) * b.at(k, c);
            b.at(i, c) = s / a.at(i, i);
        }
        for (std::size_t ii = n; ii-- > 0;) {
            double s = b.at(ii, c);
            for (std::size_t k = ii + 1; k < n; ++k) s -= a.at(k, ii) * b.at(k, c);
            b.at(ii, c) = s / a.at(ii, ii);
        }
    }
    return b;
}

bool all_finite(const Vec& x) {
    for (double v : x)
        if (!std::isfinite(v)) return false;
    return true;
}

bool all_finite(const Mat& m) { return all_finite(m.a); }

}  // namespace rwtn
