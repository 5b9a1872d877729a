#pragma once

// Naive serial reference implementations of the numeric kernels. These are
// the ground truth the parallel kernels are tested against, and the baseline
// the benchmark tool compares against. Keep them obvious; never optimize.

#include <cmath>

#include "rwtn/linalg.hpp"

namespace rwtn::ref {

inline Vec matvec(const Mat& m, const Vec& x) {
    Vec y(m.rows, 0.0);
    for (std::size_t r = 0; r < m.rows; ++r)
        for (std::size_t c = 0; c < m.cols; ++c) y[r] += m.at(r, c) * x[c];
    return y;
}

/// Triple loop: out[i] = sum_{a,b} v[a] * W[i][a][b] * v[b].
inline Vec bilinear_form(const Vec& v, const Tensor3& w) {
    Vec out(w.order(), 0.0);
    for (std::size_t i = 0; i < w.order(); ++i)
        for (std::size_t a = 0; a < v.size(); ++a)
            for (std::size_t b = 0; b < v.size(); ++b)
                out[i] += v[a] * w.slices[i].at(a, b) * v[b];
    return out;
}

/// Batched bilinear + affine encoder pass, one input row at a time.
inline Mat encoder_preactivations(const Mat& inputs, const Tensor3& w, const Mat& v_in) {
    Mat out(inputs.rows, w.order());
    for (std::size_t r = 0; r < inputs.rows; ++r) {
        Vec v(inputs.row(r), inputs.row(r) + inputs.cols);
        Vec bi = ref::bilinear_form(v, w);
        Vec li = ref::matvec(v_in, v);
        for (std::size_t i = 0; i < bi.size(); ++i) out.at(r, i) = bi[i] + li[i];
    }
    return out;
}

}  // namespace rwtn::ref
