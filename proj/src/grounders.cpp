#include "rwtn/grounders.hpp"

#include <cstring>

#include "rwtn/geometry.hpp"

namespace rwtn::grounders {

std::size_t LtnPredicateParams::param_count() const {
    std::size_t n = 0;
    for (const Mat& s : W.slices) n += s.a.size();
    return n + V.a.size() + b.size() + u.size();
}

void LtnPredicateParams::check() const {
    W.check();
    const std::size_t kk = k(), d = mn();
    if (kk < 1) throw DimensionError("ltn params: k must be >= 1");
    if (W.order() != kk || b.size() != kk || V.rows != kk)
        throw DimensionError("ltn params: inconsistent k across components");
    if (W.order() > 0 && W.dim() != d)
        throw DimensionError("ltn params: inconsistent mn across components");
}

LtnPredicateParams LtnPredicateParams::init(std::size_t k, std::size_t mn, double stddev,
                                            RngStream rng) {
    LtnPredicateParams p;
    p.W = Tensor3(k, mn);
    p.V = Mat(k, mn);
    p.b = Vec(k, 0.0);
    p.u = Vec(k, 0.0);
    for (Mat& s : p.W.slices)
        for (double& x : s.a) x = stddev * rng.normal();
    for (double& x : p.V.a) x = stddev * rng.normal();
    for (double& x : p.b) x = stddev * rng.normal();
    for (double& x : p.u) x = stddev * rng.normal();
    return p;
}

std::uint64_t RwtnEncoderParams::content_hash() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto feed = [&h](const double* p, std::size_t n) {
        for (std::size_t i = 0; i < n; ++i) {
            std::uint64_t bits;
            std::memcpy(&bits, &p[i], sizeof bits);
            for (int b = 0; b < 8; ++b) {
                h ^= (bits >> (8 * b)) & 0xff;
                h *= 0x100000001b3ULL;
            }
        }
    };
    for (const Mat& s : W_res.slices) feed(s.a.data(), s.a.size());
    feed(V_in.a.data(), V_in.a.size());
    return h;
}

RwtnEncoderParams RwtnEncoderParams::generate(std::size_t mn,
                                              const reservoir::ReservoirConfig& cfg) {
    cfg.validate();
    RwtnEncoderParams enc;
    enc.xi = cfg.xi;
    enc.seed = cfg.seed;
    enc.W_res = Tensor3(cfg.R, mn);
    // Streams are derived from (seed, purpose, slice); each slice is scaled
    // to the target spectral radius independently.
    for (int i = 0; i < cfg.R; ++i) {
        const std::uint64_t slice_seed =
            RngStream::keyed(cfg.seed, {RngStream::fnv1a("encoder-slice"), static_cast<std::uint64_t>(i)})
                .next_u64();
        enc.W_res.slices[i] = reservoir::scaled_sparse_matrix(mn, cfg.beta, cfg.rho, slice_seed);
    }
    enc.V_in = reservoir::gen_input_weights(
        cfg.R, mn, cfg.omega, RngStream::named(cfg.seed, "encoder-input").next_u64());
    return enc;
}

RwtnDecoderParams RwtnDecoderParams::init(std::size_t R, std::size_t t, double stddev,
                                          RngStream rng) {
    if (t < 1) throw DimensionError("rwtn decoder: t must be >= 1");
    RwtnDecoderParams d;
    d.u = Mat(R, t);
    d.k_out = Vec(t, 0.0);
    for (double& x : d.u.a) x = stddev * rng.normal();
    for (double& x : d.k_out) x = stddev * rng.normal();
    return d;
}

Vec ground_function(const LinearFunctionParams& p, const Vec& args) {
    return affine(p.M, args, p.N);
}

double ltn_forward_raw(const LtnPredicateParams& p, const double* v, double* h_out) {
    const std::size_t k = p.k(), mn = p.mn();
    double s = 0.0;
    for (std::size_t q = 0; q < k; ++q) {
        const Mat& w = p.W.slices[q];
        const double* vrow = p.V.row(q);
        double acc = p.b[q];
        for (std::size_t a = 0; a < mn; ++a) {
            const double* wrow = w.row(a);
            double bl = 0.0;
            for (std::size_t b = 0; b < mn; ++b) bl += wrow[b] * v[b];
            acc += v[a] * bl + vrow[a] * v[a];
        }
        const double h = tanh_strict(acc);
        if (h_out) h_out[q] = h;
        s += p.u[q] * h;
    }
    return sigmoid(s);
}

LtnForward ltn_forward(const LtnPredicateParams& p, const Vec& v) {
    if (v.size() != p.mn()) throw DimensionError("ltn_predicate: input length mismatch");
    LtnForward f;
    f.h = Vec(p.k());
    f.p = ltn_forward_raw(p, v.data(), f.h.data());
    return f;
}

double ltn_predicate(const LtnPredicateParams& p, const Vec& v) { return ltn_forward(p, v).p; }

void rwtn_pre_raw(const RwtnEncoderParams& enc, const double* v, double* pre_out) {
    const std::size_t r = enc.R(), mn = enc.mn();
    for (std::size_t q = 0; q < r; ++q) {
        const Mat& w = enc.W_res.slices[q];
        const double* vin = enc.V_in.row(q);
        double acc = 0.0;
        for (std::size_t a = 0; a < mn; ++a) {
            const double* wrow = w.row(a);
            double bl = 0.0;
            for (std::size_t b = 0; b < mn; ++b) bl += wrow[b] * v[b];
            acc += v[a] * bl + vin[a] * v[a];
        }
        pre_out[q] = acc;
    }
}

Vec rwtn_preactivation(const RwtnEncoderParams& enc, const Vec& v) {
    if (v.size() != enc.mn()) throw DimensionError("rwtn_predicate: input length mismatch");
    Vec pre(enc.R());
    rwtn_pre_raw(enc, v.data(), pre.data());
    return pre;
}

double rwtn_decode_raw(const RwtnDecoderParams& dec, const double* z, double* h_out) {
    const std::size_t r = dec.R(), t = dec.t();
    // Row-major accumulation: one contiguous pass over u.
    thread_local Vec acc;
    acc.assign(t, 0.0);
    for (std::size_t i = 0; i < r; ++i) {
        const double zi = z[i];
        const double* urow = dec.u.row(i);
        for (std::size_t j = 0; j < t; ++j) acc[j] += urow[j] * zi;
    }
    double s = 0.0;
    for (std::size_t j = 0; j < t; ++j) {
        const double h = tanh_strict(acc[j]);
        if (h_out) h_out[j] = h;
        s += dec.k_out[j] * h;
    }
    return sigmoid(s);
}

RwtnForward rwtn_forward_from_pre(const RwtnDecoderParams& dec, const Vec& pre,
                                  const Vec* noise) {
    if (pre.size() != dec.R()) throw DimensionError("rwtn_predicate: R mismatch");
    if (noise && noise->size() != pre.size())
        throw DimensionError("rwtn_predicate: noise length mismatch");
    RwtnForward f;
    f.z = Vec(pre.size());
    for (std::size_t i = 0; i < pre.size(); ++i)
        f.z[i] = tanh_strict(pre[i] + (noise ? (*noise)[i] : 0.0));
    f.h = Vec(dec.t());
    f.p = rwtn_decode_raw(dec, f.z.data(), f.h.data());
    return f;
}

double rwtn_predicate(const RwtnEncoderParams& enc, const RwtnDecoderParams& dec, const Vec& v,
                      const Vec* noise) {
    return rwtn_forward_from_pre(dec, rwtn_preactivation(enc, v), noise).p;
}

bool PartWholeTable::is_part(std::size_t c) const {
    for (std::size_t j = 0; j < size; ++j)
        if (at(c, j)) return true;
    return false;
}

void PartWholeTable::validate() const {
    if (w.size() != size * size) throw DimensionError("part-whole table: bad storage size");
    for (std::size_t i = 0; i < size; ++i)
        for (std::size_t j = 0; j < size; ++j) {
            if (w[i * size + j] > 1) throw ConfigError("part-whole table: entries must be 0/1");
            // No class may be both a part (row has 1s) and a whole (column
            // has 1s): parts cannot have parts.
            if (at(i, j) && is_part(j))
                throw ConfigError("part-whole table: a part class may not own parts");
        }
}

double crisp_type(const Vec& x, std::size_t class_index, std::size_t p1_count) {
    if (class_index >= p1_count || x.size() < p1_count)
        throw DimensionError("crisp_type: class index out of range");
    std::size_t best = 0;
    for (std::size_t l = 1; l < p1_count; ++l)
        if (x[l] > x[best]) best = l;  // strict: lowest index wins ties
    return best == class_index ? 1.0 : 0.0;
}

double crisp_part_of(const Vec& pair_v, const PartWholeTable& table, double th_ir,
                     std::size_t p1_count) {
    const std::size_t n = p1_count + 4;
    if (pair_v.size() != 2 * n) throw DimensionError("crisp_part_of: bad pair vector length");
    if (table.size != p1_count) throw DimensionError("crisp_part_of: table size mismatch");
    const Box b{pair_v[p1_count], pair_v[p1_count + 1], pair_v[p1_count + 2], pair_v[p1_count + 3]};
    const Box bp{pair_v[n + p1_count], pair_v[n + p1_count + 1], pair_v[n + p1_count + 2],
                 pair_v[n + p1_count + 3]};
    const double ir = inclusion_ratio(b, bp);
    double best = 0.0;
    for (std::size_t i = 0; i < p1_count; ++i) {
        if (pair_v[i] == 0.0) continue;
        for (std::size_t j = 0; j < p1_count; ++j)
            if (table.at(i, j)) best = std::max(best, pair_v[i] * pair_v[n + j]);
    }
    return ir * best >= th_ir ? 1.0 : 0.0;
}

std::size_t ltn_param_count(std::size_t n, std::size_t m, std::size_t k) {
    const std::size_t mn = n * m;
    return (mn * mn + mn + 2) * k;
}

std::size_t rwtn_param_count(std::size_t R, std::size_t t) { return (R + 1) * t; }

SharedSpace shared_space(std::size_t n, std::size_t m, std::size_t R, std::size_t t,
                         std::size_t i) {
    const std::size_t mn = n * m;
    const std::size_t encoder = (mn * mn + mn) * R;
    const std::size_t decoder = (R + 1) * t;
    return {(encoder + decoder) * i, encoder + decoder * i};
}

}  // namespace rwtn::grounders
