#include "eegfc/net.hpp"

#include "eegfc/gemm.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numbers>

// Single-precision activations spend most of their time in expf/erff. When
// glibc's libmvec is available, redeclaring the two entry points with the simd
// attribute (exactly what <math.h> does under __FAST_MATH__) lets the compiler
// vectorize the marked loops against the vector variants without enabling any
// of the fast-math semantic changes.
#if defined(EEGFC_USE_LIBMVEC) && defined(__x86_64__) && defined(__GNUC__) && !defined(__clang__)
extern "C" {
__attribute__((__simd__("notinbranch"))) float expf(float) noexcept;
__attribute__((__simd__("notinbranch"))) float erff(float) noexcept;
}
#endif

namespace eegfc {

uint64_t mix_seed(uint64_t a, uint64_t b, uint64_t c) {
    // splitmix64 over the combined words; decorrelates derived seeds.
    uint64_t x = a + 0x9e3779b97f4a7c15ull * (b + 1) + 0xbf58476d1ce4e5b9ull * (c + 1);
    auto mix = [](uint64_t z) {
        z += 0x9e3779b97f4a7c15ull;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    };
    return mix(mix(x));
}

// --- parameter store ---

template <class T>
int ParamStore<T>::add(const std::string& name, std::vector<int> dims, bool decay, bool backbone) {
    TensorInfo info;
    info.name = name;
    info.dims = std::move(dims);
    info.size = 1;
    for (int d : info.dims) info.size *= static_cast<size_t>(d);
    info.offset = 0;
    info.decay = decay;
    info.backbone = backbone;
    infos.push_back(std::move(info));
    return static_cast<int>(infos.size()) - 1;
}

template <class T>
void ParamStore<T>::allocate() {
    size_t off = 0;
    for (auto& info : infos) {
        info.offset = off;
        off += info.size;
    }
    data.assign(off, T(0));
    grad.assign(off, T(0));
}

template <class T>
int ParamStore<T>::find(const std::string& name) const {
    for (size_t i = 0; i < infos.size(); ++i)
        if (infos[i].name == name) return static_cast<int>(i);
    return -1;
}

// --- model construction ---

template <class T>
Model<T>::Model(const ModelConfig& c) : cfg(c) {
    cfg.validate();
    const int d = cfg.d_model;
    const int hdim = cfg.mlp_hidden();
    h.tok_emb = ps.add("tok_emb", {cfg.vocab, d}, false, true);
    h.pos_emb = ps.add("pos_emb", {cfg.block_size, d}, false, true);
    h.layers.resize(cfg.n_layers);
    for (int l = 0; l < cfg.n_layers; ++l) {
        const std::string p = "blk" + std::to_string(l) + ".";
        auto& L = h.layers[l];
        L.ln1_g = ps.add(p + "ln1.g", {d}, false, true);
        L.ln1_b = ps.add(p + "ln1.b", {d}, false, true);
        L.wq = ps.add(p + "attn.wq", {d, d}, true, true);
        L.bq = ps.add(p + "attn.bq", {d}, false, true);
        L.wk = ps.add(p + "attn.wk", {d, d}, true, true);
        L.bk = ps.add(p + "attn.bk", {d}, false, true);
        L.wv = ps.add(p + "attn.wv", {d, d}, true, true);
        L.bv = ps.add(p + "attn.bv", {d}, false, true);
        L.wo = ps.add(p + "attn.wo", {d, d}, true, true);
        L.bo = ps.add(p + "attn.bo", {d}, false, true);
        L.ln2_g = ps.add(p + "ln2.g", {d}, false, true);
        L.ln2_b = ps.add(p + "ln2.b", {d}, false, true);
        L.wfc = ps.add(p + "mlp.wfc", {d, hdim}, true, true);
        L.bfc = ps.add(p + "mlp.bfc", {hdim}, false, true);
        L.wproj = ps.add(p + "mlp.wproj", {hdim, d}, true, true);
        L.bproj = ps.add(p + "mlp.bproj", {d}, false, true);
    }
    h.final_g = ps.add("final_ln.g", {d}, false, true);
    h.final_b = ps.add("final_ln.b", {d}, false, true);
    h.lm_w = ps.add("lm_head.w", {d, cfg.vocab}, true, true);
    if (cfg.channels > 0) {
        const int cf = cfg.channels * cfg.frame_len;
        h.in_proj_w = ps.add("clf.in_proj.w", {cf, d}, true, false);
        h.in_proj_b = ps.add("clf.in_proj.b", {d}, false, false);
        h.head_ln_g = ps.add("clf.head_ln.g", {d}, false, false);
        h.head_ln_b = ps.add("clf.head_ln.b", {d}, false, false);
        h.head_fc_w = ps.add("clf.head_fc.w", {d, d}, true, false);
        h.head_fc_b = ps.add("clf.head_fc.b", {d}, false, false);
        h.head_out_w = ps.add("clf.head_out.w", {d, 2}, true, false);
        h.head_out_b = ps.add("clf.head_out.b", {2}, false, false);
    }
    ps.allocate();
}

template <class T>
void Model<T>::init_weights(uint64_t seed) {
    Rng rng(seed);
    for (size_t i = 0; i < ps.infos.size(); ++i) {
        const auto& info = ps.infos[i];
        T* p = ps.p(static_cast<int>(i));
        const bool is_norm_scale = info.name.size() >= 2 && info.name.compare(info.name.size() - 2, 2, ".g") == 0;
        if (info.dims.size() == 2) {
            for (size_t k = 0; k < info.size; ++k) p[k] = static_cast<T>(0.02 * rng.gauss());
        } else if (is_norm_scale) {
            std::fill(p, p + info.size, T(1));
        } else {
            std::fill(p, p + info.size, T(0)); // biases and norm shifts
        }
    }
}

// --- workspace ---

template <class T>
struct Workspace {
    ModelConfig cfg;
    int S = 0;

    std::vector<T> x0;
    std::vector<uint8_t> emb_mask;
    struct LayerCache {
        std::vector<T> ln1_out, ln1_mean, ln1_rstd;
        std::vector<T> q, k, v;
        std::vector<T> probs;           // [nh, n, n] post-softmax, pre-dropout
        std::vector<T> att_drop;        // [nh, n, n] post-dropout probs (training only)
        std::vector<uint8_t> att_mask;  // [nh, n, n]
        std::vector<T> att_out;
        std::vector<uint8_t> res1_mask;
        std::vector<T> x1;
        std::vector<T> ln2_out, ln2_mean, ln2_rstd;
        std::vector<T> fc_out;          // pre-GELU
        std::vector<T> gelu_out;        // post-GELU, reused by the backward pass
        std::vector<T> gelu_cdf;        // cached Gaussian CDF factors
        std::vector<uint8_t> res2_mask;
        std::vector<T> x2;
    };
    std::vector<LayerCache> layers;
    std::vector<T> lnf_out, lnf_mean, lnf_rstd;
    std::vector<T> logits, dlogits;

    // classifier path
    std::vector<T> frames;   // [n, C*F]
    std::vector<T> pooled;   // [d]
    std::vector<T> h_ln, h_fc, h_act; // [d] each; h_act = dropped GELU output
    std::vector<uint8_t> head_mask;
    T clf_logits[2] = {T(0), T(0)};
    T clf_p[2] = {T(0), T(0)};
    T hln_mean = T(0), hln_rstd = T(0);

    // backward scratch
    std::vector<T> dxa, dxb, dy;       // [n, d]
    std::vector<T> s4b;                // [n, 4d]
    std::vector<T> dq, dk, dv;         // [n, d]
    std::vector<T> dphead;             // [n, n]
};

template <class T>
Workspace<T>* workspace_create(const ModelConfig& cfg) {
    auto* ws = new Workspace<T>();
    ws->cfg = cfg;
    const int S = cfg.block_size;
    ws->S = S;
    const int d = cfg.d_model;
    const int hdim = cfg.mlp_hidden();
    const size_t sd = static_cast<size_t>(S) * d;
    ws->x0.resize(sd);
    ws->emb_mask.resize(sd);
    ws->layers.resize(cfg.n_layers);
    for (auto& L : ws->layers) {
        L.ln1_out.resize(sd);
        L.ln1_mean.resize(S);
        L.ln1_rstd.resize(S);
        L.q.resize(sd);
        L.k.resize(sd);
        L.v.resize(sd);
        L.probs.resize(static_cast<size_t>(cfg.n_heads) * S * S);
        L.att_drop.resize(static_cast<size_t>(cfg.n_heads) * S * S);
        L.att_mask.resize(static_cast<size_t>(cfg.n_heads) * S * S);
        L.att_out.resize(sd);
        L.res1_mask.resize(sd);
        L.x1.resize(sd);
        L.ln2_out.resize(sd);
        L.ln2_mean.resize(S);
        L.ln2_rstd.resize(S);
        L.fc_out.resize(static_cast<size_t>(S) * hdim);
        L.gelu_out.resize(static_cast<size_t>(S) * hdim);
        L.gelu_cdf.resize(static_cast<size_t>(S) * hdim);
        L.res2_mask.resize(sd);
        L.x2.resize(sd);
    }
    ws->lnf_out.resize(sd);
    ws->lnf_mean.resize(S);
    ws->lnf_rstd.resize(S);
    ws->logits.resize(static_cast<size_t>(S) * cfg.vocab);
    ws->dlogits.resize(static_cast<size_t>(S) * cfg.vocab);
    if (cfg.channels > 0) ws->frames.resize(static_cast<size_t>(S) * cfg.channels * cfg.frame_len);
    ws->pooled.resize(d);
    ws->h_ln.resize(d);
    ws->h_fc.resize(d);
    ws->h_act.resize(d);
    ws->head_mask.resize(d);
    ws->dxa.resize(sd);
    ws->dxb.resize(sd);
    ws->dy.resize(sd);
    ws->s4b.resize(static_cast<size_t>(S) * hdim);
    ws->dq.resize(sd);
    ws->dk.resize(sd);
    ws->dv.resize(sd);
    ws->dphead.resize(static_cast<size_t>(S) * S);
    return ws;
}

template <class T>
void workspace_destroy(Workspace<T>* ws) {
    delete ws;
}

// --- primitive layers ---

namespace {

template <class T>
void add_bias(T* y, const T* b, int n, int d) {
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j) y[static_cast<size_t>(i) * d + j] += b[j];
}

template <class T>
void layernorm_forward(const T* x, const T* g, const T* b, T* out, T* mean, T* rstd, int n, int d) {
    constexpr double kEps = 1e-5;
    if constexpr (std::is_same_v<T, float>) {
        // single-precision elementwise math, double accumulators for the sums
        for (int i = 0; i < n; ++i) {
            const float* xi = x + static_cast<size_t>(i) * d;
            float* oi = out + static_cast<size_t>(i) * d;
            double mu = 0.0;
#pragma omp simd reduction(+ : mu)
            for (int j = 0; j < d; ++j) mu += xi[j];
            mu /= d;
            const float muf = static_cast<float>(mu);
            double var = 0.0;
#pragma omp simd reduction(+ : var)
            for (int j = 0; j < d; ++j) {
                const float t = xi[j] - muf;
                var += static_cast<double>(t) * t;
            }
            var /= d;
            const float r = static_cast<float>(1.0 / std::sqrt(var + kEps));
#pragma omp simd
            for (int j = 0; j < d; ++j) oi[j] = (xi[j] - muf) * r * g[j] + b[j];
            mean[i] = muf;
            rstd[i] = r;
        }
    } else {
        for (int i = 0; i < n; ++i) {
            const T* xi = x + static_cast<size_t>(i) * d;
            T* oi = out + static_cast<size_t>(i) * d;
            double mu = 0.0;
            for (int j = 0; j < d; ++j) mu += static_cast<double>(xi[j]);
            mu /= d;
            double var = 0.0;
            for (int j = 0; j < d; ++j) {
                const double t = static_cast<double>(xi[j]) - mu;
                var += t * t;
            }
            var /= d;
            const double r = 1.0 / std::sqrt(var + kEps);
            for (int j = 0; j < d; ++j)
                oi[j] = static_cast<T>((static_cast<double>(xi[j]) - mu) * r *
                                           static_cast<double>(g[j]) +
                                       static_cast<double>(b[j]));
            mean[i] = static_cast<T>(mu);
            rstd[i] = static_cast<T>(r);
        }
    }
}

// dx (overwritten in place over dout), dg/db accumulated.
template <class T>
void layernorm_backward(T* dout_and_dx, const T* x, const T* mean, const T* rstd, const T* g, T* dg,
                        T* db, int n, int d) {
    if constexpr (std::is_same_v<T, float>) {
        for (int i = 0; i < n; ++i) {
            float* dyi = dout_and_dx + static_cast<size_t>(i) * d;
            const float* xi = x + static_cast<size_t>(i) * d;
            const float mu = mean[i];
            const float r = rstd[i];
            double sum_dyg = 0.0, sum_dyg_xhat = 0.0;
#pragma omp simd reduction(+ : sum_dyg, sum_dyg_xhat)
            for (int j = 0; j < d; ++j) {
                const float xhat = (xi[j] - mu) * r;
                const float dy = dyi[j];
                dg[j] += dy * xhat;
                db[j] += dy;
                const float dyg = dy * g[j];
                sum_dyg += dyg;
                sum_dyg_xhat += static_cast<double>(dyg) * xhat;
            }
            const float a = static_cast<float>(sum_dyg / d);
            const float bb = static_cast<float>(sum_dyg_xhat / d);
#pragma omp simd
            for (int j = 0; j < d; ++j) {
                const float xhat = (xi[j] - mu) * r;
                dyi[j] = (dyi[j] * g[j] - a - xhat * bb) * r;
            }
        }
    } else {
        for (int i = 0; i < n; ++i) {
            T* dyi = dout_and_dx + static_cast<size_t>(i) * d;
            const T* xi = x + static_cast<size_t>(i) * d;
            const double mu = static_cast<double>(mean[i]);
            const double r = static_cast<double>(rstd[i]);
            double sum_dyg = 0.0, sum_dyg_xhat = 0.0;
            for (int j = 0; j < d; ++j) {
                const double xhat = (static_cast<double>(xi[j]) - mu) * r;
                const double dy = static_cast<double>(dyi[j]);
                dg[j] += static_cast<T>(dy * xhat);
                db[j] += static_cast<T>(dy);
                const double dyg = dy * static_cast<double>(g[j]);
                sum_dyg += dyg;
                sum_dyg_xhat += dyg * xhat;
            }
            sum_dyg /= d;
            sum_dyg_xhat /= d;
            for (int j = 0; j < d; ++j) {
                const double xhat = (static_cast<double>(xi[j]) - mu) * r;
                const double dyg = static_cast<double>(dyi[j]) * static_cast<double>(g[j]);
                dyi[j] = static_cast<T>((dyg - sum_dyg - xhat * sum_dyg_xhat) * r);
            }
        }
    }
}

inline double gelu_scalar(double x) { return 0.5 * x * (1.0 + std::erf(x / std::sqrt(2.0))); }

inline double gelu_grad_scalar(double x) {
    const double cdf = 0.5 * (1.0 + std::erf(x / std::sqrt(2.0)));
    const double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi_v<double>);
    return cdf + x * pdf;
}

template <class T>
void gelu_forward(const T* x, T* out, size_t n) {
    for (size_t i = 0; i < n; ++i) out[i] = static_cast<T>(gelu_scalar(static_cast<double>(x[i])));
}

// Forward pass that also caches the Gaussian CDF so the backward pass avoids
// recomputing erf. The double path computes x * cdf, which rounds identically
// to 0.5 * x * (1 + erf) because the 0.5 factor is exact; the float path runs
// fully in single precision so its erf/exp loops can vectorize.
template <class T>
void gelu_forward_cached(const T* x, T* out, T* cdf_cache, size_t n) {
    if constexpr (std::is_same_v<T, float>) {
        const float inv_sqrt2 = static_cast<float>(1.0 / std::sqrt(2.0));
#pragma omp simd
        for (size_t i = 0; i < n; ++i) {
            const float c = 0.5f * (1.0f + ::erff(x[i] * inv_sqrt2));
            cdf_cache[i] = c;
            out[i] = x[i] * c;
        }
    } else {
        for (size_t i = 0; i < n; ++i) {
            const double xd = static_cast<double>(x[i]);
            const double cdf = 0.5 * (1.0 + std::erf(xd / std::sqrt(2.0)));
            cdf_cache[i] = static_cast<T>(cdf);
            out[i] = static_cast<T>(xd * cdf);
        }
    }
}

template <class T>
void gelu_backward(const T* x, T* dout_and_dx, size_t n) {
    for (size_t i = 0; i < n; ++i)
        dout_and_dx[i] = static_cast<T>(static_cast<double>(dout_and_dx[i]) *
                                        gelu_grad_scalar(static_cast<double>(x[i])));
}

template <class T>
void gelu_backward_cached(const T* x, const T* cdf_cache, T* dout_and_dx, size_t n) {
    if constexpr (std::is_same_v<T, float>) {
        const float inv_sqrt2pi = static_cast<float>(1.0 / std::sqrt(2.0 * std::numbers::pi));
#pragma omp simd
        for (size_t i = 0; i < n; ++i) {
            const float pdf = ::expf(-0.5f * x[i] * x[i]) * inv_sqrt2pi;
            dout_and_dx[i] *= cdf_cache[i] + x[i] * pdf;
        }
    } else {
        const double inv_sqrt2pi = 1.0 / std::sqrt(2.0 * std::numbers::pi_v<double>);
        for (size_t i = 0; i < n; ++i) {
            const double xd = static_cast<double>(x[i]);
            const double pdf = std::exp(-0.5 * xd * xd) * inv_sqrt2pi;
            dout_and_dx[i] =
                static_cast<T>(static_cast<double>(dout_and_dx[i]) *
                               (static_cast<double>(cdf_cache[i]) + xd * pdf));
        }
    }
}

// Inverted dropout over buf; fills mask. p == 0 or rng == nullptr keeps all
// (mask untouched: every consumer guards on p before reading it). Each 64-bit
// draw decides two elements (32-bit resolution is ample for a keep/drop test);
// draws are staged in chunks so the apply loop can vectorize.
template <class T>
void dropout_forward(T* buf, uint8_t* mask, size_t n, double p, Rng* rng) {
    if (p <= 0.0 || rng == nullptr) return;
    const uint64_t t64 = static_cast<uint64_t>(p * 4294967296.0);
    const uint32_t threshold = t64 > 0xffffffffull ? 0xffffffffu : static_cast<uint32_t>(t64);
    const T scale = static_cast<T>(1.0 / (1.0 - p));
    uint32_t draws[2048];
    size_t base = 0;
    while (base < n) {
        const size_t chunk = std::min(n - base, sizeof(draws) / sizeof(draws[0]));
        for (size_t k = 0; k + 2 <= chunk; k += 2) {
            const uint64_t r = rng->g();
            draws[k] = static_cast<uint32_t>(r);
            draws[k + 1] = static_cast<uint32_t>(r >> 32);
        }
        if (chunk & 1) draws[chunk - 1] = static_cast<uint32_t>(rng->g());
#pragma omp simd
        for (size_t k = 0; k < chunk; ++k) {
            const bool drop = draws[k] < threshold;
            mask[base + k] = drop ? 0 : 1;
            buf[base + k] = drop ? T(0) : buf[base + k] * scale;
        }
        base += chunk;
    }
}

template <class T>
void dropout_backward(T* dbuf, const uint8_t* mask, size_t n, double p) {
    if (p <= 0.0) return;
    const T scale = static_cast<T>(1.0 / (1.0 - p));
#pragma omp simd
    for (size_t i = 0; i < n; ++i) dbuf[i] = mask[i] ? dbuf[i] * scale : T(0);
}

template <class T>
void colsum_accum(const T* y, T* out, int n, int d) {
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j) out[j] += y[static_cast<size_t>(i) * d + j];
}

} // namespace

// --- shared backbone forward/backward over an embedded input in ws.x0 ---

namespace {

template <class T>
struct GradSink {
    ParamStore<T>* ps;
    T* base;
    T* operator()(int idx) const { return base + ps->infos[idx].offset; }
};

template <class T>
void backbone_forward(const Model<T>& m, Workspace<T>& ws, int n, double dropout_p, Rng* rng) {
    const ModelConfig& cfg = m.cfg;
    const int d = cfg.d_model;
    const int nh = cfg.n_heads;
    const int dh = cfg.head_dim();
    const int hdim = cfg.mlp_hidden();
    const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

    const T* x_prev = ws.x0.data();
    for (int l = 0; l < cfg.n_layers; ++l) {
        auto& L = ws.layers[l];
        const auto& H = m.h.layers[l];
        layernorm_forward(x_prev, m.ps.p(H.ln1_g), m.ps.p(H.ln1_b), L.ln1_out.data(),
                          L.ln1_mean.data(), L.ln1_rstd.data(), n, d);
        gemm(false, false, n, d, d, T(1), L.ln1_out.data(), m.ps.p(H.wq), T(0), L.q.data());
        add_bias(L.q.data(), m.ps.p(H.bq), n, d);
        gemm(false, false, n, d, d, T(1), L.ln1_out.data(), m.ps.p(H.wk), T(0), L.k.data());
        add_bias(L.k.data(), m.ps.p(H.bk), n, d);
        gemm(false, false, n, d, d, T(1), L.ln1_out.data(), m.ps.p(H.wv), T(0), L.v.data());
        add_bias(L.v.data(), m.ps.p(H.bv), n, d);

        for (int hh = 0; hh < nh; ++hh) {
            T* probs = L.probs.data() + static_cast<size_t>(hh) * n * n;
            uint8_t* amask = L.att_mask.data() + static_cast<size_t>(hh) * n * n;
            const T* qh = L.q.data() + hh * dh;
            const T* kh = L.k.data() + hh * dh;
            const T* vh = L.v.data() + hh * dh;
            gemm_ld(false, true, n, n, dh, static_cast<T>(scale), qh, d, kh, d, T(0), probs, n);
            // causal softmax row by row (float runs in single precision)
            for (int i = 0; i < n; ++i) {
                T* row = probs + static_cast<size_t>(i) * n;
                if constexpr (std::is_same_v<T, float>) {
                    float mx = row[0];
                    for (int j = 1; j <= i; ++j) mx = std::max(mx, row[j]);
#pragma omp simd
                    for (int j = 0; j <= i; ++j) row[j] = ::expf(row[j] - mx);
                    double sum = 0.0;
#pragma omp simd reduction(+ : sum)
                    for (int j = 0; j <= i; ++j) sum += row[j];
                    const float inv = static_cast<float>(1.0 / sum);
#pragma omp simd
                    for (int j = 0; j <= i; ++j) row[j] *= inv;
                } else {
                    double mx = -1e300;
                    for (int j = 0; j <= i; ++j) mx = std::max(mx, static_cast<double>(row[j]));
                    double sum = 0.0;
                    for (int j = 0; j <= i; ++j) {
                        const double e = std::exp(static_cast<double>(row[j]) - mx);
                        row[j] = static_cast<T>(e);
                        sum += e;
                    }
                    const double inv = 1.0 / sum;
                    for (int j = 0; j <= i; ++j)
                        row[j] = static_cast<T>(static_cast<double>(row[j]) * inv);
                }
                for (int j = i + 1; j < n; ++j) row[j] = T(0);
            }
            // attention-weight dropout acts on a copy kept for the backward
            // pass; pre-dropout probs stay cached too. Only the causal half
            // draws: the strict upper triangle is zero either way and its mask
            // is never consulted.
            const T* av_in = probs;
            if (dropout_p > 0.0 && rng != nullptr) {
                T* dropped = L.att_drop.data() + static_cast<size_t>(hh) * n * n;
                std::copy(probs, probs + static_cast<size_t>(n) * n, dropped);
                for (int i = 0; i < n; ++i)
                    dropout_forward(dropped + static_cast<size_t>(i) * n,
                                    amask + static_cast<size_t>(i) * n, i + 1, dropout_p, rng);
                av_in = dropped;
            }
            gemm_ld(false, false, n, dh, n, T(1), av_in, n, vh, d, T(0), L.att_out.data() + hh * dh,
                    d);
        }
        // out-projection + residual dropout
        gemm(false, false, n, d, d, T(1), L.att_out.data(), m.ps.p(H.wo), T(0), ws.dy.data());
        add_bias(ws.dy.data(), m.ps.p(H.bo), n, d);
        dropout_forward(ws.dy.data(), L.res1_mask.data(), static_cast<size_t>(n) * d, dropout_p, rng);
        for (size_t i = 0; i < static_cast<size_t>(n) * d; ++i) L.x1[i] = x_prev[i] + ws.dy[i];

        layernorm_forward(L.x1.data(), m.ps.p(H.ln2_g), m.ps.p(H.ln2_b), L.ln2_out.data(),
                          L.ln2_mean.data(), L.ln2_rstd.data(), n, d);
        gemm(false, false, n, hdim, d, T(1), L.ln2_out.data(), m.ps.p(H.wfc), T(0), L.fc_out.data());
        add_bias(L.fc_out.data(), m.ps.p(H.bfc), n, hdim);
        gelu_forward_cached(L.fc_out.data(), L.gelu_out.data(), L.gelu_cdf.data(),
                            static_cast<size_t>(n) * hdim);
        gemm(false, false, n, d, hdim, T(1), L.gelu_out.data(), m.ps.p(H.wproj), T(0),
             ws.dy.data());
        add_bias(ws.dy.data(), m.ps.p(H.bproj), n, d);
        dropout_forward(ws.dy.data(), L.res2_mask.data(), static_cast<size_t>(n) * d, dropout_p, rng);
        for (size_t i = 0; i < static_cast<size_t>(n) * d; ++i) L.x2[i] = L.x1[i] + ws.dy[i];
        x_prev = L.x2.data();
    }
    layernorm_forward(x_prev, m.ps.p(m.h.final_g), m.ps.p(m.h.final_b), ws.lnf_out.data(),
                      ws.lnf_mean.data(), ws.lnf_rstd.data(), n, d);
}

// Backward through the blocks. On entry ws.dxa holds the gradient w.r.t. the
// final-norm INPUT (callers run the final-norm backward first). On exit ws.dxa
// holds the gradient w.r.t. the embedded input x0 (post-dropout).
template <class T>
void backbone_backward(Model<T>& m, Workspace<T>& ws, int n, double dropout_p,
                       const GradSink<T>& G) {
    const ModelConfig& cfg = m.cfg;
    const int d = cfg.d_model;
    const int nh = cfg.n_heads;
    const int dh = cfg.head_dim();
    const int hdim = cfg.mlp_hidden();
    const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
    const size_t nd = static_cast<size_t>(n) * d;

    for (int l = cfg.n_layers - 1; l >= 0; --l) {
        auto& L = ws.layers[l];
        const auto& H = m.h.layers[l];
        const T* x_prev = l == 0 ? ws.x0.data() : ws.layers[l - 1].x2.data();

        // MLP branch
        std::copy(ws.dxa.begin(), ws.dxa.begin() + nd, ws.dy.begin());
        dropout_backward(ws.dy.data(), L.res2_mask.data(), nd, dropout_p);
        colsum_accum(ws.dy.data(), G(H.bproj), n, d);
        gemm(true, false, hdim, d, n, T(1), L.gelu_out.data(), ws.dy.data(), T(1), G(H.wproj));
        gemm(false, true, n, hdim, d, T(1), ws.dy.data(), m.ps.p(H.wproj), T(0), ws.s4b.data());
        gelu_backward_cached(L.fc_out.data(), L.gelu_cdf.data(), ws.s4b.data(),
                             static_cast<size_t>(n) * hdim);
        colsum_accum(ws.s4b.data(), G(H.bfc), n, hdim);
        gemm(true, false, d, hdim, n, T(1), L.ln2_out.data(), ws.s4b.data(), T(1), G(H.wfc));
        gemm(false, true, n, d, hdim, T(1), ws.s4b.data(), m.ps.p(H.wfc), T(0), ws.dxb.data());
        layernorm_backward(ws.dxb.data(), L.x1.data(), L.ln2_mean.data(), L.ln2_rstd.data(),
                           m.ps.p(H.ln2_g), G(H.ln2_g), G(H.ln2_b), n, d);
        for (size_t i = 0; i < nd; ++i) ws.dxa[i] += ws.dxb[i]; // d x1

        // attention branch
        std::copy(ws.dxa.begin(), ws.dxa.begin() + nd, ws.dy.begin());
        dropout_backward(ws.dy.data(), L.res1_mask.data(), nd, dropout_p);
        colsum_accum(ws.dy.data(), G(H.bo), n, d);
        gemm(true, false, d, d, n, T(1), L.att_out.data(), ws.dy.data(), T(1), G(H.wo));
        gemm(false, true, n, d, d, T(1), ws.dy.data(), m.ps.p(H.wo), T(0), ws.dxb.data()); // d att_out
        for (int hh = 0; hh < nh; ++hh) {
            const T* probs = L.probs.data() + static_cast<size_t>(hh) * n * n;
            const uint8_t* amask = L.att_mask.data() + static_cast<size_t>(hh) * n * n;
            const T* vh = L.v.data() + hh * dh;
            const T* qh = L.q.data() + hh * dh;
            const T* kh = L.k.data() + hh * dh;
            const T* datt_h = ws.dxb.data() + hh * dh;
            // dV sees the same post-dropout probs the forward pass used
            const T* av_in = dropout_p > 0.0
                                 ? L.att_drop.data() + static_cast<size_t>(hh) * n * n
                                 : probs;
            gemm_ld(true, false, n, dh, n, T(1), av_in, n, datt_h, d, T(0), ws.dv.data() + hh * dh,
                    d);
            gemm_ld(false, true, n, n, dh, T(1), datt_h, d, vh, d, T(0), ws.dphead.data(), n);
            // gradient w.r.t. pre-dropout probs; rows above the diagonal are
            // discarded by the softmax backward below, so only causal entries
            // need the mask scaling
            for (int i = 0; i < n; ++i)
                dropout_backward(ws.dphead.data() + static_cast<size_t>(i) * n,
                                 amask + static_cast<size_t>(i) * n, i + 1, dropout_p);
            // softmax backward (causal rows)
            for (int i = 0; i < n; ++i) {
                const T* prow = probs + static_cast<size_t>(i) * n;
                T* dprow = ws.dphead.data() + static_cast<size_t>(i) * n;
                if constexpr (std::is_same_v<T, float>) {
                    double dot = 0.0;
#pragma omp simd reduction(+ : dot)
                    for (int j = 0; j <= i; ++j)
                        dot += static_cast<double>(dprow[j]) * static_cast<double>(prow[j]);
                    const float dotf = static_cast<float>(dot);
#pragma omp simd
                    for (int j = 0; j <= i; ++j) dprow[j] = prow[j] * (dprow[j] - dotf);
                } else {
                    double dot = 0.0;
                    for (int j = 0; j <= i; ++j)
                        dot += static_cast<double>(dprow[j]) * static_cast<double>(prow[j]);
                    for (int j = 0; j <= i; ++j)
                        dprow[j] = static_cast<T>(static_cast<double>(prow[j]) *
                                                  (static_cast<double>(dprow[j]) - dot));
                }
                for (int j = i + 1; j < n; ++j) dprow[j] = T(0);
            }
            gemm_ld(false, false, n, dh, n, static_cast<T>(scale), ws.dphead.data(), n, kh, d, T(0),
                    ws.dq.data() + hh * dh, d);
            gemm_ld(true, false, n, dh, n, static_cast<T>(scale), ws.dphead.data(), n, qh, d, T(0),
                    ws.dk.data() + hh * dh, d);
        }
        colsum_accum(ws.dq.data(), G(H.bq), n, d);
        colsum_accum(ws.dk.data(), G(H.bk), n, d);
        colsum_accum(ws.dv.data(), G(H.bv), n, d);
        gemm(true, false, d, d, n, T(1), L.ln1_out.data(), ws.dq.data(), T(1), G(H.wq));
        gemm(true, false, d, d, n, T(1), L.ln1_out.data(), ws.dk.data(), T(1), G(H.wk));
        gemm(true, false, d, d, n, T(1), L.ln1_out.data(), ws.dv.data(), T(1), G(H.wv));
        gemm(false, true, n, d, d, T(1), ws.dq.data(), m.ps.p(H.wq), T(0), ws.dxb.data());
        gemm(false, true, n, d, d, T(1), ws.dk.data(), m.ps.p(H.wk), T(1), ws.dxb.data());
        gemm(false, true, n, d, d, T(1), ws.dv.data(), m.ps.p(H.wv), T(1), ws.dxb.data());
        layernorm_backward(ws.dxb.data(), x_prev, L.ln1_mean.data(), L.ln1_rstd.data(),
                           m.ps.p(H.ln1_g), G(H.ln1_g), G(H.ln1_b), n, d);
        for (size_t i = 0; i < nd; ++i) ws.dxa[i] += ws.dxb[i]; // d x_prev
    }
}

} // namespace

// --- language-model path ---

template <class T>
const T* lm_forward(const Model<T>& m, Workspace<T>& ws, const uint16_t* tokens, int n,
                    double dropout_p, Rng* rng) {
    const ModelConfig& cfg = m.cfg;
    if (n < 1 || n > cfg.block_size) fail_usage("context length out of range");
    const int d = cfg.d_model;
    for (int t = 0; t < n; ++t) {
        if (tokens[t] >= cfg.vocab) fail_usage("token out of vocabulary");
        const T* te = m.ps.p(m.h.tok_emb) + static_cast<size_t>(tokens[t]) * d;
        const T* pe = m.ps.p(m.h.pos_emb) + static_cast<size_t>(t) * d;
        T* x = ws.x0.data() + static_cast<size_t>(t) * d;
        for (int j = 0; j < d; ++j) x[j] = te[j] + pe[j];
    }
    dropout_forward(ws.x0.data(), ws.emb_mask.data(), static_cast<size_t>(n) * d, dropout_p, rng);
    backbone_forward(m, ws, n, dropout_p, rng);
    gemm(false, false, n, cfg.vocab, d, T(1), ws.lnf_out.data(), m.ps.p(m.h.lm_w), T(0),
         ws.logits.data());
    return ws.logits.data();
}

template <class T>
LossParts lm_loss_logits(const T* logits, const uint16_t* targets, int n, int vocab, double lambda,
                         const TokenizerState& tok, T* dlogits) {
    const double deq_slope = tok.bin_width();
    double ce_sum = 0.0, mse_sum = 0.0;
    std::vector<double> p(vocab);
    for (int t = 0; t < n; ++t) {
        const T* row = logits + static_cast<size_t>(t) * vocab;
        const int z = targets[t];
        if (z >= vocab) fail_usage("target token out of vocabulary");
        double mx = -1e300;
        for (int j = 0; j < vocab; ++j) mx = std::max(mx, static_cast<double>(row[j]));
        double sum = 0.0;
        if constexpr (std::is_same_v<T, float>) {
            const float mxf = static_cast<float>(mx); // exact: max of floats
#pragma omp simd
            for (int j = 0; j < vocab; ++j) p[j] = ::expf(row[j] - mxf);
#pragma omp simd reduction(+ : sum)
            for (int j = 0; j < vocab; ++j) sum += p[j];
        } else {
            for (int j = 0; j < vocab; ++j) {
                p[j] = std::exp(static_cast<double>(row[j]) - mx);
                sum += p[j];
            }
        }
        const double inv = 1.0 / sum;
        double expect = 0.0;
        for (int j = 0; j < vocab; ++j) {
            p[j] *= inv;
            expect += p[j] * j;
        }
        ce_sum += -(static_cast<double>(row[z]) - mx - std::log(sum));
        const double val = dequantize(expect, tok);
        const double tgt = dequantize(static_cast<double>(z), tok);
        const double err = val - tgt;
        mse_sum += err * err;
        if (dlogits) {
            T* drow = dlogits + static_cast<size_t>(t) * vocab;
            const double mse_coeff = lambda * 2.0 * err * deq_slope / n;
            for (int j = 0; j < vocab; ++j) {
                const double dce = (p[j] - (j == z ? 1.0 : 0.0)) / n;
                const double dmse = mse_coeff * p[j] * (j - expect);
                drow[j] = static_cast<T>(dce + dmse);
            }
        }
    }
    LossParts parts;
    parts.ce = ce_sum / n;
    parts.mse = mse_sum / n;
    parts.total = parts.ce + lambda * parts.mse;
    return parts;
}

template <class T>
LossParts lm_loss(const Model<T>& m, Workspace<T>& ws, const uint16_t* tokens,
                  const uint16_t* targets, int n, double lambda, const TokenizerState& tok,
                  double dropout_p, Rng* rng) {
    const T* logits = lm_forward(m, ws, tokens, n, dropout_p, rng);
    return lm_loss_logits(logits, targets, n, m.cfg.vocab, lambda, tok, static_cast<T*>(nullptr));
}

template <class T>
LossParts lm_loss_grad(Model<T>& m, Workspace<T>& ws, const uint16_t* tokens,
                       const uint16_t* targets, int n, double lambda, const TokenizerState& tok,
                       double dropout_p, Rng* rng, double grad_scale, std::vector<T>* grad_out) {
    const ModelConfig& cfg = m.cfg;
    const int d = cfg.d_model;
    const T* logits = lm_forward(m, ws, tokens, n, dropout_p, rng);
    LossParts parts = lm_loss_logits(logits, targets, n, cfg.vocab, lambda, tok, ws.dlogits.data());

    GradSink<T> G{&m.ps, grad_out ? grad_out->data() : m.ps.grad.data()};
    if (grad_out && grad_out->size() != m.ps.data.size())
        fail_usage("gradient buffer size mismatch");
    if (grad_scale != 1.0)
        for (size_t i = 0; i < static_cast<size_t>(n) * cfg.vocab; ++i)
            ws.dlogits[i] = static_cast<T>(ws.dlogits[i] * grad_scale);

    // head
    gemm(true, false, d, cfg.vocab, n, T(1), ws.lnf_out.data(), ws.dlogits.data(), T(1), G(m.h.lm_w));
    gemm(false, true, n, d, cfg.vocab, T(1), ws.dlogits.data(), m.ps.p(m.h.lm_w), T(0),
         ws.dxa.data());
    const T* xN = cfg.n_layers > 0 ? ws.layers[cfg.n_layers - 1].x2.data() : ws.x0.data();
    layernorm_backward(ws.dxa.data(), xN, ws.lnf_mean.data(), ws.lnf_rstd.data(), m.ps.p(m.h.final_g),
                       G(m.h.final_g), G(m.h.final_b), n, d);
    backbone_backward(m, ws, n, dropout_p, G);
    // embedding
    dropout_backward(ws.dxa.data(), ws.emb_mask.data(), static_cast<size_t>(n) * d, dropout_p);
    T* dte = G(m.h.tok_emb);
    T* dpe = G(m.h.pos_emb);
    for (int t = 0; t < n; ++t) {
        const T* dx = ws.dxa.data() + static_cast<size_t>(t) * d;
        T* te = dte + static_cast<size_t>(tokens[t]) * d;
        T* pe = dpe + static_cast<size_t>(t) * d;
        for (int j = 0; j < d; ++j) {
            te[j] += dx[j];
            pe[j] += dx[j];
        }
    }
    return parts;
}

// --- classifier path ---

namespace {

template <class T>
void clf_embed(const Model<T>& m, Workspace<T>& ws, const double* window, int64_t width,
               const TokenizerState& tok, int* n_out) {
    const ModelConfig& cfg = m.cfg;
    if (cfg.channels <= 0) fail_usage("model has no classifier head");
    if (width % cfg.frame_len != 0) fail_usage("window width must be divisible by frame_len");
    const int n = static_cast<int>(width / cfg.frame_len);
    if (n < 1 || n > cfg.block_size) fail_usage("frame count out of range");
    const int C = cfg.channels;
    const int F = cfg.frame_len;
    const int cf = C * F;
    const int d = cfg.d_model;
    // z-score with the tokenizer statistics, frames channel-major within a row
    for (int t = 0; t < n; ++t) {
        T* row = ws.frames.data() + static_cast<size_t>(t) * cf;
        for (int c = 0; c < C; ++c)
            for (int i = 0; i < F; ++i)
                row[c * F + i] = static_cast<T>(
                    (window[static_cast<size_t>(c) * width + t * F + i] - tok.mu) / tok.sigma);
    }
    gemm(false, false, n, d, cf, T(1), ws.frames.data(), m.ps.p(m.h.in_proj_w), T(0), ws.x0.data());
    add_bias(ws.x0.data(), m.ps.p(m.h.in_proj_b), n, d);
    const T* pe = m.ps.p(m.h.pos_emb);
    for (size_t i = 0; i < static_cast<size_t>(n) * d; ++i) ws.x0[i] += pe[i];
    *n_out = n;
}

template <class T>
void clf_head_forward(const Model<T>& m, Workspace<T>& ws, int n, double dropout_p, Rng* rng) {
    const int d = m.cfg.d_model;
    // global average pooling over positions
    for (int j = 0; j < d; ++j) {
        double s = 0.0;
        for (int t = 0; t < n; ++t) s += static_cast<double>(ws.lnf_out[static_cast<size_t>(t) * d + j]);
        ws.pooled[j] = static_cast<T>(s / n);
    }
    T mean, rstd;
    layernorm_forward(ws.pooled.data(), m.ps.p(m.h.head_ln_g), m.ps.p(m.h.head_ln_b), ws.h_ln.data(),
                      &mean, &rstd, 1, d);
    ws.hln_mean = mean;
    ws.hln_rstd = rstd;
    gemm(false, false, 1, d, d, T(1), ws.h_ln.data(), m.ps.p(m.h.head_fc_w), T(0), ws.h_fc.data());
    add_bias(ws.h_fc.data(), m.ps.p(m.h.head_fc_b), 1, d);
    gelu_forward(ws.h_fc.data(), ws.h_act.data(), d);
    dropout_forward(ws.h_act.data(), ws.head_mask.data(), d, dropout_p, rng);
    gemm(false, false, 1, 2, d, T(1), ws.h_act.data(), m.ps.p(m.h.head_out_w), T(0), ws.clf_logits);
    ws.clf_logits[0] += m.ps.p(m.h.head_out_b)[0];
    ws.clf_logits[1] += m.ps.p(m.h.head_out_b)[1];
    const double mx = std::max(static_cast<double>(ws.clf_logits[0]), static_cast<double>(ws.clf_logits[1]));
    const double e0 = std::exp(static_cast<double>(ws.clf_logits[0]) - mx);
    const double e1 = std::exp(static_cast<double>(ws.clf_logits[1]) - mx);
    ws.clf_p[0] = static_cast<T>(e0 / (e0 + e1));
    ws.clf_p[1] = static_cast<T>(e1 / (e0 + e1));
}

constexpr double kProbEps = 1e-7;

double weighted_ce(double p0, double p1, int label, double w0, double w1) {
    const double q = std::clamp(label == 1 ? p1 : p0, kProbEps, 1.0 - kProbEps);
    return -(label == 1 ? w1 : w0) * std::log(q);
}

} // namespace

double finetune_loss(double p1, int label, double w0, double w1) {
    if (label != 0 && label != 1) fail_usage("label must be 0 or 1");
    return weighted_ce(1.0 - p1, p1, label, w0, w1);
}

template <class T>
void clf_forward(const Model<T>& m, Workspace<T>& ws, const double* window, int64_t width,
                 const TokenizerState& tok, T p_out[2], double dropout_p, Rng* rng, T* pooled_out) {
    int n = 0;
    clf_embed(m, ws, window, width, tok, &n);
    dropout_forward(ws.x0.data(), ws.emb_mask.data(), static_cast<size_t>(n) * m.cfg.d_model,
                    dropout_p, rng);
    backbone_forward(m, ws, n, dropout_p, rng);
    clf_head_forward(m, ws, n, dropout_p, rng);
    p_out[0] = ws.clf_p[0];
    p_out[1] = ws.clf_p[1];
    if (pooled_out)
        for (int j = 0; j < m.cfg.d_model; ++j) pooled_out[j] = ws.pooled[j];
}

template <class T>
double clf_loss(const Model<T>& m, Workspace<T>& ws, const double* window, int64_t width,
                const TokenizerState& tok, int label, double w0, double w1, double dropout_p,
                Rng* rng) {
    T p[2];
    clf_forward(m, ws, window, width, tok, p, dropout_p, rng, static_cast<T*>(nullptr));
    return weighted_ce(static_cast<double>(p[0]), static_cast<double>(p[1]), label, w0, w1);
}

template <class T>
double clf_loss_grad(Model<T>& m, Workspace<T>& ws, const double* window, int64_t width,
                     const TokenizerState& tok, int label, double w0, double w1, double dropout_p,
                     Rng* rng, double grad_scale, std::vector<T>* grad_out) {
    const ModelConfig& cfg = m.cfg;
    const int d = cfg.d_model;
    T p[2];
    int n = 0;
    clf_embed(m, ws, window, width, tok, &n);
    dropout_forward(ws.x0.data(), ws.emb_mask.data(), static_cast<size_t>(n) * d, dropout_p, rng);
    backbone_forward(m, ws, n, dropout_p, rng);
    clf_head_forward(m, ws, n, dropout_p, rng);
    p[0] = ws.clf_p[0];
    p[1] = ws.clf_p[1];
    const double loss =
        weighted_ce(static_cast<double>(p[0]), static_cast<double>(p[1]), label, w0, w1);

    GradSink<T> G{&m.ps, grad_out ? grad_out->data() : m.ps.grad.data()};
    if (grad_out && grad_out->size() != m.ps.data.size())
        fail_usage("gradient buffer size mismatch");

    // d loss / d logits; zero where the probability clamp is active
    const double w = label == 1 ? w1 : w0;
    const double q = label == 1 ? static_cast<double>(p[1]) : static_cast<double>(p[0]);
    T dlog[2] = {T(0), T(0)};
    if (q > kProbEps && q < 1.0 - kProbEps) {
        dlog[0] = static_cast<T>(grad_scale * w * (static_cast<double>(p[0]) - (label == 0 ? 1.0 : 0.0)));
        dlog[1] = static_cast<T>(grad_scale * w * (static_cast<double>(p[1]) - (label == 1 ? 1.0 : 0.0)));
    }

    // head backward
    G(m.h.head_out_b)[0] += dlog[0];
    G(m.h.head_out_b)[1] += dlog[1];
    gemm(true, false, d, 2, 1, T(1), ws.h_act.data(), dlog, T(1), G(m.h.head_out_w));
    T* dact = ws.dy.data(); // [d]
    gemm(false, true, 1, d, 2, T(1), dlog, m.ps.p(m.h.head_out_w), T(0), dact);
    dropout_backward(dact, ws.head_mask.data(), d, dropout_p);
    gelu_backward(ws.h_fc.data(), dact, d);
    colsum_accum(dact, G(m.h.head_fc_b), 1, d);
    gemm(true, false, d, d, 1, T(1), ws.h_ln.data(), dact, T(1), G(m.h.head_fc_w));
    T* dln = ws.dxb.data(); // [d]
    gemm(false, true, 1, d, d, T(1), dact, m.ps.p(m.h.head_fc_w), T(0), dln);
    layernorm_backward(dln, ws.pooled.data(), &ws.hln_mean, &ws.hln_rstd, m.ps.p(m.h.head_ln_g),
                       G(m.h.head_ln_g), G(m.h.head_ln_b), 1, d);
    // pooling backward: every position gets dpooled / n
    for (int t = 0; t < n; ++t)
        for (int j = 0; j < d; ++j)
            ws.dxa[static_cast<size_t>(t) * d + j] = static_cast<T>(static_cast<double>(dln[j]) / n);
    const T* xN = ws.layers[cfg.n_layers - 1].x2.data();
    layernorm_backward(ws.dxa.data(), xN, ws.lnf_mean.data(), ws.lnf_rstd.data(), m.ps.p(m.h.final_g),
                       G(m.h.final_g), G(m.h.final_b), n, d);
    backbone_backward(m, ws, n, dropout_p, G);
    dropout_backward(ws.dxa.data(), ws.emb_mask.data(), static_cast<size_t>(n) * d, dropout_p);
    // embedding backward: positional table and the input projection
    T* dpe = G(m.h.pos_emb);
    for (size_t i = 0; i < static_cast<size_t>(n) * d; ++i) dpe[i] += ws.dxa[i];
    const int cf = cfg.channels * cfg.frame_len;
    colsum_accum(ws.dxa.data(), G(m.h.in_proj_b), n, d);
    gemm(true, false, cf, d, n, T(1), ws.frames.data(), ws.dxa.data(), T(1), G(m.h.in_proj_w));
    return loss;
}

// --- explicit instantiations ---

template struct ParamStore<float>;
template struct ParamStore<double>;
template class Model<float>;
template class Model<double>;
template struct Workspace<float>;
template struct Workspace<double>;
template Workspace<float>* workspace_create<float>(const ModelConfig&);
template Workspace<double>* workspace_create<double>(const ModelConfig&);
template void workspace_destroy<float>(Workspace<float>*);
template void workspace_destroy<double>(Workspace<double>*);
template const float* lm_forward<float>(const Model<float>&, Workspace<float>&, const uint16_t*, int,
                                        double, Rng*);
template const double* lm_forward<double>(const Model<double>&, Workspace<double>&, const uint16_t*,
                                          int, double, Rng*);
template LossParts lm_loss<float>(const Model<float>&, Workspace<float>&, const uint16_t*,
                                  const uint16_t*, int, double, const TokenizerState&, double, Rng*);
template LossParts lm_loss<double>(const Model<double>&, Workspace<double>&, const uint16_t*,
                                   const uint16_t*, int, double, const TokenizerState&, double, Rng*);
template LossParts lm_loss_logits<float>(const float*, const uint16_t*, int, int, double,
                                         const TokenizerState&, float*);
template LossParts lm_loss_logits<double>(const double*, const uint16_t*, int, int, double,
                                          const TokenizerState&, double*);
template LossParts lm_loss_grad<float>(Model<float>&, Workspace<float>&, const uint16_t*,
                                       const uint16_t*, int, double, const TokenizerState&, double,
                                       Rng*, double, std::vector<float>*);
template LossParts lm_loss_grad<double>(Model<double>&, Workspace<double>&, const uint16_t*,
                                        const uint16_t*, int, double, const TokenizerState&, double,
                                        Rng*, double, std::vector<double>*);
template void clf_forward<float>(const Model<float>&, Workspace<float>&, const double*, int64_t,
                                 const TokenizerState&, float[2], double, Rng*, float*);
template void clf_forward<double>(const Model<double>&, Workspace<double>&, const double*, int64_t,
                                  const TokenizerState&, double[2], double, Rng*, double*);
template double clf_loss<float>(const Model<float>&, Workspace<float>&, const double*, int64_t,
                                const TokenizerState&, int, double, double, double, Rng*);
template double clf_loss<double>(const Model<double>&, Workspace<double>&, const double*, int64_t,
                                 const TokenizerState&, int, double, double, double, Rng*);
template double clf_loss_grad<float>(Model<float>&, Workspace<float>&, const double*, int64_t,
                                     const TokenizerState&, int, double, double, double, Rng*, double,
                                     std::vector<float>*);
template double clf_loss_grad<double>(Model<double>&, Workspace<double>&, const double*, int64_t,
                                      const TokenizerState&, int, double, double, double, Rng*,
                                      double, std::vector<double>*);

} // namespace eegfc
