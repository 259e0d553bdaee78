#include <doctest.h>

#include "eegfc/error.hpp"
#include "eegfc/net.hpp"
#include "eegfc/tokenizer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

using namespace eegfc;
using doctest::Approx;

namespace {

ModelConfig tiny_cfg(int channels, int n_layers = 2) {
    ModelConfig cfg;
    cfg.vocab = 32;
    cfg.d_model = 16;
    cfg.n_layers = n_layers;
    cfg.n_heads = 2;
    cfg.block_size = 16;
    cfg.frame_len = 5;
    cfg.channels = channels;
    return cfg;
}

TokenizerState tiny_tok() { return TokenizerState{32, 5.0, 0.0, 1.0}; }

std::vector<uint16_t> random_tokens(int n, int vocab, uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<uint16_t> t(n);
    for (auto& v : t) v = static_cast<uint16_t>(rng() % vocab);
    return t;
}

void fill_gauss(double* p, size_t n, std::mt19937_64& rng, double scale = 1.0) {
    std::normal_distribution<double> g(0.0, scale);
    for (size_t i = 0; i < n; ++i) p[i] = g(rng);
}

void zero_params(Model<double>& m) { std::fill(m.ps.data.begin(), m.ps.data.end(), 0.0); }

void set_tensor_gauss(Model<double>& m, int handle, std::mt19937_64& rng, double scale = 1.0) {
    fill_gauss(m.ps.p(handle), m.ps.infos[handle].size, rng, scale);
}

void set_tensor_const(Model<double>& m, int handle, double v) {
    std::fill_n(m.ps.p(handle), m.ps.infos[handle].size, v);
}

// mirrors of the layer pieces, written directly from their definitions
std::vector<double> layer_norm_ref(const std::vector<double>& x) {
    const size_t d = x.size();
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= double(d);
    double var = 0.0;
    for (double v : x) var += (v - mean) * (v - mean);
    var /= double(d);
    const double rstd = 1.0 / std::sqrt(var + 1e-5);
    std::vector<double> y(d);
    for (size_t i = 0; i < d; ++i) y[i] = (x[i] - mean) * rstd;
    return y;
}

double gelu_ref(double x) { return 0.5 * x * (1.0 + std::erf(x / std::sqrt(2.0))); }

// Central finite differences over every parameter against the analytic
// gradient. Returns the number of entries whose relative error exceeds the
// bound (ignoring entries where both magnitudes sit below the noise floor).
template <class LossFn>
int gradcheck_all_params(Model<double>& m, const std::vector<double>& analytic, LossFn loss,
                         double h = 1e-5, double rel_tol = 1e-3, double abs_floor = 1e-6) {
    REQUIRE(analytic.size() == m.ps.data.size());
    int bad = 0;
    for (const auto& info : m.ps.infos) {
        for (size_t k = 0; k < info.size; ++k) {
            const size_t idx = info.offset + k;
            const double saved = m.ps.data[idx];
            m.ps.data[idx] = saved + h;
            const double lp = loss();
            m.ps.data[idx] = saved - h;
            const double lm = loss();
            m.ps.data[idx] = saved;
            const double fd = (lp - lm) / (2.0 * h);
            const double an = analytic[idx];
            const double mag = std::max(std::fabs(fd), std::fabs(an));
            if (mag <= abs_floor) continue;
            const double rel = std::fabs(fd - an) / mag;
            if (rel > rel_tol) {
                ++bad;
                if (bad <= 5) {
                    MESSAGE("gradient mismatch at ", info.name, "[", k, "]: analytic=", an,
                            " fd=", fd, " rel=", rel);
                }
            }
        }
    }
    return bad;
}

} // namespace

TEST_SUITE("net") {

TEST_CASE("single-token context yields one finite logits row") {
    Model<double> m(tiny_cfg(0));
    m.init_weights(3);
    WorkspaceHolder<double> wsh(m.cfg);
    uint16_t tok = 7;
    const double* logits = lm_forward(m, *wsh.get(), &tok, 1);
    for (int v = 0; v < m.cfg.vocab; ++v) CHECK(std::isfinite(logits[v]));
}

TEST_CASE("context length and vocabulary bounds are enforced") {
    Model<double> m(tiny_cfg(0));
    m.init_weights(3);
    WorkspaceHolder<double> wsh(m.cfg);
    auto toks = random_tokens(17, 32, 1); // block_size is 16
    CHECK_THROWS_AS(lm_forward(m, *wsh.get(), toks.data(), 17), Error);
    uint16_t bad = 32;
    CHECK_THROWS_AS(lm_forward(m, *wsh.get(), &bad, 1), Error);
    CHECK_THROWS_AS(lm_forward(m, *wsh.get(), toks.data(), 0), Error);
}

TEST_CASE("position t sees only tokens at or before t") {
    for (int n_layers : {1, 2}) {
        ModelConfig cfg = tiny_cfg(0, n_layers);
        Model<double> m(cfg);
        m.init_weights(5);
        WorkspaceHolder<double> wsh(cfg);
        const int n = 12;
        auto toks = random_tokens(n, cfg.vocab, 21);
        const double* base_ptr = lm_forward(m, *wsh.get(), toks.data(), n);
        std::vector<double> base(base_ptr, base_ptr + size_t(n) * cfg.vocab);

        for (int j = 0; j < n; ++j) {
            auto mod = toks;
            mod[j] = static_cast<uint16_t>((mod[j] + 7) % cfg.vocab);
            const double* out = lm_forward(m, *wsh.get(), mod.data(), n);
            bool row_j_changed = false;
            for (int t = 0; t < n; ++t) {
                for (int v = 0; v < cfg.vocab; ++v) {
                    const double a = base[size_t(t) * cfg.vocab + v];
                    const double b = out[size_t(t) * cfg.vocab + v];
                    if (t < j) {
                        // strictly causal: bit-for-bit identical before j
                        REQUIRE(a == b);
                    } else if (t == j && a != b) {
                        row_j_changed = true;
                    }
                }
            }
            CHECK(row_j_changed);
        }
    }
}

TEST_CASE("with zeroed blocks the model reduces to norm(embedding) times the output matrix") {
    ModelConfig cfg = tiny_cfg(0);
    Model<double> m(cfg);
    std::mt19937_64 rng(77);
    zero_params(m);
    set_tensor_gauss(m, m.h.tok_emb, rng);
    set_tensor_gauss(m, m.h.pos_emb, rng);
    set_tensor_const(m, m.h.final_g, 1.0);
    set_tensor_gauss(m, m.h.lm_w, rng);

    WorkspaceHolder<double> wsh(cfg);
    const int n = 10;
    auto toks = random_tokens(n, cfg.vocab, 9);
    const double* logits = lm_forward(m, *wsh.get(), toks.data(), n);

    const double* wte = m.ps.p(m.h.tok_emb);
    const double* wpe = m.ps.p(m.h.pos_emb);
    const double* lw = m.ps.p(m.h.lm_w);
    const int d = cfg.d_model;
    for (int t = 0; t < n; ++t) {
        std::vector<double> e(d);
        for (int i = 0; i < d; ++i) e[i] = wte[size_t(toks[t]) * d + i] + wpe[size_t(t) * d + i];
        std::vector<double> y = layer_norm_ref(e);
        for (int v = 0; v < cfg.vocab; ++v) {
            double want = 0.0;
            for (int i = 0; i < d; ++i) want += y[i] * lw[size_t(i) * cfg.vocab + v];
            CHECK(logits[size_t(t) * cfg.vocab + v] == Approx(want).epsilon(1e-12));
        }
    }
}

TEST_CASE("uniform logits cost ln(vocab) per token") {
    const int n = 4, vocab = 512;
    std::vector<double> logits(size_t(n) * vocab, 0.0);
    std::vector<uint16_t> targets = {0, 17, 255, 511};
    TokenizerState tok; // 512 levels, mu 0, sigma 1
    LossParts parts = lm_loss_logits(logits.data(), targets.data(), n, vocab, 0.1, tok);
    CHECK(parts.ce == Approx(std::log(512.0)).epsilon(1e-9));
    CHECK(parts.total == Approx(parts.ce + 0.1 * parts.mse).epsilon(1e-12));

    // through the model: zero output matrix means uniform next-token beliefs
    ModelConfig cfg = tiny_cfg(0);
    Model<double> m(cfg);
    m.init_weights(2);
    set_tensor_const(m, m.h.lm_w, 0.0);
    WorkspaceHolder<double> wsh(cfg);
    auto toks = random_tokens(9, cfg.vocab, 3);
    LossParts lp = lm_loss(m, *wsh.get(), toks.data(), toks.data() + 1, 8, 0.1, tiny_tok());
    CHECK(lp.ce == Approx(std::log(32.0)).epsilon(1e-9));
}

TEST_CASE("a concentrated correct prediction has zero cost") {
    const int n = 3, vocab = 512;
    std::vector<uint16_t> targets = {40, 256, 509};
    std::vector<double> logits(size_t(n) * vocab, 0.0);
    for (int t = 0; t < n; ++t) logits[size_t(t) * vocab + targets[t]] = 60.0;
    TokenizerState tok;
    LossParts parts = lm_loss_logits(logits.data(), targets.data(), n, vocab, 0.1, tok);
    CHECK(parts.ce <= 1e-9);
    CHECK(parts.mse <= 1e-9);
    CHECK(parts.total <= 1e-9);
}

TEST_CASE("expected-level error and token cost are decoupled") {
    // beliefs split half/half between levels 100 and 200
    const int vocab = 512;
    std::vector<double> logits(vocab, -500.0);
    logits[100] = 0.0;
    logits[200] = 0.0;
    TokenizerState tok; // mu 0, sigma 1, clip 5, 512 levels

    // target 150: the expected level lands exactly on the target, so the
    // amplitude term vanishes even though the token term is enormous
    uint16_t t150 = 150;
    LossParts a = lm_loss_logits(logits.data(), &t150, 1, vocab, 0.1, tok);
    CHECK(a.mse <= 1e-20);
    CHECK(a.ce == Approx(500.0 + std::log(2.0)).epsilon(1e-9));

    // target 100: the token term is exactly ln 2 while the expected level sits
    // 50 bins away: (50 * 10/511)^2 after dequantization
    uint16_t t100 = 100;
    LossParts b = lm_loss_logits(logits.data(), &t100, 1, vocab, 0.1, tok);
    CHECK(b.ce == Approx(std::log(2.0)).epsilon(1e-12));
    const double bin = 10.0 / 511.0;
    CHECK(b.mse == Approx(50.0 * bin * 50.0 * bin).epsilon(1e-9));
    CHECK(b.total == Approx(b.ce + 0.1 * b.mse).epsilon(1e-12));
}

TEST_CASE("token-cost gradient equals beliefs minus the one-hot target") {
    const int n = 4, vocab = 32;
    std::mt19937_64 rng(15);
    std::vector<double> logits(size_t(n) * vocab);
    fill_gauss(logits.data(), logits.size(), rng);
    auto targets = random_tokens(n, vocab, 8);
    std::vector<double> dlogits(logits.size(), 0.0);
    lm_loss_logits(logits.data(), targets.data(), n, vocab, 0.0, tiny_tok(), dlogits.data());
    for (int t = 0; t < n; ++t) {
        // softmax computed independently with max-subtraction
        double mx = -1e300, z = 0.0;
        for (int v = 0; v < vocab; ++v) mx = std::max(mx, logits[size_t(t) * vocab + v]);
        for (int v = 0; v < vocab; ++v) z += std::exp(logits[size_t(t) * vocab + v] - mx);
        for (int v = 0; v < vocab; ++v) {
            const double p = std::exp(logits[size_t(t) * vocab + v] - mx) / z;
            const double want = (p - (targets[t] == v ? 1.0 : 0.0)) / double(n);
            CHECK(dlogits[size_t(t) * vocab + v] == Approx(want).epsilon(1e-12));
        }
    }
}

TEST_CASE("weighted binary cost matches hand arithmetic") {
    CHECK(finetune_loss(0.5, 0, 1.0, 1.0) == Approx(std::log(2.0)).epsilon(1e-12));
    CHECK(finetune_loss(0.5, 1, 1.0, 1.0) == Approx(std::log(2.0)).epsilon(1e-12));
    // certainty in the right class costs nothing (up to the clamp)
    CHECK(finetune_loss(1.0, 1, 1.0, 1.0) <= 1.1e-7);
    CHECK(finetune_loss(0.0, 0, 1.0, 1.0) <= 1.1e-7);
    // clamp boundary: p = 1e-7 for the true class
    CHECK(finetune_loss(1e-7, 1, 1.0, 3.0) == Approx(3.0 * std::log(1e7)).epsilon(1e-9));
    CHECK(finetune_loss(0.0, 1, 1.0, 3.0) == Approx(3.0 * std::log(1e7)).epsilon(1e-9));
    // two-sample batch mean with weights w1=2, w0=2/3
    const double batch =
        0.5 * (finetune_loss(0.9, 1, 2.0 / 3.0, 2.0) + finetune_loss(0.2, 0, 2.0 / 3.0, 2.0));
    CHECK(batch == Approx(0.5 * (2.0 * -std::log(0.9) + (2.0 / 3.0) * -std::log(0.8))).epsilon(1e-12));
    CHECK(batch == Approx(0.17974).epsilon(5e-5));
    CHECK_THROWS_AS(finetune_loss(0.5, 2, 1.0, 1.0), Error);
}

TEST_CASE("classifier probabilities are a proper, deterministic distribution") {
    ModelConfig cfg = tiny_cfg(3);
    Model<double> m(cfg);
    m.init_weights(9);
    WorkspaceHolder<double> wsh(cfg);
    std::mt19937_64 rng(4);
    std::vector<double> window(3 * 25);
    fill_gauss(window.data(), window.size(), rng);

    double p1[2], p2[2], pooled1[16], pooled2[16];
    clf_forward(m, *wsh.get(), window.data(), 25, tiny_tok(), p1, 0.0, nullptr, pooled1);
    clf_forward(m, *wsh.get(), window.data(), 25, tiny_tok(), p2, 0.0, nullptr, pooled2);
    CHECK(p1[0] + p1[1] == Approx(1.0).epsilon(1e-12));
    CHECK(p1[0] >= 0.0);
    CHECK(p1[1] >= 0.0);
    CHECK(p1[0] == p2[0]);
    CHECK(p1[1] == p2[1]);
    for (int i = 0; i < 16; ++i) CHECK(pooled1[i] == pooled2[i]);

    // frame misalignment and over-long windows are refused
    CHECK_THROWS_AS(clf_forward(m, *wsh.get(), window.data(), 26, tiny_tok(), p1), Error);
    std::vector<double> long_window(3 * 5 * 17);
    CHECK_THROWS_AS(clf_forward(m, *wsh.get(), long_window.data(), 5 * 17, tiny_tok(), p1), Error);
}

TEST_CASE("shifting both output biases leaves the probabilities unchanged") {
    ModelConfig cfg = tiny_cfg(2);
    Model<double> m(cfg);
    m.init_weights(31);
    WorkspaceHolder<double> wsh(cfg);
    std::mt19937_64 rng(6);
    std::vector<double> window(2 * 20);
    fill_gauss(window.data(), window.size(), rng);

    double base[2];
    clf_forward(m, *wsh.get(), window.data(), 20, tiny_tok(), base);
    double* b = m.ps.p(m.h.head_out_b);
    b[0] += 5.0;
    b[1] += 5.0;
    double shifted[2];
    clf_forward(m, *wsh.get(), window.data(), 20, tiny_tok(), shifted);
    CHECK(shifted[0] == Approx(base[0]).epsilon(1e-12));
    CHECK(shifted[1] == Approx(base[1]).epsilon(1e-12));
    CHECK((base[0] > base[1]) == (shifted[0] > shifted[1]));
}

TEST_CASE("with zeroed blocks the classifier head traces by hand") {
    ModelConfig cfg = tiny_cfg(3);
    Model<double> m(cfg);
    std::mt19937_64 rng(55);
    zero_params(m);
    // constant input row v at every position; blocks contribute nothing
    set_tensor_gauss(m, m.h.in_proj_b, rng);
    set_tensor_const(m, m.h.final_g, 1.0);
    set_tensor_const(m, m.h.head_ln_g, 1.0);
    set_tensor_gauss(m, m.h.head_fc_w, rng, 0.3);
    set_tensor_gauss(m, m.h.head_fc_b, rng, 0.3);
    set_tensor_gauss(m, m.h.head_out_w, rng, 0.3);
    set_tensor_gauss(m, m.h.head_out_b, rng, 0.3);

    WorkspaceHolder<double> wsh(cfg);
    std::vector<double> window(3 * 25, 0.123); // ignored: projection weight is zero
    double p[2];
    clf_forward(m, *wsh.get(), window.data(), 25, tiny_tok(), p);

    const int d = cfg.d_model;
    std::vector<double> v(m.ps.p(m.h.in_proj_b), m.ps.p(m.h.in_proj_b) + d);
    // every position holds v, so the pooled vector is norm(v) itself
    std::vector<double> pooled = layer_norm_ref(v);
    std::vector<double> s = layer_norm_ref(pooled);
    const double* w1 = m.ps.p(m.h.head_fc_w);
    const double* b1 = m.ps.p(m.h.head_fc_b);
    const double* w2 = m.ps.p(m.h.head_out_w);
    const double* b2 = m.ps.p(m.h.head_out_b);
    std::vector<double> act(d);
    for (int j = 0; j < d; ++j) {
        double a = b1[j];
        for (int i = 0; i < d; ++i) a += s[i] * w1[size_t(i) * d + j];
        act[j] = gelu_ref(a);
    }
    double l0 = b2[0], l1 = b2[1];
    for (int j = 0; j < d; ++j) {
        l0 += act[j] * w2[size_t(j) * 2 + 0];
        l1 += act[j] * w2[size_t(j) * 2 + 1];
    }
    const double mx = std::max(l0, l1);
    const double z = std::exp(l0 - mx) + std::exp(l1 - mx);
    CHECK(p[0] == Approx(std::exp(l0 - mx) / z).epsilon(1e-12));
    CHECK(p[1] == Approx(std::exp(l1 - mx) / z).epsilon(1e-12));
}

TEST_CASE("dropout is reproducible for a fixed seed and off by default") {
    ModelConfig cfg = tiny_cfg(0);
    Model<double> m(cfg);
    m.init_weights(13);
    WorkspaceHolder<double> wsh(cfg);
    auto toks = random_tokens(10, cfg.vocab, 2);

    const double* a = lm_forward(m, *wsh.get(), toks.data(), 10);
    std::vector<double> av(a, a + 10 * size_t(cfg.vocab));
    const double* b = lm_forward(m, *wsh.get(), toks.data(), 10);
    CHECK(std::equal(av.begin(), av.end(), b));

    Rng r1(mix_seed(3, 4));
    const double* c = lm_forward(m, *wsh.get(), toks.data(), 10, 0.5, &r1);
    std::vector<double> cv(c, c + av.size());
    Rng r2(mix_seed(3, 4));
    const double* dke = lm_forward(m, *wsh.get(), toks.data(), 10, 0.5, &r2);
    CHECK(std::equal(cv.begin(), cv.end(), dke));
    Rng r3(mix_seed(3, 5));
    const double* e = lm_forward(m, *wsh.get(), toks.data(), 10, 0.5, &r3);
    CHECK(!std::equal(cv.begin(), cv.end(), e));
    CHECK(!std::equal(av.begin(), av.end(), cv.begin())); // dropout actually fired
}

TEST_CASE("loss-only and loss-with-gradient paths agree") {
    ModelConfig cfg = tiny_cfg(3);
    Model<double> m(cfg);
    m.init_weights(19);
    WorkspaceHolder<double> wsh(cfg);
    auto toks = random_tokens(13, cfg.vocab, 5);
    TokenizerState tok = tiny_tok();

    LossParts l1 = lm_loss(m, *wsh.get(), toks.data(), toks.data() + 1, 12, 0.1, tok);
    m.ps.zero_grad();
    LossParts l2 = lm_loss_grad(m, *wsh.get(), toks.data(), toks.data() + 1, 12, 0.1, tok, 0.0,
                                nullptr, 1.0);
    CHECK(l1.ce == Approx(l2.ce).epsilon(1e-14));
    CHECK(l1.mse == Approx(l2.mse).epsilon(1e-14));
    CHECK(l1.total == Approx(l2.total).epsilon(1e-14));

    std::mt19937_64 rng(7);
    std::vector<double> window(3 * 25);
    fill_gauss(window.data(), window.size(), rng);
    double c1 = clf_loss(m, *wsh.get(), window.data(), 25, tok, 1, 0.7, 1.6);
    m.ps.zero_grad();
    double c2 = clf_loss_grad(m, *wsh.get(), window.data(), 25, tok, 1, 0.7, 1.6, 0.0, nullptr, 1.0);
    CHECK(c1 == Approx(c2).epsilon(1e-14));
}

TEST_CASE("gradients scale linearly and accumulate into the chosen sink") {
    ModelConfig cfg = tiny_cfg(0);
    Model<double> m(cfg);
    m.init_weights(23);
    WorkspaceHolder<double> wsh(cfg);
    auto toks = random_tokens(9, cfg.vocab, 14);
    TokenizerState tok = tiny_tok();

    m.ps.zero_grad();
    lm_loss_grad(m, *wsh.get(), toks.data(), toks.data() + 1, 8, 0.1, tok, 0.0, nullptr, 1.0);
    std::vector<double> g1 = m.ps.grad;

    m.ps.zero_grad();
    lm_loss_grad(m, *wsh.get(), toks.data(), toks.data() + 1, 8, 0.1, tok, 0.0, nullptr, 2.0);
    for (size_t i = 0; i < g1.size(); ++i)
        CHECK(m.ps.grad[i] == Approx(2.0 * g1[i]).epsilon(1e-12));

    std::vector<double> ext(m.ps.grad.size(), 0.0);
    m.ps.zero_grad();
    lm_loss_grad(m, *wsh.get(), toks.data(), toks.data() + 1, 8, 0.1, tok, 0.0, nullptr, 1.0, &ext);
    for (size_t i = 0; i < g1.size(); ++i) {
        CHECK(ext[i] == g1[i]);
        CHECK(m.ps.grad[i] == 0.0); // external sink leaves the store untouched
    }
}

TEST_CASE("analytic gradients match finite differences: token path") {
    ModelConfig cfg = tiny_cfg(0);
    Model<double> m(cfg);
    m.init_weights(41);
    WorkspaceHolder<double> wsh(cfg);
    const int n = 16;
    auto toks = random_tokens(n + 1, cfg.vocab, 6);
    TokenizerState tok = tiny_tok();

    m.ps.zero_grad();
    lm_loss_grad(m, *wsh.get(), toks.data(), toks.data() + 1, n, 0.1, tok, 0.0, nullptr, 1.0);
    std::vector<double> analytic = m.ps.grad;
    auto loss = [&] {
        return lm_loss(m, *wsh.get(), toks.data(), toks.data() + 1, n, 0.1, tok).total;
    };
    CHECK(gradcheck_all_params(m, analytic, loss) == 0);
}

TEST_CASE("analytic gradients match finite differences: single layer, token term only") {
    ModelConfig cfg = tiny_cfg(0, 1);
    Model<double> m(cfg);
    m.init_weights(43);
    WorkspaceHolder<double> wsh(cfg);
    const int n = 12;
    auto toks = random_tokens(n + 1, cfg.vocab, 26);
    TokenizerState tok = tiny_tok();

    m.ps.zero_grad();
    lm_loss_grad(m, *wsh.get(), toks.data(), toks.data() + 1, n, 0.0, tok, 0.0, nullptr, 1.0);
    std::vector<double> analytic = m.ps.grad;
    auto loss = [&] {
        return lm_loss(m, *wsh.get(), toks.data(), toks.data() + 1, n, 0.0, tok).total;
    };
    CHECK(gradcheck_all_params(m, analytic, loss) == 0);
}

TEST_CASE("analytic gradients match finite differences: classifier path") {
    ModelConfig cfg = tiny_cfg(3);
    Model<double> m(cfg);
    m.init_weights(47);
    WorkspaceHolder<double> wsh(cfg);
    std::mt19937_64 rng(17);
    std::vector<double> window(3 * 25);
    fill_gauss(window.data(), window.size(), rng);
    TokenizerState tok = tiny_tok();

    for (int label : {0, 1}) {
        m.ps.zero_grad();
        clf_loss_grad(m, *wsh.get(), window.data(), 25, tok, label, 0.7, 1.6, 0.0, nullptr, 1.0);
        std::vector<double> analytic = m.ps.grad;
        auto loss = [&] {
            return clf_loss(m, *wsh.get(), window.data(), 25, tok, label, 0.7, 1.6);
        };
        CHECK(gradcheck_all_params(m, analytic, loss) == 0);
    }
}

} // TEST_SUITE
