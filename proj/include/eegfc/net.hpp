#pragma once

#include "eegfc/error.hpp"
#include "eegfc/tokenizer.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace eegfc {

// Decoder-only transformer with hand-written reverse-mode gradients.
// One parameter store backs two heads:
//   - language-model path: token ids -> embeddings -> blocks -> logits over the
//     quantization vocabulary (next-token pretraining);
//   - classifier path: continuous multichannel windows, z-scored and cut into
//     non-overlapping frames of frame_len samples per channel, projected into
//     the embedding dimension, run through the same blocks, mean-pooled over
//     positions, and scored by a small 2-way head.
// Everything is templated on the scalar so training can run in float while
// gradient checks run in double.

struct ModelConfig {
    int vocab = 512;
    int d_model = 128;
    int n_layers = 4;
    int n_heads = 4;
    int block_size = 512;       // maximum positions
    int frame_len = 15;         // classifier frame width per channel
    int channels = 0;           // 0 = language model only (no classifier tensors)
    double dropout_pretrain = 0.1;
    double dropout_finetune = 0.2;

    int mlp_hidden() const { return 4 * d_model; }
    int head_dim() const { return d_model / n_heads; }
    void validate() const {
        if (d_model % n_heads != 0) fail_usage("d_model must be divisible by n_heads");
        if (block_size < 1 || vocab < 2 || n_layers < 1) fail_usage("invalid model config");
        if (channels > 0 && frame_len < 1) fail_usage("frame_len must be >= 1");
    }
};

struct TensorInfo {
    std::string name;
    std::vector<int> dims;
    size_t offset = 0;
    size_t size = 0;
    bool decay = false;    // participates in weight decay (weight matrices only)
    bool backbone = true;  // transferred from pretraining checkpoints
};

template <class T>
struct ParamStore {
    std::vector<TensorInfo> infos;
    std::vector<T> data;
    std::vector<T> grad;

    int add(const std::string& name, std::vector<int> dims, bool decay, bool backbone);
    void allocate();
    int find(const std::string& name) const;
    T* p(int i) { return data.data() + infos[i].offset; }
    const T* p(int i) const { return data.data() + infos[i].offset; }
    T* g(int i) { return grad.data() + infos[i].offset; }
    const T* g(int i) const { return grad.data() + infos[i].offset; }
    void zero_grad() { std::fill(grad.begin(), grad.end(), T(0)); }
};

// xoshiro256++ bit generator (public-domain reference algorithm), seeded via
// splitmix64 so any 64-bit seed gives a well-mixed state. Chosen over
// std::mt19937_64 because dropout draws one value per activation element and
// the Mersenne twister's per-call cost dominated training steps.
struct Xoshiro256pp {
    using result_type = uint64_t;
    uint64_t s[4];
    explicit Xoshiro256pp(uint64_t seed = 0) {
        uint64_t z = seed;
        for (auto& w : s) {
            z += 0x9e3779b97f4a7c15ULL;
            uint64_t x = z;
            x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
            x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
            w = x ^ (x >> 31);
        }
    }
    static constexpr uint64_t min() { return 0; }
    static constexpr uint64_t max() { return ~uint64_t{0}; }
    static constexpr uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    uint64_t operator()() {
        const uint64_t out = rotl(s[0] + s[3], 23) + s[0];
        const uint64_t t = s[1] << 17;
        s[2] ^= s[0];
        s[3] ^= s[1];
        s[1] ^= s[2];
        s[0] ^= s[3];
        s[2] ^= t;
        s[3] = rotl(s[3], 45);
        return out;
    }
};

// Deterministic RNG wrapper used for init and dropout masks.
struct Rng {
    Xoshiro256pp g;
    std::normal_distribution<double> gauss_{0.0, 1.0};
    explicit Rng(uint64_t seed) : g(seed) {}
    double u01() { return (g() >> 11) * (1.0 / 9007199254740992.0); }
    double gauss() { return gauss_(g); }
};

uint64_t mix_seed(uint64_t a, uint64_t b, uint64_t c = 0);

template <class T>
struct Workspace; // defined in net.cpp; opaque activation/scratch buffers

template <class T>
class Model {
public:
    ModelConfig cfg;
    ParamStore<T> ps;

    explicit Model(const ModelConfig& c);
    void init_weights(uint64_t seed); // N(0, 0.02) weights, unit norms, zero biases

    // Handles into ps for the hot loops (filled by the constructor).
    struct Handles {
        int tok_emb = -1, pos_emb = -1, final_g = -1, final_b = -1, lm_w = -1;
        struct Layer {
            int ln1_g, ln1_b, wq, bq, wk, bk, wv, bv, wo, bo;
            int ln2_g, ln2_b, wfc, bfc, wproj, bproj;
        };
        std::vector<Layer> layers;
        int in_proj_w = -1, in_proj_b = -1;
        int head_ln_g = -1, head_ln_b = -1, head_fc_w = -1, head_fc_b = -1;
        int head_out_w = -1, head_out_b = -1;
    };
    Handles h;

    bool has_classifier() const { return cfg.channels > 0; }
};

struct LossParts {
    double ce = 0.0;
    double mse = 0.0;
    double total = 0.0;
};

template <class T>
Workspace<T>* workspace_create(const ModelConfig& cfg);
template <class T>
void workspace_destroy(Workspace<T>* ws);

// RAII helper for the opaque workspace.
template <class T>
class WorkspaceHolder {
public:
    explicit WorkspaceHolder(const ModelConfig& cfg) : ws_(workspace_create<T>(cfg)) {}
    ~WorkspaceHolder() { workspace_destroy(ws_); }
    WorkspaceHolder(const WorkspaceHolder&) = delete;
    WorkspaceHolder& operator=(const WorkspaceHolder&) = delete;
    Workspace<T>* get() const { return ws_; }

private:
    Workspace<T>* ws_;
};

// --- language-model path ---

// Runs the backbone on `n` tokens (n <= block_size) and returns a pointer to
// logits [n x vocab] living inside the workspace. dropout_p > 0 requires rng.
template <class T>
const T* lm_forward(const Model<T>& m, Workspace<T>& ws, const uint16_t* tokens, int n,
                    double dropout_p = 0.0, Rng* rng = nullptr);

// Mean-per-token cross entropy of next-token prediction plus lambda times the
// mean squared error between the dequantized expected level and the
// dequantized target. Loss only (no gradients); reuses lm_forward.
template <class T>
LossParts lm_loss(const Model<T>& m, Workspace<T>& ws, const uint16_t* tokens,
                  const uint16_t* targets, int n, double lambda, const TokenizerState& tok,
                  double dropout_p = 0.0, Rng* rng = nullptr);

// Same dual loss evaluated on caller-provided logits [n x vocab]; when
// dlogits != nullptr also writes d(loss)/d(logits) (mean reduction included).
template <class T>
LossParts lm_loss_logits(const T* logits, const uint16_t* targets, int n, int vocab, double lambda,
                         const TokenizerState& tok, T* dlogits = nullptr);

// Forward + loss + full reverse pass; gradients are scaled by `grad_scale`
// (callers average over windows via 1/n_windows) and accumulated into ps.grad.
template <class T>
LossParts lm_loss_grad(Model<T>& m, Workspace<T>& ws, const uint16_t* tokens,
                       const uint16_t* targets, int n, double lambda, const TokenizerState& tok,
                       double dropout_p, Rng* rng, double grad_scale,
                       std::vector<T>* grad_out = nullptr);

// --- classifier path ---

// window: channel-major [channels x width] amplitudes; width must be
// channels-compatible: width % frame_len == 0 and width / frame_len <= block_size.
// Returns p[2] (softmax over the 2-way head) and optionally the pooled embedding.
template <class T>
void clf_forward(const Model<T>& m, Workspace<T>& ws, const double* window, int64_t width,
                 const TokenizerState& tok, T p_out[2], double dropout_p = 0.0, Rng* rng = nullptr,
                 T* pooled_out = nullptr);

// Weighted binary cross entropy -w1*y*log(p1) - w0*(1-y)*log(p0) evaluated on
// a bare probability, with p clamped to [1e-7, 1 - 1e-7].
double finetune_loss(double p1, int label, double w0, double w1);

// The same weighted CE evaluated through the model. Loss only.
template <class T>
double clf_loss(const Model<T>& m, Workspace<T>& ws, const double* window, int64_t width,
                const TokenizerState& tok, int label, double w0, double w1, double dropout_p = 0.0,
                Rng* rng = nullptr);

// Forward + weighted CE + reverse pass, accumulating grad_scale-scaled
// gradients into ps.grad (or grad_out when given). Backbone freezing is
// enforced at the optimizer, which skips frozen tensors entirely.
template <class T>
double clf_loss_grad(Model<T>& m, Workspace<T>& ws, const double* window, int64_t width,
                     const TokenizerState& tok, int label, double w0, double w1, double dropout_p,
                     Rng* rng, double grad_scale, std::vector<T>* grad_out = nullptr);

extern template class Model<float>;
extern template class Model<double>;
extern template struct ParamStore<float>;
extern template struct ParamStore<double>;

} // namespace eegfc
