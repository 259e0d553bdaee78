#include "eegfc/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace eegfc {

// --- optimizer ---

template <class T>
void adam_step(ParamStore<T>& ps, AdamState<T>& st, const AdamConfig& cfg,
               const std::vector<uint8_t>* frozen) {
    if (st.m.size() != ps.data.size()) st.allocate(ps.data.size());
    if (frozen && frozen->size() != ps.infos.size())
        fail_usage("optimizer: frozen mask size mismatch");
    st.step += 1;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(st.step));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(st.step));
    for (size_t t = 0; t < ps.infos.size(); ++t) {
        const auto& info = ps.infos[t];
        if (frozen && (*frozen)[t]) continue; // bit-unchanged: no decay, no moments
        T* p = ps.data.data() + info.offset;
        T* g = ps.grad.data() + info.offset;
        T* m = st.m.data() + info.offset;
        T* v = st.v.data() + info.offset;
        const double decay_mult =
            info.decay && cfg.weight_decay != 0.0 ? 1.0 - cfg.lr * cfg.weight_decay : 1.0;
        for (size_t k = 0; k < info.size; ++k) {
            const double gk = static_cast<double>(g[k]);
            if (!std::isfinite(gk))
                fail_numeric("optimizer: non-finite gradient in tensor '" + info.name + "'");
            double pk = static_cast<double>(p[k]) * decay_mult;
            const double mk = cfg.beta1 * static_cast<double>(m[k]) + (1.0 - cfg.beta1) * gk;
            const double vk = cfg.beta2 * static_cast<double>(v[k]) + (1.0 - cfg.beta2) * gk * gk;
            m[k] = static_cast<T>(mk);
            v[k] = static_cast<T>(vk);
            pk -= cfg.lr * (mk / bc1) / (std::sqrt(vk / bc2) + cfg.eps);
            p[k] = static_cast<T>(pk);
        }
    }
}

// --- pretraining ---

template <class T>
std::vector<PretrainRow> pretrain(Model<T>& m, const TokenStream& stream,
                                  const PretrainConfig& cfg) {
    const int B = m.cfg.block_size;
    const int64_t total = static_cast<int64_t>(stream.tokens.size());
    if (total < static_cast<int64_t>(B) + 1)
        fail_usage("pretrain: token stream shorter than block_size + 1");
    if (cfg.steps < 1 || cfg.batch_size < 1 || cfg.grad_accum < 1)
        fail_usage("pretrain: steps, batch size and accumulation must be >= 1");
    for (uint16_t tok : stream.tokens)
        if (tok >= m.cfg.vocab) fail_usage("pretrain: token stream exceeds model vocabulary");

    WorkspaceHolder<T> ws(m.cfg);
    AdamConfig ac;
    ac.lr = cfg.lr;
    ac.weight_decay = cfg.weight_decay;
    AdamState<T> st;
    st.allocate(m.ps.data.size());

    Rng sample_rng(mix_seed(cfg.seed, 0x70726574u)); // window start offsets
    const uint64_t n_offsets = static_cast<uint64_t>(total - B);
    const int nw = cfg.batch_size * cfg.grad_accum;
    const double scale = 1.0 / nw;

    std::vector<PretrainRow> rows;
    rows.reserve(cfg.steps);
    for (int step = 0; step < cfg.steps; ++step) {
        m.ps.zero_grad();
        double ce = 0.0, mse = 0.0, tot = 0.0;
        for (int w = 0; w < nw; ++w) {
            const uint64_t off = sample_rng.g() % n_offsets;
            Rng drop_rng(mix_seed(cfg.seed, static_cast<uint64_t>(step) + 1,
                                  static_cast<uint64_t>(w) + 1));
            const LossParts parts =
                lm_loss_grad(m, *ws.get(), stream.tokens.data() + off,
                             stream.tokens.data() + off + 1, B, cfg.lambda_mse, stream.state,
                             cfg.dropout, cfg.dropout > 0.0 ? &drop_rng : nullptr, scale);
            ce += parts.ce * scale;
            mse += parts.mse * scale;
            tot += parts.total * scale;
        }
        adam_step(m.ps, st, ac);
        rows.push_back({step + 1, ce, mse, tot});
    }
    return rows;
}

std::string write_pretrain_curve_csv(const std::vector<PretrainRow>& rows) {
    std::string out = "step,ce,mse,total\n";
    char buf[160];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof(buf), "%d,%.10g,%.10g,%.10g\n", r.step, r.ce, r.mse, r.total);
        out += buf;
    }
    return out;
}

// --- metrics ---

BinMetrics compute_bin_metrics(int tp, int fp, int tn, int fn) {
    BinMetrics m;
    m.tp = tp;
    m.fp = fp;
    m.tn = tn;
    m.fn = fn;
    const int total = tp + fp + tn + fn;
    m.acc = total > 0 ? static_cast<double>(tp + tn) / total : 0.0;
    m.prec = tp + fp > 0 ? static_cast<double>(tp) / (tp + fp) : 0.0;
    m.rec = tp + fn > 0 ? static_cast<double>(tp) / (tp + fn) : 0.0;
    m.f1 = m.prec + m.rec > 0.0 ? 2.0 * m.prec * m.rec / (m.prec + m.rec) : 0.0;
    return m;
}

void compute_class_weights(int n_neg, int n_pos, double* w0, double* w1) {
    if (n_neg < 1 || n_pos < 1) fail_usage("class weights need both classes present");
    const double n = n_neg + n_pos;
    *w0 = n / (2.0 * n_neg);
    *w1 = n / (2.0 * n_pos);
}

// --- evaluation ---

namespace {

template <class T>
BinMetrics eval_with_ws(const Model<T>& m, Workspace<T>& ws, const std::vector<Segment>& segments,
                        const std::vector<int>& idx, const TokenizerState& tok, double threshold) {
    int tp = 0, fp = 0, tn = 0, fn = 0;
    for (int i : idx) {
        const Segment& s = segments[static_cast<size_t>(i)];
        T p[2];
        clf_forward(m, ws, s.window.data(), s.width, tok, p);
        const int pred = static_cast<double>(p[1]) >= threshold ? 1 : 0;
        if (s.label == 1)
            (pred == 1 ? tp : fn) += 1;
        else
            (pred == 1 ? fp : tn) += 1;
    }
    return compute_bin_metrics(tp, fp, tn, fn);
}

} // namespace

template <class T>
BinMetrics evaluate_segments(const Model<T>& m, const std::vector<Segment>& segments,
                             const std::vector<int>& idx, const TokenizerState& tok,
                             double threshold) {
    WorkspaceHolder<T> ws(m.cfg);
    return eval_with_ws(m, *ws.get(), segments, idx, tok, threshold);
}

// --- fine-tuning ---

template <class T>
FinetuneResult finetune(Model<T>& m, const std::vector<Segment>& segments, const SplitPlan& split,
                        const TokenizerState& tok, const FinetuneConfig& cfg) {
    if (!m.has_classifier()) fail_usage("finetune: model has no classifier head");
    if (cfg.steps < 1 || cfg.batch_size < 1 || cfg.grad_accum < 1 || cfg.eval_every < 1)
        fail_usage("finetune: steps, batch, accumulation, eval interval must be >= 1");
    for (int i : split.train_idx) {
        const Segment& s = segments.at(static_cast<size_t>(i));
        if (s.channels != m.cfg.channels) fail_usage("finetune: segment channel count mismatch");
    }
    if (split.n_pos_train < 1 || split.n_neg_train < 1)
        fail_usage("finetune: training split must contain both classes");

    FinetuneResult res;
    compute_class_weights(split.n_neg_train, split.n_pos_train, &res.w0, &res.w1);

    std::vector<uint8_t> frozen_mask;
    const std::vector<uint8_t>* frozen = nullptr;
    if (cfg.backbone_frozen) {
        frozen_mask.resize(m.ps.infos.size(), 0);
        for (size_t t = 0; t < m.ps.infos.size(); ++t)
            frozen_mask[t] = m.ps.infos[t].backbone ? 1 : 0;
        frozen = &frozen_mask;
    }

    WorkspaceHolder<T> ws(m.cfg);
    AdamConfig ac;
    ac.lr = cfg.lr;
    ac.weight_decay = cfg.weight_decay;
    AdamState<T> st;
    st.allocate(m.ps.data.size());

    Rng sample_rng(mix_seed(cfg.seed, 0x66696e65u)); // segment draws
    const int nw = cfg.batch_size * cfg.grad_accum;
    const double scale = 1.0 / nw;

    double best_f1 = -1.0;
    std::vector<T> best_params;

    for (int step = 0; step < cfg.steps; ++step) {
        m.ps.zero_grad();
        for (int w = 0; w < nw; ++w) {
            const int i =
                split.train_idx[sample_rng.g() % static_cast<uint64_t>(split.train_idx.size())];
            const Segment& s = segments[static_cast<size_t>(i)];
            Rng drop_rng(mix_seed(cfg.seed, static_cast<uint64_t>(step) + 1,
                                  static_cast<uint64_t>(w) + 1));
            clf_loss_grad(m, *ws.get(), s.window.data(), s.width, tok, s.label, res.w0, res.w1,
                          cfg.dropout, cfg.dropout > 0.0 ? &drop_rng : nullptr, scale);
        }
        adam_step(m.ps, st, ac, frozen);

        const bool last = step + 1 == cfg.steps;
        if ((step + 1) % cfg.eval_every == 0 || last) {
            const BinMetrics mt =
                eval_with_ws(m, *ws.get(), segments, split.train_idx, tok, cfg.threshold);
            const BinMetrics mv =
                eval_with_ws(m, *ws.get(), segments, split.val_idx, tok, cfg.threshold);
            res.curve.push_back({step + 1, "train", mt});
            res.curve.push_back({step + 1, "val", mv});
            if (mv.f1 > best_f1) {
                best_f1 = mv.f1;
                best_params = m.ps.data;
                res.best_step = step + 1;
                res.best_train = mt;
                res.best_val = mv;
            }
        }
    }
    if (!best_params.empty()) m.ps.data = best_params; // keep the best-val-F1 weights
    return res;
}

std::string write_finetune_curve_csv(const std::vector<EvalRow>& rows) {
    std::string out = "step,split,acc,prec,rec,f1\n";
    char buf[200];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof(buf), "%d,%s,%.10g,%.10g,%.10g,%.10g\n", r.step,
                      r.split.c_str(), r.metrics.acc, r.metrics.prec, r.metrics.rec, r.metrics.f1);
        out += buf;
    }
    return out;
}

// --- explicit instantiations ---

template void adam_step<float>(ParamStore<float>&, AdamState<float>&, const AdamConfig&,
                               const std::vector<uint8_t>*);
template void adam_step<double>(ParamStore<double>&, AdamState<double>&, const AdamConfig&,
                                const std::vector<uint8_t>*);
template std::vector<PretrainRow> pretrain<float>(Model<float>&, const TokenStream&,
                                                  const PretrainConfig&);
template std::vector<PretrainRow> pretrain<double>(Model<double>&, const TokenStream&,
                                                   const PretrainConfig&);
template FinetuneResult finetune<float>(Model<float>&, const std::vector<Segment>&, const SplitPlan&,
                                        const TokenizerState&, const FinetuneConfig&);
template FinetuneResult finetune<double>(Model<double>&, const std::vector<Segment>&,
                                         const SplitPlan&, const TokenizerState&,
                                         const FinetuneConfig&);
template BinMetrics evaluate_segments<float>(const Model<float>&, const std::vector<Segment>&,
                                             const std::vector<int>&, const TokenizerState&, double);
template BinMetrics evaluate_segments<double>(const Model<double>&, const std::vector<Segment>&,
                                              const std::vector<int>&, const TokenizerState&,
                                              double);

} // namespace eegfc
