#pragma once

#include "eegfc/adam.hpp"
#include "eegfc/net.hpp"
#include "eegfc/split.hpp"
#include "eegfc/tokenizer.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace eegfc {

struct PretrainConfig {
    int steps = 5000;
    int batch_size = 16;
    int grad_accum = 8;
    double lr = 3e-4;
    double weight_decay = 0.01;
    double lambda_mse = 0.1;
    double dropout = 0.1;
    uint64_t seed = 1;
};

struct PretrainRow {
    int step;
    double ce, mse, total;
};

// Next-token pretraining over the flattened token stream. Each step draws
// batch_size * grad_accum contexts of block_size+1 tokens at uniform start
// offsets, averages gradients of the dual loss over them, and applies one
// optimizer update. Deterministic for a fixed seed.
template <class T>
std::vector<PretrainRow> pretrain(Model<T>& m, const TokenStream& stream, const PretrainConfig& cfg);

std::string write_pretrain_curve_csv(const std::vector<PretrainRow>& rows);

struct FinetuneConfig {
    int steps = 5000;
    int batch_size = 16;
    int grad_accum = 4;
    double lr = 3e-5;
    double weight_decay = 0.01;
    double dropout = 0.2;
    int eval_every = 100;
    bool backbone_frozen = false;
    double threshold = 0.5; // probability cut for predicted-positive
    uint64_t seed = 1;
};

struct BinMetrics {
    int tp = 0, fp = 0, tn = 0, fn = 0;
    double acc = 0.0, prec = 0.0, rec = 0.0, f1 = 0.0;
};

BinMetrics compute_bin_metrics(int tp, int fp, int tn, int fn);

// Inverse-frequency class weights w_c = N / (2 * N_c), so w0*N0 == w1*N1.
void compute_class_weights(int n_neg, int n_pos, double* w0, double* w1);

struct EvalRow {
    int step;
    std::string split; // "train" | "val"
    BinMetrics metrics;
};

struct FinetuneResult {
    std::vector<EvalRow> curve;
    int best_step = -1;          // evaluation step with the highest val F1
    BinMetrics best_train;       // metrics at best_step
    BinMetrics best_val;
    double w0 = 1.0, w1 = 1.0;
};

// Weighted-CE classifier training over the training split of `segments`,
// sampling segments uniformly with replacement. Evaluates both splits every
// eval_every steps and restores the parameters of the best-val-F1 evaluation
// before returning. Requires both classes in the training split.
template <class T>
FinetuneResult finetune(Model<T>& m, const std::vector<Segment>& segments, const SplitPlan& split,
                        const TokenizerState& tok, const FinetuneConfig& cfg);

std::string write_finetune_curve_csv(const std::vector<EvalRow>& rows);

// Scores every segment in `idx` (dropout off) and folds the confusion counts.
template <class T>
BinMetrics evaluate_segments(const Model<T>& m, const std::vector<Segment>& segments,
                             const std::vector<int>& idx, const TokenizerState& tok,
                             double threshold = 0.5);

extern template std::vector<PretrainRow> pretrain<float>(Model<float>&, const TokenStream&,
                                                         const PretrainConfig&);
extern template std::vector<PretrainRow> pretrain<double>(Model<double>&, const TokenStream&,
                                                          const PretrainConfig&);
extern template FinetuneResult finetune<float>(Model<float>&, const std::vector<Segment>&,
                                               const SplitPlan&, const TokenizerState&,
                                               const FinetuneConfig&);
extern template FinetuneResult finetune<double>(Model<double>&, const std::vector<Segment>&,
                                                const SplitPlan&, const TokenizerState&,
                                                const FinetuneConfig&);
extern template BinMetrics evaluate_segments<float>(const Model<float>&, const std::vector<Segment>&,
                                                    const std::vector<int>&, const TokenizerState&,
                                                    double);
extern template BinMetrics evaluate_segments<double>(const Model<double>&, const std::vector<Segment>&,
                                                     const std::vector<int>&, const TokenizerState&,
                                                     double);

} // namespace eegfc
