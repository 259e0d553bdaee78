#pragma once

#include "eegfc/net.hpp"

#include <cstdint>
#include <vector>

namespace eegfc {

// Adam with decoupled weight decay. Decay is multiplicative before the moment
// update and applies only to tensors flagged `decay` in the parameter store
// (weight matrices; never norms, biases, or embeddings).

struct AdamConfig {
    double lr = 3e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.01;
};

template <class T>
struct AdamState {
    std::vector<T> m; // first moment, parameter layout
    std::vector<T> v; // second moment
    int64_t step = 0;

    void allocate(size_t n) {
        m.assign(n, T(0));
        v.assign(n, T(0));
        step = 0;
    }
};

// One update over ps.data from ps.grad. frozen (optional, per-tensor) skips a
// tensor entirely: no decay, no moment update, parameters bit-unchanged.
// Non-finite gradients abort with a numeric error naming the tensor.
template <class T>
void adam_step(ParamStore<T>& ps, AdamState<T>& st, const AdamConfig& cfg,
               const std::vector<uint8_t>* frozen = nullptr);

extern template void adam_step<float>(ParamStore<float>&, AdamState<float>&, const AdamConfig&,
                                      const std::vector<uint8_t>*);
extern template void adam_step<double>(ParamStore<double>&, AdamState<double>&, const AdamConfig&,
                                       const std::vector<uint8_t>*);

} // namespace eegfc
