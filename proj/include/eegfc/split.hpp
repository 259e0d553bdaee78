#pragma once

#include "eegfc/recording.hpp"

#include <cstdint>
#include <vector>

namespace eegfc {

// Stratified, temporally blocked train/validation split over labeled,
// time-ordered segments. Contiguous index runs stay in one split; any training
// segment whose time span overlaps a validation segment is dropped so that
// overlapping neighbors never straddle the boundary. Positive runs (windows
// around one onset) move as atomic blocks; validation class counts track
// val_frac proportionally, and each class with >= 2 members appears in both
// splits.

struct SplitPlan {
    std::vector<int> train_idx;
    std::vector<int> val_idx;
    std::vector<int> dropped_idx; // train-side neighbors removed to sever overlap
    int n_pos_train = 0, n_neg_train = 0;
    int n_pos_val = 0, n_neg_val = 0;
};

SplitPlan make_split(const std::vector<Segment>& segments, double val_frac, uint64_t seed);

} // namespace eegfc
