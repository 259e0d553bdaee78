#include "eegfc/split.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace eegfc {

namespace {

struct Run {
    int begin = 0; // first segment index
    int size = 0;
    int label = 0;
};

std::vector<Run> label_runs(const std::vector<Segment>& segments) {
    std::vector<Run> runs;
    for (int i = 0; i < static_cast<int>(segments.size()); ++i) {
        if (runs.empty() || segments[i].label != runs.back().label)
            runs.push_back({i, 1, segments[i].label});
        else
            runs.back().size += 1;
    }
    return runs;
}

// Deterministic Fisher-Yates (std::shuffle's draw sequence is not pinned by the
// standard, and the plan must be reproducible byte-for-byte).
template <class V>
void shuffle_fixed(V& v, std::mt19937_64& g) {
    for (size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[g() % i]);
}

bool spans_overlap(const Segment& a, const Segment& b) {
    return a.t_start < b.t_end && b.t_start < a.t_end;
}

} // namespace

SplitPlan make_split(const std::vector<Segment>& segments, double val_frac, uint64_t seed) {
    const int n = static_cast<int>(segments.size());
    if (n < 5) fail_usage("split: too few segments to stratify (need >= 5)");
    if (!(val_frac > 0.0) || !(val_frac < 1.0)) fail_usage("split: val_frac must be in (0, 1)");

    const std::vector<Run> runs = label_runs(segments);
    int n_pos = 0;
    for (const auto& s : segments) n_pos += s.label == 1 ? 1 : 0;
    const int n_neg = n - n_pos;

    std::mt19937_64 g(seed);
    std::vector<int> pos_order, neg_order; // indices into runs
    for (int r = 0; r < static_cast<int>(runs.size()); ++r)
        (runs[r].label == 1 ? pos_order : neg_order).push_back(r);
    shuffle_fixed(pos_order, g);
    shuffle_fixed(neg_order, g);

    const int target_total =
        std::clamp(static_cast<int>(std::llround(val_frac * n)), 1, n - 1);
    const double target_pos = val_frac * n_pos;

    std::vector<char> in_val(n, 0);
    int val_pos = 0;

    // Positive runs are atomic blocks (the windows around one onset). Greedily
    // take whole runs while that moves the validation positive count strictly
    // closer to the proportional target.
    std::vector<int> taken_pos;
    for (int r : pos_order) {
        const int sz = runs[r].size;
        if (std::abs(val_pos + sz - target_pos) < std::abs(val_pos - target_pos)) {
            taken_pos.push_back(r);
            val_pos += sz;
        }
    }
    if (val_pos == 0 && n_pos >= 2 && pos_order.size() >= 2) {
        // both splits must see the positive class: force the smallest run in
        int best = -1;
        for (int r : pos_order)
            if (best < 0 || runs[r].size < runs[best].size) best = r;
        taken_pos.push_back(best);
        val_pos += runs[best].size;
    }
    if (val_pos == n_pos && n_pos >= 2 && taken_pos.size() >= 2) {
        // keep some positives on the training side
        int worst = taken_pos.back();
        for (int r : taken_pos)
            if (runs[r].size > runs[worst].size) worst = r;
        taken_pos.erase(std::find(taken_pos.begin(), taken_pos.end(), worst));
        val_pos -= runs[worst].size;
    }
    for (int r : taken_pos)
        for (int i = runs[r].begin; i < runs[r].begin + runs[r].size; ++i) in_val[i] = 1;
    if (n_pos >= 2 && pos_order.size() == 1 && (val_pos == 0 || val_pos == n_pos)) {
        // A single run holds every positive segment; split it by prefix so the
        // class appears on both sides (presence outranks leakage control here).
        const Run& run = runs[pos_order[0]];
        const int take = std::clamp(static_cast<int>(std::llround(val_frac * run.size)), 1,
                                    run.size - 1);
        std::fill(in_val.begin() + run.begin, in_val.begin() + run.begin + run.size, char(0));
        std::fill(in_val.begin() + run.begin, in_val.begin() + run.begin + take, char(1));
        val_pos = take;
    }

    // Negatives fill validation up to the total-size target, taking contiguous
    // prefixes of whole runs so blocks stay blocks.
    int val_neg = 0;
    int need_neg = std::max(0, target_total - val_pos);
    const int neg_cap = n_neg >= 2 ? n_neg - 1 : 0; // leave training at least one
    need_neg = std::min(need_neg, neg_cap);
    if (need_neg == 0 && n_neg >= 2) need_neg = 1; // validation must see negatives too
    for (int r : neg_order) {
        if (need_neg <= 0) break;
        const int take = std::min(need_neg, runs[r].size);
        for (int i = runs[r].begin; i < runs[r].begin + take; ++i) in_val[i] = 1;
        val_neg += take;
        need_neg -= take;
    }

    SplitPlan plan;
    std::vector<int> val_list;
    for (int i = 0; i < n; ++i)
        if (in_val[i]) val_list.push_back(i);

    // Any training segment overlapping a validation segment in time is dropped
    // so overlapping neighbors never sit on opposite sides of the boundary.
    std::vector<char> dropped(n, 0);
    for (int i = 0; i < n; ++i) {
        if (in_val[i]) continue;
        for (int v : val_list)
            if (spans_overlap(segments[i], segments[v])) {
                dropped[i] = 1;
                break;
            }
    }

    // If dropping emptied a class on the training side, restore the dropped
    // segment of that class with the least validation overlap.
    for (int label = 0; label <= 1; ++label) {
        const int members = label == 1 ? n_pos : n_neg;
        if (members < 2) continue;
        bool present = false;
        for (int i = 0; i < n && !present; ++i)
            present = !in_val[i] && !dropped[i] && segments[i].label == label;
        if (present) continue;
        int best = -1;
        double best_ov = 0.0;
        for (int i = 0; i < n; ++i) {
            if (in_val[i] || !dropped[i] || segments[i].label != label) continue;
            double ov = 0.0;
            for (int v : val_list) {
                const double lo = std::max(segments[i].t_start, segments[v].t_start);
                const double hi = std::min(segments[i].t_end, segments[v].t_end);
                ov += std::max(0.0, hi - lo);
            }
            if (best < 0 || ov < best_ov) {
                best = i;
                best_ov = ov;
            }
        }
        if (best >= 0) dropped[best] = 0;
    }

    for (int i = 0; i < n; ++i) {
        if (in_val[i]) {
            plan.val_idx.push_back(i);
            (segments[i].label == 1 ? plan.n_pos_val : plan.n_neg_val) += 1;
        } else if (dropped[i]) {
            plan.dropped_idx.push_back(i);
        } else {
            plan.train_idx.push_back(i);
            (segments[i].label == 1 ? plan.n_pos_train : plan.n_neg_train) += 1;
        }
    }
    if (plan.train_idx.empty() || plan.val_idx.empty())
        fail_usage("split: degenerate plan (one side is empty)");
    return plan;
}

} // namespace eegfc
