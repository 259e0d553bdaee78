#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "eegfc/error.hpp"

namespace eegfc {

// Multichannel EEG block: C channels of T samples each, amplitudes in microvolts.
// Samples are stored row-major, one contiguous row per channel.
struct Recording {
    int channels = 0;
    double fs = 0.0;
    int64_t n_samples = 0;
    std::vector<double> samples;            // channels * n_samples
    std::vector<std::string> channel_names; // size == channels

    double duration_s() const { return n_samples / fs; }

    std::span<double> channel(int c) {
        return {samples.data() + static_cast<size_t>(c) * n_samples, static_cast<size_t>(n_samples)};
    }
    std::span<const double> channel(int c) const {
        return {samples.data() + static_cast<size_t>(c) * n_samples, static_cast<size_t>(n_samples)};
    }
    double& at(int c, int64_t t) { return samples[static_cast<size_t>(c) * n_samples + t]; }
    double at(int c, int64_t t) const { return samples[static_cast<size_t>(c) * n_samples + t]; }

    // Throws if shapes are inconsistent, fs <= 0 or any sample is NaN/Inf.
    void validate() const;
};

Recording make_recording(int channels, double fs, int64_t n_samples);

struct SeizureAnnotation {
    double onset_s = 0.0;
    double offset_s = 0.0;
    std::string channel_hint; // empty = all channels
};

// One 30 s window plus its prediction label.
struct Segment {
    int channels = 0;
    int64_t width = 0;            // W = seg_dur * fs
    std::vector<double> window;   // channels * width, row-major
    double t_start = 0.0;
    double t_end = 0.0;
    int label = 0;                // y in {0,1}
};

// Window placement without sample data; segment_recording fills windows from these.
struct WindowSpan {
    double t_start = 0.0;
    double t_end = 0.0;
    int64_t first_sample = 0;
    int64_t width = 0;
};

// Union of possibly overlapping per-channel intervals into disjoint events,
// sorted by onset. Touching intervals (closed endpoints) merge too.
std::vector<SeizureAnnotation> merge_annotations(std::vector<SeizureAnnotation> anns);

std::vector<double> merged_onsets(const std::vector<SeizureAnnotation>& anns);

// Linear-interpolation resampling onto a uniform grid at target_fs.
// Output length is round(T * target_fs / fs).
Recording resample(const Recording& rec, double target_fs);

// Sliding windows: stride = seg_dur_s * (1 - overlap_frac), starts at 0, stride, 2*stride, ...
// Trailing partial windows are dropped; too-short recordings give an empty list.
std::vector<WindowSpan> plan_windows(const Recording& rec, double seg_dur_s, double overlap_frac);

std::vector<Segment> segment_recording(const Recording& rec, double seg_dur_s, double overlap_frac);

// label = 1 iff some merged onset falls inside [t_end, t_end + horizon_s], closed
// at both ends.
void label_segments(std::vector<Segment>& segments, const std::vector<SeizureAnnotation>& annotations,
                    double horizon_s = 30.0);

int label_for_window(double t_end, const std::vector<double>& onsets, double horizon_s);

// --- raw container (.eegraw) ---
// Header line "EEGRAW1 <C> <fs> <T>\n", then C*T float32 LE values interleaved
// sample-major: sample 0 of channels 0..C-1, sample 1 of channels 0..C-1, ...
std::vector<uint8_t> write_eegraw(const Recording& rec);
Recording read_eegraw(const std::vector<uint8_t>& bytes);

void save_eegraw(const Recording& rec, const std::string& path);
Recording load_eegraw(const std::string& path);

// --- annotations CSV ---
// Header "onset_s,offset_s,channel"; channel may be empty.
std::string write_annotations_csv(const std::vector<SeizureAnnotation>& anns);
std::vector<SeizureAnnotation> parse_annotations_csv(const std::string& text);

void save_annotations_csv(const std::vector<SeizureAnnotation>& anns, const std::string& path);
std::vector<SeizureAnnotation> load_annotations_csv(const std::string& path);

// File helpers shared by the formats above.
std::vector<uint8_t> read_file_bytes(const std::string& path);
void write_file_bytes(const std::string& path, const void* data, size_t size);
std::string read_file_text(const std::string& path);
void write_file_text(const std::string& path, const std::string& text);

} // namespace eegfc
