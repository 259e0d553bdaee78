#pragma once

#include "eegfc/recording.hpp"

#include <cstdint>
#include <random>
#include <vector>

namespace eegfc {

// Synthetic multi-channel EEG with scripted seizure events, used for
// self-contained experiments and for the end-to-end tests.
//
// Background: pink (1/f) noise per channel plus a shared 10 Hz alpha rhythm
// whose per-channel amplitude varies, holding roughly 20% of total power.
// Each seizure event is a 30 s lead-in during which a 3 Hz spike-wave rhythm
// ramps linearly from zero to 3x the background RMS on a random subset of
// channels, followed by a 20 s ictal phase at 5x background RMS on all
// channels. Per-channel amplitude scatter keeps the rhythm's cross-channel
// variation in the physiological range so it is not mistaken for line noise.

struct SynthConfig {
    int channels = 18;
    double fs = 250.0;
    double duration_s = 3600.0;
    int n_seizures = 3;
    double preictal_s = 30.0;  // ramp-up before the labeled onset
    double ictal_s = 20.0;     // duration of the labeled event
    double min_gap_s = 60.0;   // minimum spacing between events (offset->next lead-in)
    double spike_hz = 3.0;
    double alpha_hz = 10.0;
    double alpha_rel_power = 0.2;
    double preictal_gain = 3.0; // peak ramp amplitude, multiples of background RMS
    double ictal_gain = 5.0;    // ictal amplitude, multiples of background RMS
    double line_noise_hz = 0.0; // 0 = clean; else add a coherent sinusoid at this frequency
    double line_noise_gain = 0.5; // amplitude relative to background RMS
    uint64_t seed = 1;
};

struct SynthResult {
    Recording recording;
    std::vector<SeizureAnnotation> annotations;
};

// Pink-noise generator (Paul Kellett's 3-pole filter over white noise),
// approximately -3 dB/octave over the EEG band. Unit variance is not
// guaranteed; callers normalize via measured RMS.
class PinkNoise {
public:
    explicit PinkNoise(uint64_t seed) : rng_(seed) {}
    double next();

private:
    std::mt19937_64 rng_;
    std::normal_distribution<double> gauss_{0.0, 1.0};
    double b0_ = 0.0, b1_ = 0.0, b2_ = 0.0;
};

SynthResult synthesize_patient(const SynthConfig& cfg);

// Places n events of length `event_s` in [0, duration_s] with at least
// `gap_s` between consecutive events, uniformly over all feasible layouts
// (spacings method, no rejection). Returns event start times, sorted.
std::vector<double> place_events(double duration_s, double event_s, double gap_s, int n,
                                 std::mt19937_64& rng);

} // namespace eegfc
