#pragma once

#include "eegfc/recording.hpp"

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

namespace eegfc {

// FFT, Welch power spectral density, narrowband noise detection, and
// zero-phase notch filtering.

// In-place radix-2 FFT; size must be a power of two. inverse=true applies
// 1/n scaling so ifft(fft(x)) == x.
void fft_radix2(std::vector<std::complex<double>>& a, bool inverse);

// Real-input convenience wrapper: zero-pads x to nfft (power of two required)
// and returns the full complex spectrum.
std::vector<std::complex<double>> fft_real(const std::vector<double>& x, size_t nfft);

struct WelchConfig {
    double seg_dur_s = 2.0;    // Hann window length
    double overlap_frac = 0.5; // fraction of segment shared with the next
};

// One-sided PSD per channel. power is row-major: power[c * n_bins + i].
struct PsdEstimate {
    double fs = 0.0;
    double df = 0.0;               // bin spacing fs/nfft
    int channels = 0;
    int n_segments = 0;
    std::vector<double> freq;      // bin centers, 0..fs/2
    std::vector<double> power;     // density, units^2 per Hz

    int n_bins() const { return static_cast<int>(freq.size()); }
    const double* channel(int c) const { return power.data() + static_cast<size_t>(c) * freq.size(); }
    double* channel(int c) { return power.data() + static_cast<size_t>(c) * freq.size(); }
};

// Welch periodogram: Hann segments with the given overlap, each zero-padded to
// the next power of two >= segment length, scaled by 1/(fs * sum(w^2)),
// one-sided with interior bins doubled. Total power integrates to the signal
// variance up to windowing loss.
PsdEstimate welch_psd(const Recording& rec, const WelchConfig& cfg = {});
std::vector<double> welch_psd_channel(const double* x, int64_t n, double fs, const WelchConfig& cfg,
                                      std::vector<double>* freq_out);

struct NoiseBand {
    double f_lo = 0.0;     // lower edge of the flagged bin run
    double f_hi = 0.0;     // upper edge
    double f_center = 0.0; // power-weighted centroid of the run
    double mean_power = 0.0;
    double cv = 0.0;       // cross-channel coefficient of variation at the peak bin
};

struct NoiseDetectConfig {
    double power_ratio = 10.0; // flag bins with mean power >= ratio * smoothed baseline
    double cv_max = 0.25;      // coherence gate: flag only if cross-channel CV <= this
    int median_bins = 11;      // baseline = running median over this many bins
    double min_freq_hz = 1.0;  // ignore the DC/drift region below this
};

// Detects narrowband environmental noise shared across channels. A bin is
// flagged when the cross-channel mean power exceeds power_ratio times the
// median-smoothed spectrum baseline AND the cross-channel coefficient of
// variation is at most cv_max (coherent across the montage). Adjacent flagged
// bins merge into one band. Requires >= 2 channels.
std::vector<NoiseBand> detect_noise_bands(const PsdEstimate& psd, const NoiseDetectConfig& cfg = {});

// Biquad notch (RBJ cookbook): center f0, quality Q = f0 / bandwidth.
struct Biquad {
    double b0, b1, b2, a1, a2; // normalized, a0 == 1
};

Biquad design_notch(double f0_hz, double fs, double q);

// |H(e^{j 2 pi f / fs})| evaluated analytically.
double biquad_response_mag(const Biquad& bq, double f_hz, double fs);

// Single-pass IIR application (direct form II transposed), zero initial state.
void biquad_apply(const Biquad& bq, double* x, int64_t n);

// Forward pass then reversed pass: squared magnitude response, zero net phase.
void biquad_apply_zero_phase(const Biquad& bq, double* x, int64_t n);

// Welch PSD -> band detection -> one zero-phase notch per band at its power
// centroid with Q = f_center / max(bandwidth, 1 Hz), applied to every channel.
// Returns the filtered recording and the removed bands; with no detections the
// output is bit-identical to the input.
std::pair<Recording, std::vector<NoiseBand>> apply_preprocessing(
    const Recording& rec, const WelchConfig& welch = {}, const NoiseDetectConfig& detect = {});

// bands CSV: "f_lo,f_hi,f_center,mean_power,cv"
std::string write_bands_csv(const std::vector<NoiseBand>& bands);
std::vector<NoiseBand> parse_bands_csv(const std::string& text);

} // namespace eegfc
