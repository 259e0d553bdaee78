#include "eegfc/synth.hpp"

#include "eegfc/net.hpp" // mix_seed

#include <algorithm>
#include <cmath>
#include <numbers>

namespace eegfc {

double PinkNoise::next() {
    // Paul Kellett's economy pink-noise filter: three leaky integrators over
    // white noise, about -3 dB/octave through the EEG band.
    const double w = gauss_(rng_);
    b0_ = 0.99765 * b0_ + w * 0.0990460;
    b1_ = 0.96300 * b1_ + w * 0.2965164;
    b2_ = 0.57000 * b2_ + w * 1.0526913;
    return b0_ + b1_ + b2_ + w * 0.1848;
}

std::vector<double> place_events(double duration_s, double event_s, double gap_s, int n,
                                 std::mt19937_64& rng) {
    if (n == 0) return {};
    const double slack = duration_s - n * event_s - (n - 1) * gap_s;
    if (slack < 0.0)
        fail_usage("event placement infeasible: need n*event + (n-1)*gap = " +
                   std::to_string(n * event_s + (n - 1) * gap_s) + " s, have " +
                   std::to_string(duration_s) + " s");
    std::uniform_real_distribution<double> u(0.0, slack);
    std::vector<double> offsets(n);
    for (auto& v : offsets) v = u(rng);
    std::sort(offsets.begin(), offsets.end());
    std::vector<double> starts(n);
    for (int i = 0; i < n; ++i) starts[i] = offsets[i] + i * (event_s + gap_s);
    return starts;
}

SynthResult synthesize_patient(const SynthConfig& cfg) {
    if (cfg.channels < 1) fail_usage("synth: channels must be >= 1");
    if (!(cfg.fs > 0.0)) fail_usage("synth: fs must be > 0");
    if (cfg.n_seizures < 0) fail_usage("synth: n_seizures must be >= 0");
    if (cfg.duration_s < cfg.n_seizures * 90.0)
        fail_usage("synth: duration_s must be >= n_seizures * 90 s (need " +
                   std::to_string(cfg.n_seizures * 90.0) + " s, have " +
                   std::to_string(cfg.duration_s) + " s)");

    const int C = cfg.channels;
    const int64_t n_samples = static_cast<int64_t>(std::llround(cfg.duration_s * cfg.fs));
    const double event_s = cfg.preictal_s + cfg.ictal_s;

    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> u01(0.0, 1.0);

    // Fixed draw order keeps output byte-identical for a fixed seed.
    const std::vector<double> starts =
        place_events(cfg.duration_s, event_s, cfg.min_gap_s, cfg.n_seizures, rng);

    std::vector<double> alpha_amp(C);
    for (auto& a : alpha_amp) a = 0.5 + u01(rng);
    const double alpha_phase = 2.0 * std::numbers::pi * u01(rng);

    // Stereotyped seizure topography, drawn once per recording: a fixed focal
    // channel subset carries the pre-ictal ramp and every channel gets a fixed
    // ictal gain. Reusing one pattern across events keeps the 3 Hz rhythm's
    // cross-channel power variation in the physiological range, the way a real
    // patient's stereotyped seizures do.
    std::vector<int> order(C);
    for (int c = 0; c < C; ++c) order[c] = c;
    std::shuffle(order.begin(), order.end(), rng);
    const int subset_size = (C + 1) / 2 + static_cast<int>(u01(rng) * (C - (C + 1) / 2 + 1));
    std::vector<uint8_t> in_subset(C, 0);
    for (int i = 0; i < std::min(subset_size, C); ++i) in_subset[order[i]] = 1;
    std::vector<double> preictal_gain(C), ictal_gain(C);
    for (auto& g : preictal_gain) g = 0.6 + 0.8 * u01(rng);
    for (auto& g : ictal_gain) g = 0.6 + 0.8 * u01(rng);
    const double line_phase = 2.0 * std::numbers::pi * u01(rng);

    Recording rec = make_recording(C, cfg.fs, n_samples);

    // Background: unit-variance pink noise per channel plus a shared alpha
    // rhythm holding roughly alpha_rel_power of the total.
    for (int c = 0; c < C; ++c) {
        PinkNoise pink(mix_seed(cfg.seed, 0x9e3779b97f4a7c15ull + c));
        auto ch = rec.channel(c);
        double sum = 0.0, sum2 = 0.0;
        for (int64_t t = 0; t < n_samples; ++t) {
            ch[t] = pink.next();
            sum += ch[t];
            sum2 += ch[t] * ch[t];
        }
        const double mean = sum / n_samples;
        const double sd = std::sqrt(std::max(sum2 / n_samples - mean * mean, 1e-30));
        for (int64_t t = 0; t < n_samples; ++t) ch[t] = (ch[t] - mean) / sd;
    }
    // alpha_rel_power = p means alpha power = p/(1-p) times pink power (unit).
    const double p = std::clamp(cfg.alpha_rel_power, 0.0, 0.95);
    const double alpha_a = std::sqrt(2.0 * p / (1.0 - p));
    const double w_alpha = 2.0 * std::numbers::pi * cfg.alpha_hz / cfg.fs;
    for (int c = 0; c < C; ++c) {
        auto ch = rec.channel(c);
        const double a = alpha_a * alpha_amp[c];
        for (int64_t t = 0; t < n_samples; ++t) ch[t] += a * std::sin(w_alpha * t + alpha_phase);
    }

    // Background RMS measured over the whole pre-event signal; event amplitudes
    // are expressed in multiples of it.
    double bg2 = 0.0;
    for (double v : rec.samples) bg2 += v * v;
    const double bg_rms = std::sqrt(bg2 / rec.samples.size());

    if (cfg.line_noise_hz > 0.0) {
        const double w_line = 2.0 * std::numbers::pi * cfg.line_noise_hz / cfg.fs;
        const double a = cfg.line_noise_gain * bg_rms;
        for (int c = 0; c < C; ++c) {
            auto ch = rec.channel(c);
            for (int64_t t = 0; t < n_samples; ++t) ch[t] += a * std::sin(w_line * t + line_phase);
        }
    }

    // 3 Hz spike-wave: fundamental plus two harmonics, normalized to unit RMS.
    const double sw_rms = std::sqrt((1.0 + 0.25 + 0.0625) / 2.0);
    auto spike_wave = [&](double t_s) {
        const double w = 2.0 * std::numbers::pi * cfg.spike_hz * t_s;
        return (std::sin(w) + 0.5 * std::sin(2.0 * w + 0.3) + 0.25 * std::sin(3.0 * w + 0.6)) / sw_rms;
    };

    std::vector<SeizureAnnotation> anns;
    for (double t0 : starts) {
        const int64_t i_pre = static_cast<int64_t>(std::llround(t0 * cfg.fs));
        const int64_t i_on = static_cast<int64_t>(std::llround((t0 + cfg.preictal_s) * cfg.fs));
        const int64_t i_off =
            std::min<int64_t>(n_samples, std::llround((t0 + event_s) * cfg.fs));
        for (int c = 0; c < C; ++c) {
            auto ch = rec.channel(c);
            if (in_subset[c]) {
                const double peak = cfg.preictal_gain * bg_rms * preictal_gain[c];
                for (int64_t i = i_pre; i < i_on && i < n_samples; ++i) {
                    const double rel = (i - i_pre) / (cfg.preictal_s * cfg.fs);
                    ch[i] += peak * rel * spike_wave((i - i_pre) / cfg.fs);
                }
            }
            const double a_ict = cfg.ictal_gain * bg_rms * ictal_gain[c];
            for (int64_t i = i_on; i < i_off; ++i)
                ch[i] += a_ict * spike_wave((i - i_pre) / cfg.fs);
        }
        SeizureAnnotation a;
        a.onset_s = t0 + cfg.preictal_s;
        a.offset_s = t0 + event_s;
        anns.push_back(a);
    }

    rec.validate();
    return SynthResult{std::move(rec), std::move(anns)};
}

} // namespace eegfc
