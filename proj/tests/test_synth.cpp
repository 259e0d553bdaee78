#include <doctest.h>

#include "eegfc/error.hpp"
#include "eegfc/spectral.hpp"
#include "eegfc/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

using namespace eegfc;
using doctest::Approx;

namespace {

double rms_in(const Recording& rec, int c, double t0, double t1) {
    int64_t a = static_cast<int64_t>(t0 * rec.fs);
    int64_t b = std::min<int64_t>(rec.n_samples, static_cast<int64_t>(t1 * rec.fs));
    double acc = 0.0;
    auto ch = rec.channel(c);
    for (int64_t t = a; t < b; ++t) acc += ch[t] * ch[t];
    return std::sqrt(acc / double(b - a));
}

// Running median over 2k+1 bins, computed independently of the library's
// detector so the "no spurious rhythm" check has its own baseline.
std::vector<double> median_smooth(const std::vector<double>& v, int half) {
    std::vector<double> out(v.size());
    for (size_t i = 0; i < v.size(); ++i) {
        size_t lo = i >= size_t(half) ? i - half : 0;
        size_t hi = std::min(v.size(), i + half + 1);
        std::vector<double> w(v.begin() + lo, v.begin() + hi);
        std::nth_element(w.begin(), w.begin() + w.size() / 2, w.end());
        out[i] = w[w.size() / 2];
    }
    return out;
}

} // namespace

TEST_SUITE("synth") {

TEST_CASE("same seed reproduces the recording exactly") {
    SynthConfig cfg;
    cfg.channels = 4;
    cfg.duration_s = 300.0;
    cfg.n_seizures = 2;
    cfg.seed = 99;
    SynthResult a = synthesize_patient(cfg);
    SynthResult b = synthesize_patient(cfg);
    CHECK(a.recording.samples == b.recording.samples);
    REQUIRE(a.annotations.size() == b.annotations.size());
    for (size_t i = 0; i < a.annotations.size(); ++i) {
        CHECK(a.annotations[i].onset_s == b.annotations[i].onset_s);
        CHECK(a.annotations[i].offset_s == b.annotations[i].offset_s);
    }
    cfg.seed = 100;
    SynthResult c = synthesize_patient(cfg);
    CHECK(a.recording.samples != c.recording.samples);
}

TEST_CASE("requested number of events appear with the required spacing") {
    SynthConfig cfg;
    cfg.channels = 6;
    cfg.duration_s = 3600.0;
    cfg.n_seizures = 6;
    cfg.seed = 4;
    SynthResult r = synthesize_patient(cfg);
    REQUIRE(r.annotations.size() == 6u);
    for (size_t i = 0; i < 6; ++i) {
        const auto& a = r.annotations[i];
        CHECK(a.onset_s >= 30.0); // room for the full lead-in
        CHECK(a.offset_s - a.onset_s == Approx(20.0));
        CHECK(a.offset_s <= cfg.duration_s);
        if (i > 0) CHECK(a.onset_s - r.annotations[i - 1].offset_s >= 60.0);
    }
}

TEST_CASE("too short a recording for the event count is rejected") {
    SynthConfig cfg;
    cfg.duration_s = 500.0;
    cfg.n_seizures = 6; // needs >= 540 s
    CHECK_THROWS_AS(synthesize_patient(cfg), Error);
    cfg.channels = 0;
    cfg.duration_s = 3600.0;
    CHECK_THROWS_AS(synthesize_patient(cfg), Error);
}

TEST_CASE("event-free output has no spike-wave peak above the smoothed background") {
    SynthConfig cfg;
    cfg.channels = 4;
    cfg.duration_s = 120.0;
    cfg.n_seizures = 0;
    cfg.seed = 12;
    SynthResult r = synthesize_patient(cfg);
    PsdEstimate psd = welch_psd(r.recording);
    std::vector<double> mean(psd.n_bins(), 0.0);
    for (int i = 0; i < psd.n_bins(); ++i) {
        for (int c = 0; c < psd.channels; ++c) mean[i] += psd.channel(c)[i];
        mean[i] /= psd.channels;
    }
    std::vector<double> base = median_smooth(mean, 5);
    int k3 = 0;
    for (int i = 1; i < psd.n_bins(); ++i)
        if (std::fabs(psd.freq[i] - 3.0) < std::fabs(psd.freq[k3] - 3.0)) k3 = i;
    CHECK(mean[k3] < 3.0 * base[k3]);
}

TEST_CASE("the shared 10 Hz rhythm is visible but not dominant") {
    SynthConfig cfg;
    cfg.channels = 4;
    cfg.duration_s = 120.0;
    cfg.n_seizures = 0;
    cfg.seed = 31;
    SynthResult r = synthesize_patient(cfg);
    PsdEstimate psd = welch_psd(r.recording);
    double alpha = 0.0, total = 0.0, at13 = 0.0, at10 = 0.0;
    for (int i = 0; i < psd.n_bins(); ++i) {
        double m = 0.0;
        for (int c = 0; c < psd.channels; ++c) m += psd.channel(c)[i];
        m /= psd.channels;
        total += m * psd.df;
        if (psd.freq[i] >= 8.0 && psd.freq[i] <= 12.0) alpha += m * psd.df;
        if (std::fabs(psd.freq[i] - 13.5) < psd.df / 2) at13 = m;
        if (std::fabs(psd.freq[i] - 10.0) < psd.df / 2) at10 = m;
    }
    CHECK(alpha / total > 0.10);
    CHECK(alpha / total < 0.40);
    CHECK(at10 > 3.0 * at13); // clear local peak at the rhythm frequency
}

TEST_CASE("event epochs carry elevated amplitude with a gradual lead-in") {
    SynthConfig cfg;
    cfg.channels = 6;
    cfg.duration_s = 300.0;
    cfg.n_seizures = 1;
    cfg.seed = 8;
    SynthResult r = synthesize_patient(cfg);
    REQUIRE(r.annotations.size() == 1u);
    const double onset = r.annotations[0].onset_s;
    const double offset = r.annotations[0].offset_s;

    // a quiet 30 s reference stretch well away from the event
    double q0 = (onset >= 70.0) ? 0.0 : offset + 20.0;
    REQUIRE(q0 + 30.0 <= cfg.duration_s);

    int elevated_pre = 0;
    for (int c = 0; c < cfg.channels; ++c) {
        double quiet = rms_in(r.recording, c, q0, q0 + 30.0);
        double ictal = rms_in(r.recording, c, onset, offset);
        CHECK(ictal >= 2.0 * quiet); // discharge on every channel
        double late_pre = rms_in(r.recording, c, onset - 10.0, onset);
        double early_pre = rms_in(r.recording, c, onset - 30.0, onset - 20.0);
        if (late_pre >= 1.25 * quiet) {
            ++elevated_pre;
            // amplitude ramps up: the last third is hotter than the first third
            CHECK(late_pre > early_pre);
        }
    }
    // the lead-in rhythm runs on a channel subset of at least half the montage
    CHECK(elevated_pre >= cfg.channels / 2);
    CHECK(elevated_pre <= cfg.channels);
}

TEST_CASE("optional line tone is injected coherently enough to be detected") {
    SynthConfig cfg;
    cfg.channels = 4;
    cfg.duration_s = 120.0;
    cfg.n_seizures = 0;
    cfg.line_noise_hz = 50.0;
    cfg.seed = 3;
    SynthResult r = synthesize_patient(cfg);
    auto bands = detect_noise_bands(welch_psd(r.recording));
    REQUIRE(bands.size() == 1u);
    CHECK(bands[0].f_lo <= 50.0);
    CHECK(bands[0].f_hi >= 50.0);
}

TEST_CASE("event placement respects bounds, order, and gaps") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 200; ++trial) {
        auto starts = place_events(600.0, 50.0, 60.0, 4, rng);
        REQUIRE(starts.size() == 4u);
        for (size_t i = 0; i < starts.size(); ++i) {
            CHECK(starts[i] >= 0.0);
            CHECK(starts[i] + 50.0 <= 600.0);
            if (i > 0) CHECK(starts[i] - (starts[i - 1] + 50.0) >= 60.0 - 1e-9);
        }
    }
    CHECK(place_events(600.0, 50.0, 60.0, 0, rng).empty());
    CHECK_THROWS_AS(place_events(100.0, 50.0, 60.0, 2, rng), Error);
}

TEST_CASE("placement uses the whole feasible range") {
    // spacings construction: with slack available, early and late positions
    // both occur across seeds
    std::mt19937_64 rng(11);
    double min_first = 1e9, max_last = -1e9;
    for (int trial = 0; trial < 300; ++trial) {
        auto starts = place_events(3600.0, 50.0, 60.0, 3, rng);
        min_first = std::min(min_first, starts.front());
        max_last = std::max(max_last, starts.back() + 50.0);
    }
    CHECK(min_first < 300.0);
    CHECK(max_last > 3300.0);
}

} // TEST_SUITE
