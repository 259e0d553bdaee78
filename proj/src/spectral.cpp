#include "eegfc/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

namespace eegfc {

namespace {

bool is_pow2(size_t n) { return n != 0 && (n & (n - 1)) == 0; }

size_t next_pow2(size_t n) {
    size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

} // namespace

void fft_radix2(std::vector<std::complex<double>>& a, bool inverse) {
    const size_t n = a.size();
    if (!is_pow2(n)) fail_usage("fft size must be a power of two");
    // bit-reversal permutation
    for (size_t i = 1, j = 0; i < n; ++i) {
        size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (size_t len = 2; len <= n; len <<= 1) {
        const double ang = 2.0 * std::numbers::pi / static_cast<double>(len) * (inverse ? 1.0 : -1.0);
        const std::complex<double> wlen(std::cos(ang), std::sin(ang));
        for (size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (size_t k = 0; k < len / 2; ++k) {
                const std::complex<double> u = a[i + k];
                const std::complex<double> v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
    if (inverse)
        for (auto& x : a) x /= static_cast<double>(n);
}

std::vector<std::complex<double>> fft_real(const std::vector<double>& x, size_t nfft) {
    if (!is_pow2(nfft)) fail_usage("fft size must be a power of two");
    if (x.size() > nfft) fail_usage("fft input longer than transform size");
    std::vector<std::complex<double>> a(nfft);
    for (size_t i = 0; i < x.size(); ++i) a[i] = x[i];
    fft_radix2(a, false);
    return a;
}

std::vector<double> welch_psd_channel(const double* x, int64_t n, double fs, const WelchConfig& cfg,
                                      std::vector<double>* freq_out) {
    const int64_t seg_len = static_cast<int64_t>(std::llround(cfg.seg_dur_s * fs));
    if (seg_len < 2) fail_usage("welch segment too short");
    if (n < seg_len) fail_usage("recording shorter than one welch segment");
    const size_t nfft = next_pow2(static_cast<size_t>(seg_len));
    const int64_t hop = std::max<int64_t>(1, std::llround(seg_len * (1.0 - cfg.overlap_frac)));
    const int64_t n_segments = 1 + (n - seg_len) / hop;

    std::vector<double> window(seg_len);
    double wsum2 = 0.0;
    for (int64_t i = 0; i < seg_len; ++i) {
        window[i] = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * i / (seg_len - 1)));
        wsum2 += window[i] * window[i];
    }

    const size_t n_bins = nfft / 2 + 1;
    std::vector<double> acc(n_bins, 0.0);
    std::vector<std::complex<double>> buf(nfft);
    for (int64_t s = 0; s < n_segments; ++s) {
        const double* seg = x + s * hop;
        for (int64_t i = 0; i < seg_len; ++i) buf[i] = seg[i] * window[i];
        for (size_t i = seg_len; i < nfft; ++i) buf[i] = 0.0;
        fft_radix2(buf, false);
        for (size_t i = 0; i < n_bins; ++i) acc[i] += std::norm(buf[i]);
    }

    const double scale = 1.0 / (fs * wsum2 * static_cast<double>(n_segments));
    for (size_t i = 0; i < n_bins; ++i) {
        acc[i] *= scale;
        if (i != 0 && i != n_bins - 1) acc[i] *= 2.0; // one-sided: fold negative bins
    }
    if (freq_out) {
        freq_out->resize(n_bins);
        for (size_t i = 0; i < n_bins; ++i) (*freq_out)[i] = static_cast<double>(i) * fs / nfft;
    }
    return acc;
}

PsdEstimate welch_psd(const Recording& rec, const WelchConfig& cfg) {
    PsdEstimate psd;
    psd.fs = rec.fs;
    psd.channels = rec.channels;
    const int64_t seg_len = static_cast<int64_t>(std::llround(cfg.seg_dur_s * rec.fs));
    const int64_t hop = std::max<int64_t>(1, std::llround(seg_len * (1.0 - cfg.overlap_frac)));
    for (int c = 0; c < rec.channels; ++c) {
        auto ch = rec.channel(c);
        std::vector<double> freq;
        auto p = welch_psd_channel(ch.data(), rec.n_samples, rec.fs, cfg, c == 0 ? &freq : nullptr);
        if (c == 0) {
            psd.freq = std::move(freq);
            psd.df = psd.freq.size() > 1 ? psd.freq[1] - psd.freq[0] : 0.0;
            psd.n_segments = static_cast<int>(1 + (rec.n_samples - seg_len) / hop);
            psd.power.resize(static_cast<size_t>(rec.channels) * psd.freq.size());
        }
        std::copy(p.begin(), p.end(), psd.channel(c));
    }
    return psd;
}

std::vector<NoiseBand> detect_noise_bands(const PsdEstimate& psd, const NoiseDetectConfig& cfg) {
    if (psd.channels < 2) fail_usage("noise detection needs >= 2 channels");
    const int n = psd.n_bins();
    std::vector<double> mean(n), cv(n);
    for (int i = 0; i < n; ++i) {
        double s = 0.0;
        for (int c = 0; c < psd.channels; ++c) s += psd.channel(c)[i];
        const double m = s / psd.channels;
        double ss = 0.0;
        for (int c = 0; c < psd.channels; ++c) {
            const double d = psd.channel(c)[i] - m;
            ss += d * d;
        }
        const double sd = std::sqrt(ss / (psd.channels - 1)); // sample std
        mean[i] = m;
        cv[i] = m > 0.0 ? sd / m : 0.0;
    }

    // Baseline: running median of the cross-channel mean spectrum.
    const int half = cfg.median_bins / 2;
    std::vector<double> baseline(n);
    std::vector<double> win;
    for (int i = 0; i < n; ++i) {
        const int lo = std::max(0, i - half);
        const int hi = std::min(n - 1, i + half);
        win.assign(mean.begin() + lo, mean.begin() + hi + 1);
        std::nth_element(win.begin(), win.begin() + win.size() / 2, win.end());
        double med = win[win.size() / 2];
        if (win.size() % 2 == 0) {
            double lo_med = *std::max_element(win.begin(), win.begin() + win.size() / 2);
            med = 0.5 * (med + lo_med);
        }
        baseline[i] = med;
    }

    std::vector<uint8_t> flagged(n, 0);
    for (int i = 0; i < n; ++i) {
        if (psd.freq[i] < cfg.min_freq_hz) continue;
        if (mean[i] >= cfg.power_ratio * baseline[i] && cv[i] <= cfg.cv_max) flagged[i] = 1;
    }

    std::vector<NoiseBand> bands;
    for (int i = 0; i < n;) {
        if (!flagged[i]) {
            ++i;
            continue;
        }
        int j = i;
        while (j + 1 < n && flagged[j + 1]) ++j;
        NoiseBand b;
        b.f_lo = psd.freq[i];
        b.f_hi = psd.freq[j];
        double wsum = 0.0, fsum = 0.0, psum = 0.0;
        int peak = i;
        for (int k = i; k <= j; ++k) {
            fsum += psd.freq[k] * mean[k];
            wsum += mean[k];
            psum += mean[k];
            if (mean[k] > mean[peak]) peak = k;
        }
        b.f_center = wsum > 0.0 ? fsum / wsum : 0.5 * (b.f_lo + b.f_hi);
        b.mean_power = psum / (j - i + 1);
        b.cv = cv[peak];
        bands.push_back(b);
        i = j + 1;
    }
    return bands;
}

Biquad design_notch(double f0_hz, double fs, double q) {
    if (!(f0_hz > 0.0) || !(f0_hz < fs / 2.0)) fail_usage("notch center must lie in (0, fs/2)");
    if (!(q > 0.0)) fail_usage("notch Q must be > 0");
    const double w0 = 2.0 * std::numbers::pi * f0_hz / fs;
    const double alpha = std::sin(w0) / (2.0 * q);
    const double c = std::cos(w0);
    const double a0 = 1.0 + alpha;
    Biquad bq;
    bq.b0 = 1.0 / a0;
    bq.b1 = -2.0 * c / a0;
    bq.b2 = 1.0 / a0;
    bq.a1 = -2.0 * c / a0;
    bq.a2 = (1.0 - alpha) / a0;
    return bq;
}

double biquad_response_mag(const Biquad& bq, double f_hz, double fs) {
    const double w = 2.0 * std::numbers::pi * f_hz / fs;
    const std::complex<double> z1 = std::polar(1.0, -w);
    const std::complex<double> z2 = z1 * z1;
    const std::complex<double> num = bq.b0 + bq.b1 * z1 + bq.b2 * z2;
    const std::complex<double> den = 1.0 + bq.a1 * z1 + bq.a2 * z2;
    return std::abs(num / den);
}

void biquad_apply(const Biquad& bq, double* x, int64_t n) {
    double s1 = 0.0, s2 = 0.0; // direct form II transposed
    for (int64_t i = 0; i < n; ++i) {
        const double in = x[i];
        const double out = bq.b0 * in + s1;
        s1 = bq.b1 * in - bq.a1 * out + s2;
        s2 = bq.b2 * in - bq.a2 * out;
        x[i] = out;
    }
}

void biquad_apply_zero_phase(const Biquad& bq, double* x, int64_t n) {
    biquad_apply(bq, x, n);
    std::reverse(x, x + n);
    biquad_apply(bq, x, n);
    std::reverse(x, x + n);
}

std::pair<Recording, std::vector<NoiseBand>> apply_preprocessing(const Recording& rec,
                                                                 const WelchConfig& welch,
                                                                 const NoiseDetectConfig& detect) {
    Recording out = rec;
    std::vector<NoiseBand> bands;
    if (rec.channels >= 2) {
        const PsdEstimate psd = welch_psd(rec, welch);
        bands = detect_noise_bands(psd, detect);
    }
    for (const auto& b : bands) {
        const double q = b.f_center / std::max(b.f_hi - b.f_lo, 1.0);
        const Biquad bq = design_notch(b.f_center, rec.fs, q);
        for (int c = 0; c < out.channels; ++c)
            biquad_apply_zero_phase(bq, out.channel(c).data(), out.n_samples);
    }
    return {std::move(out), std::move(bands)};
}

std::string write_bands_csv(const std::vector<NoiseBand>& bands) {
    std::string out = "f_lo,f_hi,f_center,mean_power,cv\n";
    char line[160];
    for (const auto& b : bands) {
        std::snprintf(line, sizeof line, "%.4f,%.4f,%.4f,%.9g,%.4f\n", b.f_lo, b.f_hi, b.f_center,
                      b.mean_power, b.cv);
        out += line;
    }
    return out;
}

std::vector<NoiseBand> parse_bands_csv(const std::string& text) {
    std::istringstream iss(text);
    std::string line;
    std::vector<NoiseBand> bands;
    bool first = true;
    while (std::getline(iss, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (first) {
            first = false;
            if (line != "f_lo,f_hi,f_center,mean_power,cv")
                fail_format("bands csv: unexpected header '" + line + "'");
            continue;
        }
        NoiseBand b;
        if (std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf,%lf", &b.f_lo, &b.f_hi, &b.f_center,
                        &b.mean_power, &b.cv) != 5)
            fail_format("bands csv: malformed row '" + line + "'");
        bands.push_back(b);
    }
    return bands;
}

} // namespace eegfc
