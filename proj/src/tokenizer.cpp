#include "eegfc/tokenizer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <sstream>

namespace eegfc {

TokenizerState fit_tokenizer(const Recording& rec, int levels, double clip_sigma) {
    rec.validate();
    if (levels < 2) fail_usage("tokenizer: levels must be >= 2");
    if (!(clip_sigma > 0.0)) fail_usage("tokenizer: clip factor must be > 0");
    const size_t n = rec.samples.size();
    if (n < 2) fail_usage("tokenizer: need at least 2 samples to fit");
    double sum = 0.0, lo = rec.samples[0], hi = rec.samples[0];
    for (double v : rec.samples) {
        sum += v;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (lo == hi) fail_numeric("tokenizer: constant signal (sigma = 0)");
    const double mu = sum / static_cast<double>(n);
    double ss = 0.0;
    for (double v : rec.samples) ss += (v - mu) * (v - mu);
    const double sigma = std::sqrt(ss / static_cast<double>(n)); // population std
    if (!(sigma > 0.0)) fail_numeric("tokenizer: constant signal (sigma = 0)");
    TokenizerState st;
    st.levels = levels;
    st.clip_sigma = clip_sigma;
    st.mu = mu;
    st.sigma = sigma;
    return st;
}

uint16_t quantize(double x, const TokenizerState& st) {
    if (!std::isfinite(x)) fail_numeric("tokenizer: non-finite amplitude");
    const double z = (x - st.mu) / st.sigma;
    const double clipped = std::clamp(z, -st.clip_sigma, st.clip_sigma);
    const double x01 = (clipped + st.clip_sigma) / (2.0 * st.clip_sigma);
    // The 1e-9 guard band keeps dequantized bin edges (exact fixed points in
    // real arithmetic) from being floored into the bin below by float rounding;
    // it shifts every edge by ~1e-9 of a bin, far below the error bound.
    const int token = static_cast<int>(std::floor(x01 * (st.levels - 1) + 1e-9));
    return static_cast<uint16_t>(std::clamp(token, 0, st.levels - 1));
}

double dequantize(double level, const TokenizerState& st) {
    if (!(level >= 0.0) || !(level <= st.levels - 1))
        fail_usage("tokenizer: level outside [0, levels-1]");
    const double x01 = level / (st.levels - 1);
    const double z = x01 * 2.0 * st.clip_sigma - st.clip_sigma;
    return z * st.sigma + st.mu;
}

TokenStream tokenize_recording(const Recording& rec, const TokenizerState& st) {
    rec.validate();
    TokenStream ts;
    ts.state = st;
    ts.channels = rec.channels;
    ts.fs = rec.fs;
    ts.n_samples = rec.n_samples;
    ts.tokens.resize(rec.samples.size());
    // Sample-major interleaving: all channels of time step t, then t+1, ...
    size_t k = 0;
    for (int64_t t = 0; t < rec.n_samples; ++t)
        for (int c = 0; c < rec.channels; ++c) ts.tokens[k++] = quantize(rec.at(c, t), st);
    return ts;
}

Recording detokenize(const TokenStream& ts) {
    Recording rec = make_recording(ts.channels, ts.fs, ts.n_samples);
    size_t k = 0;
    for (int64_t t = 0; t < ts.n_samples; ++t)
        for (int c = 0; c < ts.channels; ++c) rec.at(c, t) = dequantize(ts.tokens[k++], ts.state);
    return rec;
}

std::vector<uint8_t> write_tok(const TokenStream& ts) {
    char header[160];
    int n = std::snprintf(header, sizeof header, "EEGTOK1 %d %d %lld %.17g %.17g %.17g\n",
                          ts.state.levels, ts.channels, static_cast<long long>(ts.n_samples),
                          ts.state.mu, ts.state.sigma, ts.state.clip_sigma);
    std::vector<uint8_t> out(header, header + n);
    out.reserve(out.size() + 2 * ts.tokens.size());
    for (uint16_t t : ts.tokens) {
        out.push_back(t & 0xff);
        out.push_back(t >> 8);
    }
    return out;
}

TokenStream read_tok(const std::vector<uint8_t>& bytes) {
    auto nl = std::find(bytes.begin(), bytes.end(), uint8_t('\n'));
    if (nl == bytes.end()) fail_format("tok: missing header line");
    std::string header(bytes.begin(), nl);
    std::istringstream iss(header);
    std::string magic;
    int levels = 0, channels = 0;
    long long t = 0;
    double mu = 0.0, sigma = 0.0, clip = 0.0;
    if (!(iss >> magic >> levels >> channels >> t >> mu >> sigma >> clip) || magic != "EEGTOK1")
        fail_format("tok: bad header '" + header + "'");
    if (levels < 2 || channels < 1 || t < 0 || !(sigma > 0.0) || !(clip > 0.0))
        fail_format("tok: invalid header values");
    TokenStream ts;
    ts.state.levels = levels;
    ts.state.clip_sigma = clip;
    ts.state.mu = mu;
    ts.state.sigma = sigma;
    ts.channels = channels;
    ts.fs = 0.0; // not stored; reattached by callers that know the recording
    ts.n_samples = t;
    const size_t data_off = static_cast<size_t>(nl - bytes.begin()) + 1;
    const size_t count = static_cast<size_t>(channels) * static_cast<size_t>(t);
    if (bytes.size() - data_off < count * 2) fail_format("tok: truncated token data");
    ts.tokens.resize(count);
    const uint8_t* p = bytes.data() + data_off;
    for (size_t i = 0; i < count; ++i) {
        ts.tokens[i] = static_cast<uint16_t>(p[0] | (uint16_t(p[1]) << 8));
        p += 2;
        if (ts.tokens[i] >= levels) fail_format("tok: token out of range");
    }
    return ts;
}

void save_tok(const TokenStream& ts, const std::string& path) {
    auto bytes = write_tok(ts);
    write_file_bytes(path, bytes.data(), bytes.size());
}

TokenStream load_tok(const std::string& path) { return read_tok(read_file_bytes(path)); }

} // namespace eegfc
