#pragma once

#include "eegfc/recording.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace eegfc {

// Amplitude quantization: each sample is z-scored with recording-level
// statistics, clipped to +/- clip_sigma standard deviations, mapped to [0,1],
// and bucketed into `levels` uniform bins. Dequantization inverts the chain
// using the bucket's lower edge, so the round-trip error inside the clip
// range is bounded by one bucket width: sigma * 2 * clip_sigma / (levels - 1).

struct TokenizerState {
    int levels = 512;
    double clip_sigma = 5.0;
    double mu = 0.0;
    double sigma = 1.0;

    double bin_width() const { return sigma * 2.0 * clip_sigma / (levels - 1); }
};

// Fits mu/sigma over every sample of every channel (population std).
// Fails on fewer than 2 samples or a constant signal (sigma == 0).
TokenizerState fit_tokenizer(const Recording& rec, int levels = 512, double clip_sigma = 5.0);

uint16_t quantize(double x, const TokenizerState& st);
// Accepts fractional levels so probability-weighted expected levels decode too.
double dequantize(double level, const TokenizerState& st);

struct TokenStream {
    TokenizerState state;
    int channels = 0;
    double fs = 0.0;
    int64_t n_samples = 0;            // per channel
    std::vector<uint16_t> tokens;     // sample-major interleaved: tokens[t * C + c]

    int64_t size() const { return static_cast<int64_t>(tokens.size()); }
    uint16_t at(int c, int64_t t) const { return tokens[static_cast<size_t>(t) * channels + c]; }
};

// Flattens the recording one time step at a time (all channels of sample 1,
// then all channels of sample 2, ...) and quantizes each amplitude.
TokenStream tokenize_recording(const Recording& rec, const TokenizerState& st);

// Inverse: dequantize every token back into an amplitude matrix.
Recording detokenize(const TokenStream& ts);

// .tok container: "EEGTOK1 <levels> <C> <T> <mu> <sigma> <clip>\n" + u16 LE payload.
std::vector<uint8_t> write_tok(const TokenStream& ts);
TokenStream read_tok(const std::vector<uint8_t>& bytes);
void save_tok(const TokenStream& ts, const std::string& path);
TokenStream load_tok(const std::string& path);

} // namespace eegfc
