#include "eegfc/recording.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace eegfc {

void Recording::validate() const {
    if (channels < 1) fail_format("recording has no channels");
    if (!(fs > 0.0)) fail_format("recording sampling rate must be > 0");
    if (n_samples < 0) fail_format("negative sample count");
    if (samples.size() != static_cast<size_t>(channels) * static_cast<size_t>(n_samples))
        fail_format("sample buffer size does not match channels * n_samples");
    if (channel_names.size() != static_cast<size_t>(channels))
        fail_format("channel name count does not match channel count");
    for (double v : samples)
        if (!std::isfinite(v)) fail_format("recording contains NaN/Inf samples");
}

Recording make_recording(int channels, double fs, int64_t n_samples) {
    Recording rec;
    rec.channels = channels;
    rec.fs = fs;
    rec.n_samples = n_samples;
    rec.samples.assign(static_cast<size_t>(channels) * static_cast<size_t>(n_samples), 0.0);
    rec.channel_names.resize(channels);
    for (int c = 0; c < channels; ++c) rec.channel_names[c] = "ch" + std::to_string(c + 1);
    return rec;
}

std::vector<SeizureAnnotation> merge_annotations(std::vector<SeizureAnnotation> anns) {
    if (anns.empty()) return anns;
    std::sort(anns.begin(), anns.end(), [](const SeizureAnnotation& a, const SeizureAnnotation& b) {
        if (a.onset_s != b.onset_s) return a.onset_s < b.onset_s;
        return a.offset_s < b.offset_s;
    });
    std::vector<SeizureAnnotation> merged;
    for (const auto& a : anns) {
        if (!merged.empty() && a.onset_s <= merged.back().offset_s) {
            merged.back().offset_s = std::max(merged.back().offset_s, a.offset_s);
            merged.back().channel_hint.clear(); // a merged event spans channels
        } else {
            merged.push_back(a);
        }
    }
    return merged;
}

std::vector<double> merged_onsets(const std::vector<SeizureAnnotation>& anns) {
    std::vector<double> onsets;
    for (const auto& a : merge_annotations(anns)) onsets.push_back(a.onset_s);
    return onsets;
}

Recording resample(const Recording& rec, double target_fs) {
    if (!(target_fs > 0.0)) fail_usage("resample target rate must be > 0");
    if (target_fs == rec.fs) return rec;
    const int64_t t_out = static_cast<int64_t>(std::llround(rec.n_samples * target_fs / rec.fs));
    Recording out = make_recording(rec.channels, target_fs, t_out);
    out.channel_names = rec.channel_names;
    const double step = rec.fs / target_fs; // input samples per output sample
    for (int c = 0; c < rec.channels; ++c) {
        auto src = rec.channel(c);
        auto dst = out.channel(c);
        for (int64_t i = 0; i < t_out; ++i) {
            double p = i * step;
            int64_t lo = static_cast<int64_t>(p);
            if (lo >= rec.n_samples - 1) {
                dst[i] = src[rec.n_samples - 1];
                continue;
            }
            double frac = p - lo;
            dst[i] = src[lo] * (1.0 - frac) + src[lo + 1] * frac;
        }
    }
    return out;
}

std::vector<WindowSpan> plan_windows(const Recording& rec, double seg_dur_s, double overlap_frac) {
    if (overlap_frac < 0.0 || overlap_frac >= 1.0) fail_usage("overlap fraction must be in [0, 1)");
    if (!(seg_dur_s > 0.0)) fail_usage("segment duration must be > 0");
    std::vector<WindowSpan> out;
    const double dur = rec.duration_s();
    if (seg_dur_s > dur) return out;
    const double stride = seg_dur_s * (1.0 - overlap_frac);
    const int64_t width = static_cast<int64_t>(std::llround(seg_dur_s * rec.fs));
    const int64_t count = static_cast<int64_t>(std::floor((dur - seg_dur_s) / stride + 1e-9)) + 1;
    out.reserve(count);
    for (int64_t i = 0; i < count; ++i) {
        WindowSpan w;
        w.t_start = i * stride;
        w.t_end = w.t_start + seg_dur_s;
        w.first_sample = static_cast<int64_t>(std::llround(w.t_start * rec.fs));
        w.width = width;
        if (w.first_sample + width > rec.n_samples) break; // guard against rounding spill
        out.push_back(w);
    }
    return out;
}

std::vector<Segment> segment_recording(const Recording& rec, double seg_dur_s, double overlap_frac) {
    std::vector<Segment> out;
    for (const auto& w : plan_windows(rec, seg_dur_s, overlap_frac)) {
        Segment s;
        s.channels = rec.channels;
        s.width = w.width;
        s.t_start = w.t_start;
        s.t_end = w.t_end;
        s.window.resize(static_cast<size_t>(rec.channels) * w.width);
        for (int c = 0; c < rec.channels; ++c) {
            auto src = rec.channel(c);
            std::copy(src.begin() + w.first_sample, src.begin() + w.first_sample + w.width,
                      s.window.begin() + static_cast<size_t>(c) * w.width);
        }
        out.push_back(std::move(s));
    }
    return out;
}

int label_for_window(double t_end, const std::vector<double>& onsets, double horizon_s) {
    for (double s : onsets)
        if (s >= t_end && s <= t_end + horizon_s) return 1;
    return 0;
}

void label_segments(std::vector<Segment>& segments, const std::vector<SeizureAnnotation>& annotations,
                    double horizon_s) {
    const auto onsets = merged_onsets(annotations);
    for (auto& s : segments) s.label = label_for_window(s.t_end, onsets, horizon_s);
}

// --- .eegraw ---

static void append_f32le(std::vector<uint8_t>& out, float v) {
    uint32_t bits;
    std::memcpy(&bits, &v, 4);
    out.push_back(bits & 0xff);
    out.push_back((bits >> 8) & 0xff);
    out.push_back((bits >> 16) & 0xff);
    out.push_back((bits >> 24) & 0xff);
}

std::vector<uint8_t> write_eegraw(const Recording& rec) {
    rec.validate();
    char header[96];
    int n = std::snprintf(header, sizeof header, "EEGRAW1 %d %.17g %lld\n", rec.channels, rec.fs,
                          static_cast<long long>(rec.n_samples));
    std::vector<uint8_t> out(header, header + n);
    out.reserve(out.size() + 4u * rec.samples.size());
    for (int64_t t = 0; t < rec.n_samples; ++t)
        for (int c = 0; c < rec.channels; ++c)
            append_f32le(out, static_cast<float>(rec.at(c, t)));
    return out;
}

Recording read_eegraw(const std::vector<uint8_t>& bytes) {
    auto nl = std::find(bytes.begin(), bytes.end(), uint8_t('\n'));
    if (nl == bytes.end()) fail_format("eegraw: missing header line");
    std::string header(bytes.begin(), nl);
    std::istringstream iss(header);
    std::string magic;
    int channels = 0;
    double fs = 0.0;
    long long t = 0;
    if (!(iss >> magic >> channels >> fs >> t) || magic != "EEGRAW1")
        fail_format("eegraw: bad header '" + header + "'");
    if (channels < 1 || t < 0 || !(fs > 0.0)) fail_format("eegraw: invalid header values");
    const size_t data_off = static_cast<size_t>(nl - bytes.begin()) + 1;
    const size_t need = static_cast<size_t>(channels) * static_cast<size_t>(t) * 4;
    if (bytes.size() - data_off < need) fail_format("eegraw: truncated sample data");
    Recording rec = make_recording(channels, fs, t);
    const uint8_t* p = bytes.data() + data_off;
    for (int64_t i = 0; i < t; ++i)
        for (int c = 0; c < channels; ++c) {
            uint32_t bits = p[0] | (uint32_t(p[1]) << 8) | (uint32_t(p[2]) << 16) | (uint32_t(p[3]) << 24);
            float v;
            std::memcpy(&v, &bits, 4);
            rec.at(c, i) = v;
            p += 4;
        }
    rec.validate();
    return rec;
}

void save_eegraw(const Recording& rec, const std::string& path) {
    auto bytes = write_eegraw(rec);
    write_file_bytes(path, bytes.data(), bytes.size());
}

Recording load_eegraw(const std::string& path) { return read_eegraw(read_file_bytes(path)); }

// --- annotations CSV ---

std::string write_annotations_csv(const std::vector<SeizureAnnotation>& anns) {
    std::string out = "onset_s,offset_s,channel\n";
    char line[160];
    for (const auto& a : anns) {
        std::snprintf(line, sizeof line, "%.17g,%.17g,%s\n", a.onset_s, a.offset_s, a.channel_hint.c_str());
        out += line;
    }
    return out;
}

std::vector<SeizureAnnotation> parse_annotations_csv(const std::string& text) {
    std::vector<SeizureAnnotation> out;
    std::istringstream iss(text);
    std::string line;
    bool first = true;
    while (std::getline(iss, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (first) {
            first = false;
            if (line != "onset_s,offset_s,channel") fail_format("annotations csv: unexpected header '" + line + "'");
            continue;
        }
        size_t c1 = line.find(',');
        size_t c2 = (c1 == std::string::npos) ? std::string::npos : line.find(',', c1 + 1);
        if (c2 == std::string::npos) fail_format("annotations csv: malformed row '" + line + "'");
        SeizureAnnotation a;
        try {
            a.onset_s = std::stod(line.substr(0, c1));
            a.offset_s = std::stod(line.substr(c1 + 1, c2 - c1 - 1));
        } catch (const std::exception&) {
            fail_format("annotations csv: non-numeric time in '" + line + "'");
        }
        a.channel_hint = line.substr(c2 + 1);
        if (!(a.onset_s >= 0.0) || !(a.offset_s > a.onset_s))
            fail_format("annotations csv: interval must satisfy 0 <= onset < offset");
        out.push_back(std::move(a));
    }
    return out;
}

void save_annotations_csv(const std::vector<SeizureAnnotation>& anns, const std::string& path) {
    write_file_text(path, write_annotations_csv(anns));
}

std::vector<SeizureAnnotation> load_annotations_csv(const std::string& path) {
    return parse_annotations_csv(read_file_text(path));
}

// --- file helpers ---

std::vector<uint8_t> read_file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail_usage("cannot open file: " + path);
    std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return bytes;
}

void write_file_bytes(const std::string& path, const void* data, size_t size) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail_usage("cannot write file: " + path);
    out.write(static_cast<const char*>(data), static_cast<std::streamsize>(size));
    if (!out) fail_usage("short write: " + path);
}

std::string read_file_text(const std::string& path) {
    auto bytes = read_file_bytes(path);
    return std::string(bytes.begin(), bytes.end());
}

void write_file_text(const std::string& path, const std::string& text) {
    write_file_bytes(path, text.data(), text.size());
}

} // namespace eegfc
