#include "eegfc/edf.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstring>
#include <string>

namespace eegfc {

namespace {

// --- fixed-width ASCII field helpers ---

void put_field(std::string& out, const std::string& value, size_t width) {
    std::string v = value.substr(0, width);
    v.resize(width, ' ');
    out += v;
}

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(' ');
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(' ');
    return s.substr(a, b - a + 1);
}

std::string take_field(const std::vector<uint8_t>& bytes, size_t& pos, size_t width,
                       const char* what) {
    if (pos + width > bytes.size()) fail_format(std::string("edf: truncated header at ") + what);
    for (size_t i = 0; i < width; ++i) {
        uint8_t b = bytes[pos + i];
        if (b < 32 || b > 126) fail_format(std::string("edf: non-ASCII byte in header field ") + what);
    }
    std::string s(bytes.begin() + pos, bytes.begin() + pos + width);
    pos += width;
    return s;
}

double parse_num(const std::string& raw, const char* what) {
    std::string s = trim(raw);
    if (s.empty()) fail_format(std::string("edf: empty numeric header field ") + what);
    size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        fail_format(std::string("edf: unparsable number '") + s + "' in field " + what);
    }
    if (used != s.size()) fail_format(std::string("edf: trailing junk in numeric field ") + what);
    return v;
}

long parse_int(const std::string& raw, const char* what) {
    double v = parse_num(raw, what);
    long r = std::lround(v);
    if (v != static_cast<double>(r)) fail_format(std::string("edf: non-integer value in field ") + what);
    return r;
}

// Physical range bound 32767 * 10^e rendered exactly (mantissa digits shifted
// by the exponent), so the 8-character field introduces no rounding.
std::string render_bound(int e, bool negative) {
    std::string digits = "32767";
    std::string s;
    if (e >= 0) {
        s = digits + std::string(e, '0');
    } else if (e >= -4) {
        s = digits.substr(0, 5 + e) + "." + digits.substr(5 + e);
    } else { // e == -5
        s = "0." + std::string(-e - 5, '0') + digits;
    }
    return negative ? "-" + s : s;
}

// Smallest power-of-ten gain with 32767 * 10^e >= maxabs, clamped so both
// physical bounds fit 8 ASCII characters. The re-encoded signal always picks
// the same gain, which is what makes write(read(write(x))) byte-identical.
int choose_exponent(double maxabs) {
    int e = -5;
    while (e < 3 && 32767.0 * std::pow(10.0, e) < maxabs) ++e;
    if (32767.0 * std::pow(10.0, e) < maxabs)
        fail_format("edf: amplitude too large for the 16-bit export range");
    return e;
}

} // namespace

std::vector<uint8_t> write_edf(const Recording& rec) {
    rec.validate();
    if (rec.channels == 0 || rec.n_samples == 0) fail_usage("edf: refusing to write an empty recording");

    // 1 s records when that divides the signal exactly; otherwise one record.
    int64_t spr = 0, n_records = 0;
    double record_dur = 0.0;
    const double fs_round = std::round(rec.fs);
    if (rec.fs == fs_round && rec.n_samples % static_cast<int64_t>(fs_round) == 0) {
        spr = static_cast<int64_t>(fs_round);
        n_records = rec.n_samples / spr;
        record_dur = 1.0;
    } else {
        spr = rec.n_samples;
        n_records = 1;
        record_dur = rec.n_samples / rec.fs;
    }

    std::vector<int> exponents(rec.channels);
    std::vector<double> gains(rec.channels);
    for (int c = 0; c < rec.channels; ++c) {
        double maxabs = 0.0;
        auto ch = rec.channel(c);
        for (double v : ch) maxabs = std::max(maxabs, std::fabs(v));
        exponents[c] = choose_exponent(maxabs);
        gains[c] = std::pow(10.0, exponents[c]);
    }

    std::string hdr;
    hdr.reserve(256 + 256 * rec.channels);
    put_field(hdr, "0", 8);                       // version
    put_field(hdr, "anonymous", 80);              // patient id
    put_field(hdr, "eegfc export", 80);           // recording id
    put_field(hdr, "01.01.00", 8);                // start date (fixed: deterministic output)
    put_field(hdr, "00.00.00", 8);                // start time
    put_field(hdr, std::to_string(256 * (1 + rec.channels)), 8);
    put_field(hdr, "", 44);                       // reserved
    put_field(hdr, std::to_string(n_records), 8);
    {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.6g", record_dur);
        put_field(hdr, buf, 8);
    }
    put_field(hdr, std::to_string(rec.channels), 4);

    for (int c = 0; c < rec.channels; ++c) put_field(hdr, rec.channel_names[c], 16);
    for (int c = 0; c < rec.channels; ++c) put_field(hdr, "", 80);  // transducer
    for (int c = 0; c < rec.channels; ++c) put_field(hdr, "uV", 8); // physical dimension
    for (int c = 0; c < rec.channels; ++c) put_field(hdr, render_bound(exponents[c], true), 8);
    for (int c = 0; c < rec.channels; ++c) put_field(hdr, render_bound(exponents[c], false), 8);
    for (int c = 0; c < rec.channels; ++c) put_field(hdr, "-32767", 8);
    for (int c = 0; c < rec.channels; ++c) put_field(hdr, "32767", 8);
    for (int c = 0; c < rec.channels; ++c) put_field(hdr, "", 80);  // prefiltering
    for (int c = 0; c < rec.channels; ++c) put_field(hdr, std::to_string(spr), 8);
    for (int c = 0; c < rec.channels; ++c) put_field(hdr, "", 32);  // reserved

    std::vector<uint8_t> out(hdr.begin(), hdr.end());
    out.reserve(out.size() + static_cast<size_t>(rec.channels) * rec.n_samples * 2);
    for (int64_t r = 0; r < n_records; ++r) {
        for (int c = 0; c < rec.channels; ++c) {
            auto ch = rec.channel(c);
            for (int64_t i = 0; i < spr; ++i) {
                double v = ch[r * spr + i] / gains[c];
                long d = std::lround(v);
                d = std::clamp(d, -32767l, 32767l);
                uint16_t u = static_cast<uint16_t>(static_cast<int16_t>(d));
                out.push_back(u & 0xff);
                out.push_back(u >> 8);
            }
        }
    }
    return out;
}

Recording read_edf(const std::vector<uint8_t>& bytes, EdfInfo* info) {
    size_t pos = 0;
    const std::string version = trim(take_field(bytes, pos, 8, "version"));
    if (version != "0") fail_format("edf: unsupported version '" + version + "'");
    take_field(bytes, pos, 80, "patient id");
    take_field(bytes, pos, 80, "recording id");
    take_field(bytes, pos, 8, "start date");
    take_field(bytes, pos, 8, "start time");
    const long header_bytes = parse_int(take_field(bytes, pos, 8, "header bytes"), "header bytes");
    take_field(bytes, pos, 44, "reserved");
    const long n_records = parse_int(take_field(bytes, pos, 8, "record count"), "record count");
    const double record_dur = parse_num(take_field(bytes, pos, 8, "record duration"), "record duration");
    const long ns = parse_int(take_field(bytes, pos, 4, "signal count"), "signal count");
    if (ns < 1) fail_format("edf: no signals");
    if (n_records < 0) fail_format("edf: unknown record count (-1) is not supported");
    if (!(record_dur > 0.0)) fail_format("edf: record duration must be > 0");
    if (header_bytes != 256 * (1 + ns)) fail_format("edf: header size field inconsistent with signal count");

    std::vector<std::string> labels(ns);
    std::vector<double> phys_min(ns), phys_max(ns);
    std::vector<long> dig_min(ns), dig_max(ns), spr(ns);
    for (long c = 0; c < ns; ++c) labels[c] = trim(take_field(bytes, pos, 16, "label"));
    for (long c = 0; c < ns; ++c) take_field(bytes, pos, 80, "transducer");
    for (long c = 0; c < ns; ++c) take_field(bytes, pos, 8, "physical dimension");
    for (long c = 0; c < ns; ++c) phys_min[c] = parse_num(take_field(bytes, pos, 8, "physical min"), "physical min");
    for (long c = 0; c < ns; ++c) phys_max[c] = parse_num(take_field(bytes, pos, 8, "physical max"), "physical max");
    for (long c = 0; c < ns; ++c) dig_min[c] = parse_int(take_field(bytes, pos, 8, "digital min"), "digital min");
    for (long c = 0; c < ns; ++c) dig_max[c] = parse_int(take_field(bytes, pos, 8, "digital max"), "digital max");
    for (long c = 0; c < ns; ++c) take_field(bytes, pos, 80, "prefiltering");
    for (long c = 0; c < ns; ++c) {
        spr[c] = parse_int(take_field(bytes, pos, 8, "samples per record"), "samples per record");
        if (spr[c] < 1) fail_format("edf: samples per record must be >= 1");
    }
    for (long c = 0; c < ns; ++c) take_field(bytes, pos, 32, "reserved");

    std::vector<int> keep;
    for (long c = 0; c < ns; ++c)
        if (labels[c] != "EDF Annotations") keep.push_back(static_cast<int>(c));
    if (keep.empty()) fail_format("edf: only annotation signals present");

    for (int c : keep) {
        if (dig_min[c] == dig_max[c]) fail_format("edf: degenerate digital range on signal " + labels[c]);
        if (phys_min[c] == phys_max[c]) fail_format("edf: degenerate physical range on signal " + labels[c]);
    }

    size_t record_bytes = 0;
    for (long c = 0; c < ns; ++c) record_bytes += static_cast<size_t>(spr[c]) * 2;
    if (bytes.size() - pos < record_bytes * static_cast<size_t>(n_records))
        fail_format("edf: truncated data records");

    std::vector<int> keep_index(ns, -1);
    for (size_t i = 0; i < keep.size(); ++i) keep_index[keep[i]] = static_cast<int>(i);

    // Per-signal decode at native per-record rate.
    std::vector<std::vector<double>> raw(keep.size());
    for (size_t i = 0; i < keep.size(); ++i) raw[i].reserve(static_cast<size_t>(spr[keep[i]]) * n_records);
    for (long r = 0; r < n_records; ++r) {
        for (long c = 0; c < ns; ++c) {
            const size_t count = static_cast<size_t>(spr[c]);
            if (keep_index[c] < 0) {
                pos += count * 2;
                continue;
            }
            const size_t ki = static_cast<size_t>(keep_index[c]);
            const double gain = (phys_max[c] - phys_min[c]) / static_cast<double>(dig_max[c] - dig_min[c]);
            const double offset = phys_min[c] - dig_min[c] * gain;
            for (size_t s = 0; s < count; ++s) {
                int16_t d = static_cast<int16_t>(bytes[pos] | (uint16_t(bytes[pos + 1]) << 8));
                pos += 2;
                raw[ki].push_back(d * gain + offset);
            }
        }
    }

    // Rates must agree; otherwise everything is resampled to the fastest one.
    double max_fs = 0.0;
    for (int c : keep) max_fs = std::max(max_fs, spr[c] / record_dur);
    Recording rec = make_recording(static_cast<int>(keep.size()), max_fs,
                                   static_cast<int64_t>(std::llround(max_fs * record_dur * n_records)));
    for (size_t i = 0; i < keep.size(); ++i) {
        const int c = keep[i];
        rec.channel_names[i] = labels[c].empty() ? "ch" + std::to_string(i + 1) : labels[c];
        const double fs_c = spr[c] / record_dur;
        if (fs_c == max_fs) {
            std::copy(raw[i].begin(), raw[i].end(), rec.channel(i).begin());
        } else {
            Recording tmp = make_recording(1, fs_c, static_cast<int64_t>(raw[i].size()));
            std::copy(raw[i].begin(), raw[i].end(), tmp.channel(0).begin());
            Recording up = resample(tmp, max_fs);
            const int64_t n = std::min<int64_t>(up.n_samples, rec.n_samples);
            std::copy(up.channel(0).begin(), up.channel(0).begin() + n, rec.channel(i).begin());
            for (int64_t t = n; t < rec.n_samples; ++t) rec.at(static_cast<int>(i), t) = raw[i].back();
        }
    }

    if (info) {
        info->n_records = static_cast<int>(n_records);
        info->record_dur_s = record_dur;
        info->signals.clear();
        for (int c : keep) {
            EdfSignalInfo si;
            si.label = labels[c];
            si.phys_min = phys_min[c];
            si.phys_max = phys_max[c];
            si.dig_min = static_cast<int>(dig_min[c]);
            si.dig_max = static_cast<int>(dig_max[c]);
            si.samples_per_record = static_cast<int>(spr[c]);
            info->signals.push_back(std::move(si));
        }
    }
    rec.validate();
    return rec;
}

void save_edf(const Recording& rec, const std::string& path) {
    auto bytes = write_edf(rec);
    write_file_bytes(path, bytes.data(), bytes.size());
}

Recording load_edf(const std::string& path, EdfInfo* info) {
    return read_edf(read_file_bytes(path), info);
}

Recording load_recording(const std::string& path) {
    auto dot = path.rfind('.');
    std::string ext = dot == std::string::npos ? "" : path.substr(dot);
    for (auto& ch : ext) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    if (ext == ".edf") return load_edf(path);
    if (ext == ".eegraw") return load_eegraw(path);
    fail_usage("unsupported recording extension (expected .edf or .eegraw): " + path);
}

} // namespace eegfc
