#pragma once

#include "eegfc/recording.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace eegfc {

// Minimal EDF reader/writer covering the subset used by continuous EEG exports:
// one data-record layout shared by all signals, 16-bit little-endian samples,
// linear digital->physical scaling per signal. Annotation signals ("EDF Annotations")
// are not produced; if present on read they are skipped.
//
// The writer chooses, per signal, a power-of-ten gain s (physical units per
// digital count): the smallest power of ten with 32767*s >= max|v|. Each sample
// is stored as round(v/s) clamped to [-32767, 32767] and the physical min/max
// are written as -32767*s / +32767*s, which always fit the 8-character EDF
// fields exactly. Because the stored values are reproduced exactly by the
// reader and re-encoding picks the same gain, write(read(write(x))) is
// byte-identical to write(x).

struct EdfSignalInfo {
    std::string label;
    double phys_min = 0.0;
    double phys_max = 0.0;
    int dig_min = 0;
    int dig_max = 0;
    int samples_per_record = 0;
};

struct EdfInfo {
    int n_records = 0;
    double record_dur_s = 0.0;
    std::vector<EdfSignalInfo> signals;
};

std::vector<uint8_t> write_edf(const Recording& rec);
Recording read_edf(const std::vector<uint8_t>& bytes, EdfInfo* info = nullptr);

void save_edf(const Recording& rec, const std::string& path);
Recording load_edf(const std::string& path, EdfInfo* info = nullptr);

// Loads either container by extension: ".edf" or ".eegraw".
Recording load_recording(const std::string& path);

} // namespace eegfc
