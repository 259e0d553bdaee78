#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace eegfc {

// Flat key=value pipeline configuration with provenance tracking.
// Precedence: built-in defaults < config file (--config) < command-line flags.
// Unknown keys are rejected wherever they appear.

enum class ConfigSource { defaults, file, flag };

struct ConfigEntry {
    std::string key;
    std::string value;
    ConfigSource source = ConfigSource::defaults;
};

class ConfigSet {
public:
    static ConfigSet defaults(); // full key set with default values

    bool has(const std::string& key) const;
    const std::string& get(const std::string& key) const;
    int get_int(const std::string& key) const;
    int64_t get_i64(const std::string& key) const;
    double get_double(const std::string& key) const;
    bool get_bool(const std::string& key) const;
    uint64_t get_u64(const std::string& key) const;

    void set(const std::string& key, const std::string& value, ConfigSource source);

    // Parses "key = value" lines with '#' comments and blank lines.
    void apply_file_text(const std::string& text, const std::string& path_for_errors);
    void apply_file(const std::string& path);

    // Sorted "key = value  # default|file|flag" lines, echoed into output dirs.
    std::string render_effective() const;

    const std::vector<ConfigEntry>& entries() const { return entries_; }

private:
    std::vector<ConfigEntry> entries_; // sorted by key
    ConfigEntry* find(const std::string& key);
    const ConfigEntry* find(const std::string& key) const;
};

} // namespace eegfc
