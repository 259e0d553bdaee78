#include "eegfc/config.hpp"

#include "eegfc/error.hpp"

#include <algorithm>
#include <cstdlib>
#include <sstream>

namespace eegfc {

namespace {

const char* source_name(ConfigSource s) {
    switch (s) {
        case ConfigSource::defaults: return "default";
        case ConfigSource::file: return "file";
        case ConfigSource::flag: return "flag";
    }
    return "?";
}

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t");
    return s.substr(a, b - a + 1);
}

} // namespace

ConfigSet ConfigSet::defaults() {
    // Pipeline tunables: model and training hyperparameters, windowing,
    // tokenizer resolution, synthesis defaults, evaluation settings.
    static const std::pair<const char*, const char*> kDefaults[] = {
        {"accum_finetune", "4"},
        {"accum_pretrain", "8"},
        {"backbone_frozen", "false"},
        {"batch_size", "16"},
        {"block_size", "512"},
        {"channels", "18"},
        {"clip_sigma", "5"},
        {"d_model", "128"},
        {"dropout_finetune", "0.2"},
        {"dropout_pretrain", "0.1"},
        {"duration_s", "3600"},
        {"eval_every", "100"},
        {"finetune_steps", "5000"},
        {"frame_len", "15"},
        {"fs", "250"},
        {"horizon_s", "30"},
        {"infer_overlap", "0.75"},
        {"lambda_mse", "0.1"},
        {"levels", "512"},
        {"lr_finetune", "3e-05"},
        {"lr_pretrain", "0.0003"},
        {"n_heads", "4"},
        {"n_layers", "4"},
        {"n_seizures", "3"},
        {"pretrain_steps", "5000"},
        {"seed", "1"},
        {"seg_dur_s", "30"},
        {"threshold", "0.5"},
        {"train_overlap", "0.5"},
        {"val_frac", "0.2"},
        {"weight_decay", "0.01"},
    };
    ConfigSet cs;
    for (const auto& [k, v] : kDefaults)
        cs.entries_.push_back(ConfigEntry{k, v, ConfigSource::defaults});
    return cs;
}

ConfigEntry* ConfigSet::find(const std::string& key) {
    for (auto& e : entries_)
        if (e.key == key) return &e;
    return nullptr;
}

const ConfigEntry* ConfigSet::find(const std::string& key) const {
    for (const auto& e : entries_)
        if (e.key == key) return &e;
    return nullptr;
}

bool ConfigSet::has(const std::string& key) const { return find(key) != nullptr; }

const std::string& ConfigSet::get(const std::string& key) const {
    const ConfigEntry* e = find(key);
    if (!e) fail_usage("unknown config key: " + key);
    return e->value;
}

int ConfigSet::get_int(const std::string& key) const {
    return static_cast<int>(get_i64(key));
}

int64_t ConfigSet::get_i64(const std::string& key) const {
    const std::string& v = get(key);
    try {
        size_t used = 0;
        int64_t r = std::stoll(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return r;
    } catch (const std::exception&) {
        fail_usage("config key '" + key + "' expects an integer, got '" + v + "'");
    }
}

double ConfigSet::get_double(const std::string& key) const {
    const std::string& v = get(key);
    try {
        size_t used = 0;
        double r = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return r;
    } catch (const std::exception&) {
        fail_usage("config key '" + key + "' expects a number, got '" + v + "'");
    }
}

bool ConfigSet::get_bool(const std::string& key) const {
    const std::string& v = get(key);
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    fail_usage("config key '" + key + "' expects a boolean, got '" + v + "'");
}

uint64_t ConfigSet::get_u64(const std::string& key) const {
    const std::string& v = get(key);
    try {
        size_t used = 0;
        uint64_t r = std::stoull(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return r;
    } catch (const std::exception&) {
        fail_usage("config key '" + key + "' expects a non-negative integer, got '" + v + "'");
    }
}

void ConfigSet::set(const std::string& key, const std::string& value, ConfigSource source) {
    ConfigEntry* e = find(key);
    if (!e) fail_usage("unknown config key: " + key);
    e->value = value;
    e->source = source;
}

void ConfigSet::apply_file_text(const std::string& text, const std::string& path_for_errors) {
    std::istringstream iss(text);
    std::string line;
    int line_no = 0;
    while (std::getline(iss, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const size_t eq = line.find('=');
        if (eq == std::string::npos)
            fail_format(path_for_errors + ":" + std::to_string(line_no) +
                        ": expected 'key = value', got '" + line + "'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            fail_format(path_for_errors + ":" + std::to_string(line_no) + ": empty key or value");
        if (!has(key)) fail_usage(path_for_errors + ":" + std::to_string(line_no) + ": unknown config key: " + key);
        set(key, value, ConfigSource::file);
    }
}

void ConfigSet::apply_file(const std::string& path) {
    // read_file_text lives in recording.hpp's helper set; avoid the include
    // cycle by reading here directly.
    std::string text;
    {
        FILE* f = std::fopen(path.c_str(), "rb");
        if (!f) fail_usage("cannot open config file: " + path);
        char buf[4096];
        size_t n;
        while ((n = std::fread(buf, 1, sizeof buf, f)) > 0) text.append(buf, n);
        std::fclose(f);
    }
    apply_file_text(text, path);
}

std::string ConfigSet::render_effective() const {
    std::string out;
    for (const auto& e : entries_)
        out += e.key + " = " + e.value + "  # " + source_name(e.source) + "\n";
    return out;
}

} // namespace eegfc
