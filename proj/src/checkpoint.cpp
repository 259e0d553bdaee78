#include "eegfc/checkpoint.hpp"

#include "eegfc/recording.hpp"

#include <cstdio>
#include <cstring>

namespace eegfc {

namespace {

constexpr char kMagic[4] = {'E', 'E', 'G', 'T'};

void put_u32(std::vector<uint8_t>& out, uint32_t v) {
    out.push_back(static_cast<uint8_t>(v & 0xff));
    out.push_back(static_cast<uint8_t>((v >> 8) & 0xff));
    out.push_back(static_cast<uint8_t>((v >> 16) & 0xff));
    out.push_back(static_cast<uint8_t>((v >> 24) & 0xff));
}

void put_f64(std::vector<uint8_t>& out, double v) {
    uint64_t bits;
    std::memcpy(&bits, &v, 8);
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<uint8_t>((bits >> (8 * i)) & 0xff));
}

struct Reader {
    const uint8_t* p;
    size_t n;
    size_t pos = 0;

    void need(size_t k, const char* what) const {
        if (pos + k > n) fail_format(std::string("checkpoint truncated reading ") + what);
    }
    uint32_t u32(const char* what) {
        need(4, what);
        uint32_t v = static_cast<uint32_t>(p[pos]) | (static_cast<uint32_t>(p[pos + 1]) << 8) |
                     (static_cast<uint32_t>(p[pos + 2]) << 16) |
                     (static_cast<uint32_t>(p[pos + 3]) << 24);
        pos += 4;
        return v;
    }
    double f64(const char* what) {
        need(8, what);
        uint64_t bits = 0;
        for (int i = 0; i < 8; ++i) bits |= static_cast<uint64_t>(p[pos + i]) << (8 * i);
        pos += 8;
        double v;
        std::memcpy(&v, &bits, 8);
        return v;
    }
    std::string str(size_t k, const char* what) {
        need(k, what);
        std::string s(reinterpret_cast<const char*>(p + pos), k);
        pos += k;
        return s;
    }
};

std::string render_meta(const CheckpointMeta& meta) {
    std::string out;
    for (const auto& [k, v] : meta) { // std::map iterates in sorted key order
        if (k.find_first_of("=\n") != std::string::npos || v.find('\n') != std::string::npos)
            fail_usage("checkpoint meta keys/values must not contain '=' or newlines");
        out += k;
        out += '=';
        out += v;
        out += '\n';
    }
    return out;
}

CheckpointMeta parse_meta(const std::string& text) {
    CheckpointMeta meta;
    size_t start = 0;
    while (start < text.size()) {
        size_t end = text.find('\n', start);
        if (end == std::string::npos) fail_format("checkpoint config block missing newline");
        const std::string line = text.substr(start, end - start);
        const size_t eq = line.find('=');
        if (eq == std::string::npos) fail_format("checkpoint config line missing '='");
        meta[line.substr(0, eq)] = line.substr(eq + 1);
        start = end + 1;
    }
    return meta;
}

Reader open_reader(const std::vector<uint8_t>& bytes) {
    Reader r{bytes.data(), bytes.size()};
    r.need(4, "magic");
    if (std::memcmp(r.p, kMagic, 4) != 0) fail_format("not a checkpoint (bad magic)");
    r.pos = 4;
    const uint32_t version = r.u32("version");
    if (version != kCheckpointVersion)
        fail_format("unsupported checkpoint version " + std::to_string(version));
    return r;
}

std::string fmt_g17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

const std::string& require(const CheckpointMeta& meta, const std::string& key) {
    auto it = meta.find(key);
    if (it == meta.end()) fail_format("checkpoint meta missing key '" + key + "'");
    return it->second;
}

int meta_int(const CheckpointMeta& meta, const std::string& key) {
    const std::string& s = require(meta, key);
    try {
        size_t used = 0;
        const int v = std::stoi(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        fail_format("checkpoint meta key '" + key + "' is not an integer: " + s);
    }
}

double meta_double(const CheckpointMeta& meta, const std::string& key) {
    const std::string& s = require(meta, key);
    try {
        size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        fail_format("checkpoint meta key '" + key + "' is not a number: " + s);
    }
}

} // namespace

template <class T>
std::vector<uint8_t> write_checkpoint(const Model<T>& m, const CheckpointMeta& meta) {
    std::vector<uint8_t> out;
    out.reserve(16 + m.ps.data.size() * 8);
    out.insert(out.end(), kMagic, kMagic + 4);
    put_u32(out, kCheckpointVersion);
    const std::string cfg_text = render_meta(meta);
    put_u32(out, static_cast<uint32_t>(cfg_text.size()));
    out.insert(out.end(), cfg_text.begin(), cfg_text.end());
    for (size_t i = 0; i < m.ps.infos.size(); ++i) {
        const auto& info = m.ps.infos[i];
        put_u32(out, static_cast<uint32_t>(info.name.size()));
        out.insert(out.end(), info.name.begin(), info.name.end());
        put_u32(out, static_cast<uint32_t>(info.dims.size()));
        for (int d : info.dims) put_u32(out, static_cast<uint32_t>(d));
        const T* p = m.ps.p(static_cast<int>(i));
        for (size_t k = 0; k < info.size; ++k) put_f64(out, static_cast<double>(p[k]));
    }
    return out;
}

CheckpointMeta read_checkpoint_meta(const std::vector<uint8_t>& bytes) {
    Reader r = open_reader(bytes);
    const uint32_t len = r.u32("config length");
    return parse_meta(r.str(len, "config block"));
}

template <class T>
void read_checkpoint_into(Model<T>& m, const std::vector<uint8_t>& bytes, CheckpointMeta* meta_out) {
    Reader r = open_reader(bytes);
    const uint32_t len = r.u32("config length");
    CheckpointMeta meta = parse_meta(r.str(len, "config block"));
    if (meta_out) *meta_out = meta;

    struct Rec {
        std::vector<int> dims;
        size_t value_pos; // byte offset of the f64 payload
        size_t count;
    };
    std::map<std::string, Rec> recs;
    while (r.pos < r.n) {
        const uint32_t name_len = r.u32("tensor name length");
        const std::string name = r.str(name_len, "tensor name");
        const uint32_t rank = r.u32(("rank of " + name).c_str());
        if (rank > 8) fail_format("checkpoint tensor '" + name + "' has implausible rank");
        Rec rec;
        size_t count = 1;
        for (uint32_t i = 0; i < rank; ++i) {
            const uint32_t d = r.u32(("dims of " + name).c_str());
            rec.dims.push_back(static_cast<int>(d));
            count *= d;
        }
        rec.value_pos = r.pos;
        rec.count = count;
        r.need(count * 8, ("values of " + name).c_str());
        r.pos += count * 8;
        recs.emplace(name, std::move(rec));
    }

    for (size_t i = 0; i < m.ps.infos.size(); ++i) {
        const auto& info = m.ps.infos[i];
        auto it = recs.find(info.name);
        if (it == recs.end()) {
            if (!info.backbone) continue; // fresh classifier head is fine
            fail_format("checkpoint missing tensor '" + info.name + "'");
        }
        const Rec& rec = it->second;
        if (rec.dims != info.dims)
            fail_format("checkpoint tensor '" + info.name + "' has mismatched shape");
        Reader vr{r.p, r.n, rec.value_pos};
        T* p = m.ps.p(static_cast<int>(i));
        for (size_t k = 0; k < rec.count; ++k)
            p[k] = static_cast<T>(vr.f64(info.name.c_str()));
    }
}

CheckpointMeta make_model_meta(const ModelConfig& cfg, const TokenizerState& tok, double fs,
                               const std::string& kind) {
    CheckpointMeta meta;
    meta["kind"] = kind;
    meta["vocab"] = std::to_string(cfg.vocab);
    meta["d_model"] = std::to_string(cfg.d_model);
    meta["n_layers"] = std::to_string(cfg.n_layers);
    meta["n_heads"] = std::to_string(cfg.n_heads);
    meta["block_size"] = std::to_string(cfg.block_size);
    meta["frame_len"] = std::to_string(cfg.frame_len);
    meta["channels"] = std::to_string(cfg.channels);
    meta["dropout_pretrain"] = fmt_g17(cfg.dropout_pretrain);
    meta["dropout_finetune"] = fmt_g17(cfg.dropout_finetune);
    meta["tok_levels"] = std::to_string(tok.levels);
    meta["tok_clip_sigma"] = fmt_g17(tok.clip_sigma);
    meta["tok_mu"] = fmt_g17(tok.mu);
    meta["tok_sigma"] = fmt_g17(tok.sigma);
    meta["fs"] = fmt_g17(fs);
    return meta;
}

ModelConfig model_config_from_meta(const CheckpointMeta& meta) {
    ModelConfig cfg;
    cfg.vocab = meta_int(meta, "vocab");
    cfg.d_model = meta_int(meta, "d_model");
    cfg.n_layers = meta_int(meta, "n_layers");
    cfg.n_heads = meta_int(meta, "n_heads");
    cfg.block_size = meta_int(meta, "block_size");
    cfg.frame_len = meta_int(meta, "frame_len");
    cfg.channels = meta_int(meta, "channels");
    cfg.dropout_pretrain = meta_double(meta, "dropout_pretrain");
    cfg.dropout_finetune = meta_double(meta, "dropout_finetune");
    cfg.validate();
    return cfg;
}

TokenizerState tokenizer_from_meta(const CheckpointMeta& meta) {
    TokenizerState tok;
    tok.levels = meta_int(meta, "tok_levels");
    tok.clip_sigma = meta_double(meta, "tok_clip_sigma");
    tok.mu = meta_double(meta, "tok_mu");
    tok.sigma = meta_double(meta, "tok_sigma");
    if (tok.levels < 2 || !(tok.sigma > 0.0) || !(tok.clip_sigma > 0.0))
        fail_format("checkpoint tokenizer state is invalid");
    return tok;
}

template <class T>
void save_checkpoint_file(const Model<T>& m, const CheckpointMeta& meta, const std::string& path) {
    const std::vector<uint8_t> bytes = write_checkpoint(m, meta);
    write_file_bytes(path, bytes.data(), bytes.size());
}

template std::vector<uint8_t> write_checkpoint<float>(const Model<float>&, const CheckpointMeta&);
template std::vector<uint8_t> write_checkpoint<double>(const Model<double>&, const CheckpointMeta&);
template void read_checkpoint_into<float>(Model<float>&, const std::vector<uint8_t>&, CheckpointMeta*);
template void read_checkpoint_into<double>(Model<double>&, const std::vector<uint8_t>&, CheckpointMeta*);
template void save_checkpoint_file<float>(const Model<float>&, const CheckpointMeta&, const std::string&);
template void save_checkpoint_file<double>(const Model<double>&, const CheckpointMeta&, const std::string&);

} // namespace eegfc
