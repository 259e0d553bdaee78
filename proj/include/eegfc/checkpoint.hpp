#pragma once

#include "eegfc/net.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace eegfc {

// Checkpoint container: magic "EEGT", u32 version, an ASCII key=value config
// block (u32 length prefix, keys sorted), then one record per tensor in model
// order: u32 name length, name bytes, u32 rank, u32 dims, values as 64-bit LE
// floats. Tensors are stored in double regardless of the in-memory scalar, so
// float models round-trip exactly and save -> load -> save is byte-identical.

using CheckpointMeta = std::map<std::string, std::string>;

inline constexpr uint32_t kCheckpointVersion = 1;

template <class T>
std::vector<uint8_t> write_checkpoint(const Model<T>& m, const CheckpointMeta& meta);

// Parses only the header/config block (cheap; used to build a ModelConfig
// before allocating the model).
CheckpointMeta read_checkpoint_meta(const std::vector<uint8_t>& bytes);

// Loads tensors by name into an existing model. Every backbone tensor must be
// present with matching shape; classifier tensors ("clf.*") may be absent
// (transfer from a pretraining checkpoint keeps their fresh initialization).
// Truncation or shape mismatch raises a format error naming the tensor.
template <class T>
void read_checkpoint_into(Model<T>& m, const std::vector<uint8_t>& bytes,
                          CheckpointMeta* meta_out = nullptr);

// Meta <-> config helpers shared by the training loops and the CLI.
CheckpointMeta make_model_meta(const ModelConfig& cfg, const TokenizerState& tok, double fs,
                               const std::string& kind);
ModelConfig model_config_from_meta(const CheckpointMeta& meta);
TokenizerState tokenizer_from_meta(const CheckpointMeta& meta);

template <class T>
void save_checkpoint_file(const Model<T>& m, const CheckpointMeta& meta, const std::string& path);

extern template std::vector<uint8_t> write_checkpoint<float>(const Model<float>&, const CheckpointMeta&);
extern template std::vector<uint8_t> write_checkpoint<double>(const Model<double>&, const CheckpointMeta&);
extern template void read_checkpoint_into<float>(Model<float>&, const std::vector<uint8_t>&, CheckpointMeta*);
extern template void read_checkpoint_into<double>(Model<double>&, const std::vector<uint8_t>&, CheckpointMeta*);
extern template void save_checkpoint_file<float>(const Model<float>&, const CheckpointMeta&, const std::string&);
extern template void save_checkpoint_file<double>(const Model<double>&, const CheckpointMeta&, const std::string&);

} // namespace eegfc
