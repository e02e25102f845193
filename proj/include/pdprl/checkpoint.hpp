#pragma once

#include <cstdint>
#include <string>
#include <utility>

#include "pdprl/model.hpp"

namespace pdprl {

// Binary checkpoint: header {version, d_h, L, heads, ablation flags, step},
// then one record per parameter {name, shape, little-endian f32 payload} in
// store order. Save/load round-trips byte-exactly.
struct CheckpointMeta {
  std::uint32_t version = 1;
  int d_h = 0;
  int L = 0;
  int heads = 0;
  bool cluster_attention_enabled = true;
  bool dual_decoder_enabled = true;
  std::uint64_t step = 0;
};

CheckpointMeta meta_from(const ModelConfig& cfg, std::uint64_t step);

// Rebuild a ModelConfig from a loaded checkpoint; hidden widths are inferred
// from the stored shapes. The logit clip is not a weight and keeps its
// default unless the caller overrides it.
ModelConfig model_config_from(const CheckpointMeta& meta,
                              const ParamStore<float>& store);

void save_checkpoint(const std::string& path, const ParamStore<float>& store,
                     const CheckpointMeta& meta);

std::pair<ParamStore<float>, CheckpointMeta> load_checkpoint(const std::string& path);

// Load and require the stored architecture to match `expected` (d_h, L,
// heads); throws CheckpointError on mismatch.
std::pair<ParamStore<float>, CheckpointMeta> load_checkpoint_expect(
    const std::string& path, const ModelConfig& expected);

}  // namespace pdprl
