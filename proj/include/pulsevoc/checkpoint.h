// Copyright 2026 The pulsevoc Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pulsevoc/train.h"

namespace pulsevoc {

// Binary layout, little-endian:
//   "PVCKPT" 0 0, u32 version,
//   str config_text, i64 step, u64 seed, str rng_state,
//   u64 tensor_count, then per tensor: str name, u32 rank, u64 dims[rank],
//   f64 data[numel].
// str is a u64 byte length followed by the bytes. Tensors are generator
// parameters, discriminator parameters, then per optimizer its step count
// as a scalar followed by first and second moments, all in parameter order.
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct CheckpointHeader {
  std::string config_text;
  std::int64_t step = 0;
  std::uint64_t seed = 0;
};

std::vector<char> serialize_checkpoint(const ModelState& state, const std::string& config_text);
void save_checkpoint(const std::string& path, const ModelState& state, const std::string& config_text);

// Throws kIo on unreadable, truncated or foreign files.
CheckpointHeader read_checkpoint_header(const std::string& path);

/// Restores parameters, optimizer moments, step and RNG into a state built
/// from the same configuration. Throws kInvalidArgument on any name or
/// shape mismatch.
CheckpointHeader load_checkpoint(const std::string& path, ModelState& state);
CheckpointHeader load_checkpoint_bytes(const std::vector<char>& bytes, ModelState& state);

}  // namespace pulsevoc
