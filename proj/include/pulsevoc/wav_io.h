// Copyright 2026 The pulsevoc Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>
#include <string>

#include "pulsevoc/types.h"

namespace pulsevoc {

enum class WavFormat { kPcm16, kPcm24, kFloat32 };

struct WavInfo {
  int sample_rate = 0;
  int channels = 0;
  std::size_t n_samples = 0;  // per channel
  WavFormat format = WavFormat::kPcm16;
};

/// Reads PCM16, PCM24 or IEEE float32. Multi-channel files yield channel 0
/// and a warning on stderr. Throws Error(kIo) on unreadable or malformed files.
Waveform read_wav(const std::string& path);

// Header only.
WavInfo probe_wav(const std::string& path);

// Samples are clipped to [-1, 1] for the PCM formats.
void write_wav(const std::string& path, const Waveform& wave,
               WavFormat format = WavFormat::kFloat32);

}  // namespace pulsevoc
