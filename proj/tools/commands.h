// Copyright 2026 The pulsevoc Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pulsevoc/config.h"

namespace pulsevoc::cli {

// Options shared by every subcommand.
struct GlobalOptions {
  std::string preset = "default";
  std::string config_path;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
};

// Preset, then file, then overrides; validated.
RunConfig resolve_config(const GlobalOptions& g);

// --seed, else training.seed, else fresh entropy announced on stderr.
std::uint64_t resolve_seed(const GlobalOptions& g, const RunConfig& cfg);

int cmd_scan(const GlobalOptions& g, const std::string& dir, const std::string& out_path);
int cmd_pitch(const GlobalOptions& g, const std::string& in, const std::string& out);
int cmd_template(const GlobalOptions& g, const std::string& in, const std::string& out);
int cmd_augment(const GlobalOptions& g, const std::string& in, const std::string& out, std::optional<int> zeta);
int cmd_eval_losses(const GlobalOptions& g, const std::string& a, const std::string& b);
int cmd_train_toy(const GlobalOptions& g, const std::string& manifest, const std::string& out_dir,
                  const std::string& resume);
int cmd_copy_synth(const GlobalOptions& g, const std::string& in, const std::string& checkpoint,
                   const std::string& out);
int cmd_dump_spec(const GlobalOptions& g, const std::string& in, const std::string& out, int fft, int hop, int win);

}  // namespace pulsevoc::cli
