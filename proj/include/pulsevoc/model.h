// Copyright 2026 The pulsevoc Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstddef>
#include <vector>

#include "pulsevoc/losses.h"
#include "pulsevoc/nn/layers.h"
#include "pulsevoc/rng.h"
#include "pulsevoc/speech_template.h"
#include "pulsevoc/types.h"

namespace pulsevoc {

struct GeneratorConfig {
  std::vector<int> down_rates{2, 2, 8, 8};
  std::vector<int> up_rates{8, 8, 2, 2};
  int base_channels = 16;
  std::vector<int> decoder_kernels{3, 7, 11};
  int encoder_kernel = 7;
  std::vector<int> dilations{1, 3, 5};
  int n_mels = 128;
  double leaky_slope = 0.1;

  // Product of down_rates.
  int hop() const;
  // Throws unless up_rates mirror down_rates and both products equal hop_size.
  void validate(int hop_size) const;

  static GeneratorConfig toy();
};

struct StftGeometry {
  int fft_size = 1024;
  int hop_size = 120;
  int win_size = 600;

  friend bool operator==(const StftGeometry&, const StftGeometry&) = default;
};

// Channel plans:
//   MPD sub-discriminator: 5 convs, kernel (5, 1), strides (3,3,3,3,1),
//   channels mpd_channels, then a (3, 1) conv to one channel.
//   MRD sub-discriminator: 4 convs, kernel (3, 9), strides (1,1) then
//   (1,2) x3, mrd_channels each, then a (3, 3) conv to one channel.
struct DiscriminatorConfig {
  std::vector<int> mpd_periods{2, 3, 5, 7, 11};
  std::vector<StftGeometry> mrd_param_sets{{1024, 120, 600}, {2048, 240, 1200}, {512, 50, 240}};
  std::vector<int> mpd_channels{8, 16, 32, 64, 64};
  int mrd_channels = 16;
  double leaky_slope = 0.1;

  void validate() const;

  static DiscriminatorConfig toy();
};

// One encoder or decoder ResBlock: three residual sub-blocks of
// lrelu -> dilated conv -> lrelu -> conv, both weight-normalized.
class ResBlock {
 public:
  ResBlock() = default;
  ResBlock(int channels, int kernel, const std::vector<int>& dilations, double slope, Rng& rng);

  nn::Var forward(const nn::Var& x) const;
  void collect(const std::string& prefix, nn::ParamList& out) const;
  void weight_normalized_convs(std::vector<const nn::Conv1d*>& out) const;

 private:
  std::vector<nn::Conv1d> dilated_;
  std::vector<nn::Conv1d> plain_;
  double slope_ = 0.1;
};

class Generator {
 public:
  Generator(const GeneratorConfig& cfg, Rng& rng);

  /// template [B, 1, T], mel [B, n_mels, F] with F = T / hop or T / hop + 1
  /// (the trailing center-padded frame is dropped). Returns [B, 1, T].
  nn::Var forward(const nn::Var& templ, const nn::Var& mel) const;

  Waveform synthesize(const SpeechTemplate& templ, const MelSpectrogram& mel) const;

  nn::ParamList parameters() const;
  std::size_t parameter_count() const;
  std::vector<const nn::Conv1d*> weight_normalized_convs() const;
  const GeneratorConfig& config() const { return cfg_; }

 private:
  struct Down {
    nn::Conv1d conv;
    ResBlock res;
  };
  struct Up {
    nn::ConvTranspose1d conv;
    nn::Conv1d merge;
    std::vector<ResBlock> res;
  };

  GeneratorConfig cfg_;
  nn::Conv1d input_;
  std::vector<Down> down_;
  nn::Conv1d mel_in_;
  nn::Conv1d fuse_;
  std::vector<Up> up_;
  nn::Conv1d output_;
};

Generator build_generator(const GeneratorConfig& cfg, Rng& rng);

/// Receptive field in output samples of the path from the mel fusion
/// layer to one output sample.
std::size_t decoder_receptive_field(const GeneratorConfig& cfg);

class Discriminators {
 public:
  Discriminators(const DiscriminatorConfig& cfg, Rng& rng);

  // One score map per sub-discriminator; x is [B, 1, T].
  std::vector<nn::Var> mpd(const nn::Var& x) const;
  std::vector<nn::Var> mrd(const nn::Var& x) const;

  nn::ParamList parameters() const;
  std::size_t parameter_count() const;
  const DiscriminatorConfig& config() const { return cfg_; }

 private:
  struct Stack {
    std::vector<nn::Conv2d> convs;
    nn::Conv2d post;
  };
  nn::Var run(const Stack& s, nn::Var h) const;

  DiscriminatorConfig cfg_;
  std::vector<Stack> mpd_;
  std::vector<Stack> mrd_;
};

ScoreSet mpd_forward(const Discriminators& d, const Waveform& wave);
ScoreSet mrd_forward(const Discriminators& d, const Waveform& wave);

}  // namespace pulsevoc
