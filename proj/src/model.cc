// Copyright 2026 The pulsevoc Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "pulsevoc/model.h"

#include <fmt/format.h>

#include <algorithm>
#include <set>

#include "pulsevoc/error.h"
#include "pulsevoc/nn/ops.h"

namespace pulsevoc {

using nn::Var;

namespace {

std::string join(const std::vector<int>& v) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + std::to_string(v[i]);
  return s + "]";
}

int resblock_span(int kernel, const std::vector<int>& dilations) {
  int span = 0;
  for (int d : dilations) span += (kernel - 1) * d + (kernel - 1);
  return span;
}

std::size_t count(const nn::ParamList& params) {
  std::size_t n = 0;
  for (const auto& p : params) n += p.var.value().numel();
  return n;
}

}  // namespace

int GeneratorConfig::hop() const {
  int p = 1;
  for (int r : down_rates) p *= r;
  return p;
}

void GeneratorConfig::validate(int hop_size) const {
  if (down_rates.empty()) throw_invalid("generator.down_rates must not be empty");
  for (int r : down_rates) {
    if (r < 1) throw_invalid(fmt::format("generator.down_rates entries must be >= 1, got {}", join(down_rates)));
  }
  std::vector<int> mirrored(down_rates.rbegin(), down_rates.rend());
  if (up_rates != mirrored) {
    throw_invalid(fmt::format("generator.up_rates {} must mirror down_rates {}", join(up_rates),
                              join(down_rates)));
  }
  if (hop() != hop_size) {
    throw_invalid(fmt::format("generator rate product {} does not match hop size {}", hop(), hop_size));
  }
  if (base_channels < 1) throw_invalid(fmt::format("generator.base_channels must be >= 1, got {}", base_channels));
  if (decoder_kernels.empty()) throw_invalid("generator.decoder_kernels must not be empty");
  for (int k : decoder_kernels) {
    if (k < 1) throw_invalid(fmt::format("generator.decoder_kernels entries must be >= 1, got {}", join(decoder_kernels)));
  }
  if (encoder_kernel < 1) throw_invalid(fmt::format("generator.encoder_kernel must be >= 1, got {}", encoder_kernel));
  if (dilations.empty()) throw_invalid("generator.dilations must not be empty");
  for (int d : dilations) {
    if (d < 1) throw_invalid(fmt::format("generator.dilations entries must be >= 1, got {}", join(dilations)));
  }
  if (n_mels < 1) throw_invalid(fmt::format("generator.n_mels must be >= 1, got {}", n_mels));
  if (!(leaky_slope >= 0.0 && leaky_slope < 1.0)) {
    throw_invalid(fmt::format("generator.leaky_slope must be in [0, 1), got {}", leaky_slope));
  }
}

GeneratorConfig GeneratorConfig::toy() {
  GeneratorConfig cfg;
  cfg.down_rates = {2, 2};
  cfg.up_rates = {2, 2};
  cfg.base_channels = 4;
  cfg.n_mels = 8;
  return cfg;
}

void DiscriminatorConfig::validate() const {
  if (mpd_periods.empty()) throw_invalid("discriminator.mpd_periods must not be empty");
  std::set<int> seen;
  for (int p : mpd_periods) {
    if (p < 2) throw_invalid(fmt::format("discriminator.mpd_periods entries must be >= 2, got {}", p));
    if (!seen.insert(p).second) throw_invalid(fmt::format("discriminator.mpd_periods has duplicate {}", p));
  }
  if (mrd_param_sets.empty()) throw_invalid("discriminator.mrd_param_sets must not be empty");
  for (const auto& g : mrd_param_sets) {
    MelParamSet p;
    p.fft_size = g.fft_size;
    p.hop_size = g.hop_size;
    p.win_size = g.win_size;
    p.validate_stft();
  }
  if (mpd_channels.size() != 5) {
    throw_invalid(fmt::format("discriminator.mpd_channels needs 5 entries, got {}", mpd_channels.size()));
  }
  for (int c : mpd_channels) {
    if (c < 1) throw_invalid(fmt::format("discriminator.mpd_channels entries must be >= 1, got {}", join(mpd_channels)));
  }
  if (mrd_channels < 1) throw_invalid(fmt::format("discriminator.mrd_channels must be >= 1, got {}", mrd_channels));
  if (!(leaky_slope >= 0.0 && leaky_slope < 1.0)) {
    throw_invalid(fmt::format("discriminator.leaky_slope must be in [0, 1), got {}", leaky_slope));
  }
}

DiscriminatorConfig DiscriminatorConfig::toy() {
  DiscriminatorConfig cfg;
  cfg.mrd_param_sets = {{256, 64, 256}, {512, 128, 512}, {128, 32, 128}};
  cfg.mpd_channels = {4, 8, 16, 32, 32};
  cfg.mrd_channels = 8;
  return cfg;
}

ResBlock::ResBlock(int channels, int kernel, const std::vector<int>& dilations, double slope, Rng& rng)
    : slope_(slope) {
  for (int d : dilations) {
    dilated_.emplace_back(channels, channels, kernel, nn::same_padding(kernel, d), true, rng);
    plain_.emplace_back(channels, channels, kernel, nn::same_padding(kernel, 1), true, rng);
  }
}

Var ResBlock::forward(const Var& x) const {
  Var h = x;
  for (std::size_t i = 0; i < dilated_.size(); ++i) {
    Var t = dilated_[i].forward(nn::leaky_relu(h, slope_));
    t = plain_[i].forward(nn::leaky_relu(t, slope_));
    h = nn::add(h, t);
  }
  return h;
}

void ResBlock::collect(const std::string& prefix, nn::ParamList& out) const {
  for (std::size_t i = 0; i < dilated_.size(); ++i) {
    dilated_[i].collect(fmt::format("{}.{}.dilated", prefix, i), out);
    plain_[i].collect(fmt::format("{}.{}.plain", prefix, i), out);
  }
}

void ResBlock::weight_normalized_convs(std::vector<const nn::Conv1d*>& out) const {
  for (std::size_t i = 0; i < dilated_.size(); ++i) {
    out.push_back(&dilated_[i]);
    out.push_back(&plain_[i]);
  }
}

Generator::Generator(const GeneratorConfig& cfg, Rng& rng) : cfg_(cfg) {
  cfg_.validate(cfg_.hop());
  const int n = static_cast<int>(cfg_.down_rates.size());
  std::vector<int> ch(n + 1);
  for (int i = 0; i <= n; ++i) ch[i] = cfg_.base_channels << i;
  const double slope = cfg_.leaky_slope;

  input_ = nn::Conv1d(1, ch[0], 7, nn::same_padding(7, 1), false, rng);
  for (int i = 0; i < n; ++i) {
    const int r = cfg_.down_rates[i];
    nn::Conv1dOptions o;
    o.stride = r;
    o.pad_left = r / 2;
    o.pad_right = r - r / 2;
    Down d{nn::Conv1d(ch[i], ch[i + 1], 2 * r, o, false, rng),
           ResBlock(ch[i + 1], cfg_.encoder_kernel, cfg_.dilations, slope, rng)};
    down_.push_back(std::move(d));
  }
  mel_in_ = nn::Conv1d(cfg_.n_mels, ch[n], 1, nn::same_padding(1, 1), false, rng);
  fuse_ = nn::Conv1d(2 * ch[n], ch[n], 7, nn::same_padding(7, 1), false, rng);
  for (int j = 0; j < n; ++j) {
    const int cin = ch[n - j], cout = ch[n - 1 - j];
    Up u;
    u.conv = nn::ConvTranspose1d(cin, cout, cfg_.up_rates[j], rng);
    u.merge = nn::Conv1d(2 * cout, cout, 7, nn::same_padding(7, 1), false, rng);
    for (int k : cfg_.decoder_kernels) u.res.emplace_back(cout, k, cfg_.dilations, slope, rng);
    up_.push_back(std::move(u));
  }
  output_ = nn::Conv1d(ch[0], 1, 7, nn::same_padding(7, 1), false, rng);
}

Var Generator::forward(const Var& templ, const Var& mel) const {
  const int hop = cfg_.hop();
  if (templ.value().ndim() != 3 || templ.dim(1) != 1) {
    throw_invalid(fmt::format("generator: template must be [B, 1, T], got {}", nn::shape_str(templ.shape())));
  }
  const std::size_t batch = templ.dim(0), len = templ.dim(2);
  if (len == 0 || len % hop != 0) {
    throw_invalid(fmt::format("generator: template length {} must be a positive multiple of hop {}", len, hop));
  }
  const std::size_t frames = len / hop;
  if (mel.value().ndim() != 3 || mel.dim(0) != batch || mel.dim(1) != static_cast<std::size_t>(cfg_.n_mels) ||
      (mel.dim(2) != frames && mel.dim(2) != frames + 1)) {
    throw_invalid(fmt::format("generator: mel shape {} does not fit template of {} samples; expected [{}, {}, {}] or "
                              "[{}, {}, {}]",
                              nn::shape_str(mel.shape()), len, batch, cfg_.n_mels, frames, batch, cfg_.n_mels,
                              frames + 1));
  }
  const Var cond = mel.dim(2) == frames ? mel : nn::narrow_last(mel, 0, frames);
  const double slope = cfg_.leaky_slope;

  Var h = input_.forward(templ);
  std::vector<Var> skips{h};
  for (const Down& d : down_) {
    h = d.res.forward(d.conv.forward(nn::leaky_relu(h, slope)));
    skips.push_back(h);
  }
  h = fuse_.forward(nn::leaky_relu(nn::concat_channels(h, mel_in_.forward(cond)), slope));
  const std::size_t n = down_.size();
  for (std::size_t j = 0; j < n; ++j) {
    const Up& u = up_[j];
    h = u.conv.forward(nn::leaky_relu(h, slope));
    h = u.merge.forward(nn::leaky_relu(nn::concat_channels(h, skips[n - 1 - j]), slope));
    std::vector<Var> branches;
    branches.reserve(u.res.size());
    for (const ResBlock& r : u.res) branches.push_back(r.forward(h));
    h = nn::mean_of(branches);
  }
  return nn::tanh(output_.forward(nn::leaky_relu(h, slope)));
}

Waveform Generator::synthesize(const SpeechTemplate& templ, const MelSpectrogram& mel) const {
  const std::size_t len = templ.samples.size();
  Var t = nn::constant(nn::Tensor({1, 1, len}, templ.samples));
  Var m = nn::constant(nn::Tensor({1, mel.n_mels(), mel.n_frames()}, mel.log_mels.data()));
  Var y = forward(t, m);
  return Waveform(y.value().values(), templ.sample_rate);
}

nn::ParamList Generator::parameters() const {
  nn::ParamList out;
  input_.collect("gen.input", out);
  for (std::size_t i = 0; i < down_.size(); ++i) {
    down_[i].conv.collect(fmt::format("gen.down.{}.conv", i), out);
    down_[i].res.collect(fmt::format("gen.down.{}.res", i), out);
  }
  mel_in_.collect("gen.mel_in", out);
  fuse_.collect("gen.fuse", out);
  for (std::size_t j = 0; j < up_.size(); ++j) {
    up_[j].conv.collect(fmt::format("gen.up.{}.conv", j), out);
    up_[j].merge.collect(fmt::format("gen.up.{}.merge", j), out);
    for (std::size_t k = 0; k < up_[j].res.size(); ++k) {
      up_[j].res[k].collect(fmt::format("gen.up.{}.res.{}", j, k), out);
    }
  }
  output_.collect("gen.output", out);
  return out;
}

std::size_t Generator::parameter_count() const { return count(parameters()); }

std::vector<const nn::Conv1d*> Generator::weight_normalized_convs() const {
  std::vector<const nn::Conv1d*> out;
  for (const Down& d : down_) d.res.weight_normalized_convs(out);
  for (const Up& u : up_) {
    for (const ResBlock& r : u.res) r.weight_normalized_convs(out);
  }
  return out;
}

Generator build_generator(const GeneratorConfig& cfg, Rng& rng) { return Generator(cfg, rng); }

std::size_t decoder_receptive_field(const GeneratorConfig& cfg) {
  std::size_t rf = 1, jump = 1;
  rf += 6 * jump;  // output conv
  int res_span = 0;
  for (int k : cfg.decoder_kernels) res_span = std::max(res_span, resblock_span(k, cfg.dilations));
  for (auto it = cfg.up_rates.rbegin(); it != cfg.up_rates.rend(); ++it) {
    rf += static_cast<std::size_t>(res_span) * jump;
    rf += 6 * jump;  // merge conv
    jump *= static_cast<std::size_t>(*it);
    rf += jump;  // kernel 2r at stride r covers two input samples
  }
  return rf;
}

Discriminators::Discriminators(const DiscriminatorConfig& cfg, Rng& rng) : cfg_(cfg) {
  cfg_.validate();
  const int strides[5] = {3, 3, 3, 3, 1};
  for (std::size_t p = 0; p < cfg_.mpd_periods.size(); ++p) {
    Stack s;
    int cin = 1;
    for (int l = 0; l < 5; ++l) {
      nn::Conv2dOptions o;
      o.stride_h = strides[l];
      o.pad_h = 2;
      s.convs.emplace_back(cin, cfg_.mpd_channels[l], 5, 1, o, rng);
      cin = cfg_.mpd_channels[l];
    }
    nn::Conv2dOptions po;
    po.pad_h = 1;
    s.post = nn::Conv2d(cin, 1, 3, 1, po, rng);
    mpd_.push_back(std::move(s));
  }
  for (std::size_t r = 0; r < cfg_.mrd_param_sets.size(); ++r) {
    Stack s;
    int cin = 1;
    for (int l = 0; l < 4; ++l) {
      nn::Conv2dOptions o;
      o.stride_w = l == 0 ? 1 : 2;
      o.pad_h = 1;
      o.pad_w = 4;
      s.convs.emplace_back(cin, cfg_.mrd_channels, 3, 9, o, rng);
      cin = cfg_.mrd_channels;
    }
    nn::Conv2dOptions po;
    po.pad_h = 1;
    po.pad_w = 1;
    s.post = nn::Conv2d(cin, 1, 3, 3, po, rng);
    mrd_.push_back(std::move(s));
  }
}

Var Discriminators::run(const Stack& s, Var h) const {
  for (const nn::Conv2d& c : s.convs) h = nn::leaky_relu(c.forward(h), cfg_.leaky_slope);
  return s.post.forward(h);
}

std::vector<Var> Discriminators::mpd(const Var& x) const {
  const int longest = *std::max_element(cfg_.mpd_periods.begin(), cfg_.mpd_periods.end());
  if (x.value().ndim() != 3 || x.dim(1) != 1 || x.dim(2) < static_cast<std::size_t>(longest)) {
    throw_invalid(fmt::format("mpd: input {} must be [B, 1, T] with T >= {}", nn::shape_str(x.shape()), longest));
  }
  std::vector<Var> out;
  out.reserve(mpd_.size());
  for (std::size_t i = 0; i < mpd_.size(); ++i) out.push_back(run(mpd_[i], nn::period_fold(x, cfg_.mpd_periods[i])));
  return out;
}

std::vector<Var> Discriminators::mrd(const Var& x) const {
  int longest = 0;
  for (const auto& g : cfg_.mrd_param_sets) longest = std::max(longest, g.fft_size);
  if (x.value().ndim() != 3 || x.dim(1) != 1 || x.dim(2) < static_cast<std::size_t>(longest)) {
    throw_invalid(fmt::format("mrd: input {} must be [B, 1, T] with T >= {}", nn::shape_str(x.shape()), longest));
  }
  std::vector<Var> out;
  out.reserve(mrd_.size());
  for (std::size_t i = 0; i < mrd_.size(); ++i) {
    const auto& g = cfg_.mrd_param_sets[i];
    out.push_back(run(mrd_[i], nn::stft_magnitude(x, g.fft_size, g.hop_size, g.win_size)));
  }
  return out;
}

nn::ParamList Discriminators::parameters() const {
  nn::ParamList out;
  auto collect = [&out](const Stack& s, const std::string& prefix) {
    for (std::size_t l = 0; l < s.convs.size(); ++l) s.convs[l].collect(fmt::format("{}.conv.{}", prefix, l), out);
    s.post.collect(prefix + ".post", out);
  };
  for (std::size_t i = 0; i < mpd_.size(); ++i) collect(mpd_[i], fmt::format("mpd.{}", i));
  for (std::size_t i = 0; i < mrd_.size(); ++i) collect(mrd_[i], fmt::format("mrd.{}", i));
  return out;
}

std::size_t Discriminators::parameter_count() const { return count(parameters()); }

namespace {

ScoreSet to_scores(const std::vector<Var>& vars) {
  ScoreSet s;
  for (const Var& v : vars) s.scores.push_back(v.value());
  return s;
}

Var wave_batch(const Waveform& w) { return nn::constant(nn::Tensor({1, 1, w.size()}, w.samples())); }

}  // namespace

ScoreSet mpd_forward(const Discriminators& d, const Waveform& wave) { return to_scores(d.mpd(wave_batch(wave))); }

ScoreSet mrd_forward(const Discriminators& d, const Waveform& wave) { return to_scores(d.mrd(wave_batch(wave))); }

}  // namespace pulsevoc
