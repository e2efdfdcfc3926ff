// Copyright 2026 The pulsevoc Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "pulsevoc/train.h"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

#include "pulsevoc/error.h"
#include "pulsevoc/nn/ops.h"

namespace pulsevoc {

using nn::Var;

namespace {

std::vector<Var> vars_of(const nn::ParamList& params) {
  std::vector<Var> out;
  out.reserve(params.size());
  for (const auto& p : params) out.push_back(p.var);
  return out;
}

void require_finite(double v, const char* what, std::int64_t step) {
  if (!std::isfinite(v)) throw_numerical(fmt::format("non-finite {} ({}) at step {}", what, v, step));
}

}  // namespace

Conditioning extract_conditioning(const Waveform& wave, const FeatureSetup& setup, std::uint64_t noise_seed) {
  Conditioning c;
  c.mel = mel_spectrogram(wave, setup.mel);
  c.pitch = track_pitch(wave, setup.mel.hop_size, setup.fusion, setup.pitch_range);
  TemplateConfig tc = setup.templ;
  tc.rng_seed = noise_seed;
  c.templ = build_template(c.pitch, frame_intensity(c.mel), wave.size(), wave.sample_rate(), tc);
  return c;
}

TrainBatch make_batch(const std::vector<Waveform>& targets, const std::vector<Conditioning>& conds) {
  if (targets.empty() || targets.size() != conds.size()) {
    throw_invalid(fmt::format("make_batch: {} targets and {} conditionings", targets.size(), conds.size()));
  }
  const std::size_t b = targets.size(), len = targets[0].size();
  const std::size_t mels = conds[0].mel.n_mels(), frames = conds[0].mel.n_frames();
  TrainBatch batch;
  batch.sample_rate = targets[0].sample_rate();
  batch.templates = nn::Tensor({b, 1, len});
  batch.targets = nn::Tensor({b, 1, len});
  batch.mels = nn::Tensor({b, mels, frames});
  for (std::size_t i = 0; i < b; ++i) {
    const Conditioning& c = conds[i];
    if (targets[i].size() != len || c.templ.samples.size() != len || c.mel.n_mels() != mels ||
        c.mel.n_frames() != frames || targets[i].sample_rate() != batch.sample_rate) {
      throw_invalid(fmt::format("make_batch: item {} does not match item 0 ({} samples, {}x{} mel)", i, len,
                                mels, frames));
    }
    std::copy(targets[i].samples().begin(), targets[i].samples().end(), batch.targets.data() + i * len);
    std::copy(c.templ.samples.begin(), c.templ.samples.end(), batch.templates.data() + i * len);
    std::copy(c.mel.log_mels.data().begin(), c.mel.log_mels.data().end(), batch.mels.data() + i * mels * frames);
  }
  return batch;
}

ModelState::ModelState(const GeneratorConfig& gen, const DiscriminatorConfig& disc, const nn::AdamConfig& adam,
                       std::uint64_t seed_value)
    : seed(seed_value),
      init_rng_(mix_seed(seed_value, 1)),
      generator(gen, init_rng_),
      discriminators(disc, init_rng_),
      opt_g(vars_of(generator.parameters()), adam),
      opt_d(vars_of(discriminators.parameters()), adam),
      rng(mix_seed(seed_value, 2)) {}

Metrics train_step(ModelState& state, const TrainBatch& batch, const LossSetup& losses) {
  const std::int64_t step = state.step;
  state.opt_g.zero_grad();
  state.opt_d.zero_grad();
  const Var templ = nn::constant(batch.templates);
  const Var mel = nn::constant(batch.mels);
  const Var y = nn::constant(batch.targets);
  const Var y_hat = state.generator.forward(templ, mel);
  const Discriminators& d = state.discriminators;

  const Var fake = y_hat.detach();
  const auto dl = diff::discriminator_loss(d.mpd(y), d.mpd(fake), d.mrd(y), d.mrd(fake));
  require_finite(dl.total.item(), "discriminator loss", step);
  nn::backward(dl.total);
  state.opt_d.step();
  state.opt_d.zero_grad();

  const auto gl = diff::generator_total_loss(y, y_hat, batch.sample_rate, d.mpd(y_hat), d.mrd(y_hat),
                                             losses.weights, losses.mel, losses.envelope);
  require_finite(gl.total.item(), "generator loss", step);
  nn::backward(gl.total);
  state.opt_g.step();
  state.opt_g.zero_grad();
  state.opt_d.zero_grad();
  ++state.step;

  Metrics m;
  m["step"] = static_cast<double>(step);
  m["loss_total"] = gl.total.item();
  m["loss_mel"] = losses.weights.lambda_mel * gl.mel.item();
  m["loss_mel_raw"] = gl.mel.item();
  m["loss_env"] = gl.envelope.item();
  m["loss_adv_g"] = gl.adversarial.item();
  m["loss_d"] = dl.total.item();
  m["loss_mpd"] = dl.mpd.item();
  m["loss_mrd"] = dl.mrd.item();
  return m;
}

double evaluate_discriminator_loss(const ModelState& state, const TrainBatch& batch) {
  const Var y = nn::constant(batch.targets);
  const Var fake = state.generator.forward(nn::constant(batch.templates), nn::constant(batch.mels)).detach();
  const Discriminators& d = state.discriminators;
  return diff::discriminator_loss(d.mpd(y), d.mpd(fake), d.mrd(y), d.mrd(fake)).total.item();
}

TrainBatch sample_batch(ModelState& state, const std::vector<Waveform>& sources, std::size_t batch_size,
                        std::size_t n_slice, const ShiftRange& shift, const LoudnessRange& loudness,
                        const FeatureSetup& features) {
  if (sources.empty()) throw_invalid("sample_batch: no training sources");
  if (batch_size == 0) throw_invalid("sample_batch: batch size must be positive");
  std::vector<Waveform> targets;
  std::vector<Conditioning> conds;
  for (std::size_t b = 0; b < batch_size; ++b) {
    const auto id = static_cast<std::size_t>(uniform_int(state.rng, 0, static_cast<long long>(sources.size()) - 1));
    AugmentedSlice item = make_training_item(sources[id], n_slice, shift, loudness, state.rng, id);
    conds.push_back(extract_conditioning(item.wave, features, state.rng()));
    targets.push_back(std::move(item.wave));
  }
  return make_batch(targets, conds);
}

}  // namespace pulsevoc
