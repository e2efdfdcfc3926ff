// Copyright 2026 The pulsevoc Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "commands.h"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <random>

#include "pulsevoc/augment.h"
#include "pulsevoc/checkpoint.h"
#include "pulsevoc/error.h"
#include "pulsevoc/losses.h"
#include "pulsevoc/pitch.h"
#include "pulsevoc/signal.h"
#include "pulsevoc/speech_template.h"
#include "pulsevoc/train.h"
#include "pulsevoc/wav_io.h"

namespace pulsevoc::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Seeds stay below 2^63 so they survive the integer config format.
constexpr std::uint64_t kSeedMask = (1ULL << 63) - 1;

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw_io(fmt::format("cannot write '{}'", path));
  out << text;
  if (!out) throw_io(fmt::format("failed writing '{}'", path));
}

// Resamples to the configured rate when the file differs.
Waveform read_at_rate(const std::string& path, int sample_rate) {
  Waveform w = read_wav(path);
  if (w.sample_rate() != sample_rate) {
    std::cerr << fmt::format("note: resampling {} from {} Hz to {} Hz\n", path, w.sample_rate(), sample_rate);
    w = kaiser_resample(w, sample_rate);
  }
  return w;
}

json metrics_json(const Metrics& m) {
  json j;
  for (const auto& [k, v] : m) {
    if (k == "step") {
      j[k] = static_cast<std::int64_t>(v);
    } else {
      j[k] = v;
    }
  }
  return j;
}

}  // namespace

RunConfig resolve_config(const GlobalOptions& g) {
  RunConfig cfg = preset(g.preset);
  if (!g.config_path.empty()) cfg = load_config(g.config_path, cfg);
  for (const auto& o : g.overrides) apply_override(cfg, o);
  cfg.validate();
  return cfg;
}

std::uint64_t resolve_seed(const GlobalOptions& g, const RunConfig& cfg) {
  if (g.seed) return *g.seed & kSeedMask;
  if (cfg.training.seed) return *cfg.training.seed & kSeedMask;
  std::random_device rd;
  const std::uint64_t seed = ((static_cast<std::uint64_t>(rd()) << 32) ^ rd()) & kSeedMask;
  std::cerr << "seed: " << seed << "\n";
  return seed;
}

int cmd_scan(const GlobalOptions&, const std::string& dir, const std::string& out_path) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw_io(fmt::format("cannot read directory '{}'", dir));
  std::vector<fs::path> paths;
  for (fs::directory_iterator it(dir, ec), end; !ec && it != end; it.increment(ec)) {
    if (!it->is_regular_file()) continue;
    std::string ext = it->path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".wav") paths.push_back(fs::absolute(it->path()).lexically_normal());
  }
  if (ec) throw_io(fmt::format("cannot list directory '{}': {}", dir, ec.message()));
  std::sort(paths.begin(), paths.end());

  json files = json::array();
  json warnings = json::array();
  for (const auto& p : paths) {
    try {
      const Waveform w = read_wav(p.string());
      files.push_back({{"path", p.string()},
                       {"sample_rate", w.sample_rate()},
                       {"n_samples", w.size()},
                       {"duration", w.duration()}});
    } catch (const Error& e) {
      warnings.push_back({{"path", p.string()}, {"error", e.what()}});
    }
  }
  const json manifest = {{"files", files}, {"warnings", warnings}};
  const std::string text = manifest.dump(2) + "\n";
  if (out_path.empty()) {
    std::cout << text;
  } else {
    write_text(out_path, text);
  }
  for (const auto& w : warnings) std::cerr << "warning: " << w["path"].get<std::string>() << ": "
                                           << w["error"].get<std::string>() << "\n";
  return 0;
}

int cmd_pitch(const GlobalOptions& g, const std::string& in, const std::string& out) {
  const RunConfig cfg = resolve_config(g);
  const Waveform w = read_at_rate(in, cfg.sample_rate);
  write_pitch(out, track_pitch(w, cfg.mel.hop_size, cfg.fusion, cfg.pitch_range));
  return 0;
}

int cmd_template(const GlobalOptions& g, const std::string& in, const std::string& out) {
  const RunConfig cfg = resolve_config(g);
  const std::uint64_t seed = resolve_seed(g, cfg);
  const Waveform w = read_at_rate(in, cfg.sample_rate);
  const Conditioning c = extract_conditioning(w, cfg.features(), seed);
  write_wav(out, c.templ.to_waveform());
  return 0;
}

int cmd_augment(const GlobalOptions& g, const std::string& in, const std::string& out, std::optional<int> zeta) {
  const RunConfig cfg = resolve_config(g);
  if (zeta && (*zeta < cfg.shift.zeta_min || *zeta > cfg.shift.zeta_max)) {
    throw_invalid(fmt::format("--zeta {} outside shift range [{}, {}]", *zeta, cfg.shift.zeta_min,
                              cfg.shift.zeta_max));
  }
  const std::uint64_t seed = resolve_seed(g, cfg);
  Rng rng(mix_seed(seed, 0xa0));
  const int z = zeta ? *zeta : sample_shift(rng, cfg.shift);
  const WavInfo info = probe_wav(in);
  Waveform w = pitch_shift(read_wav(in), z);
  double gain = 1.0;
  if (peak(w) > 0.0) {
    auto [scaled, applied] = loudness_augment(w, cfg.loudness, rng);
    w = std::move(scaled);
    gain = applied;
  }
  write_wav(out, w, info.format);
  std::cout << json{{"zeta", z}, {"gain", gain}, {"samples", w.size()}}.dump() << "\n";
  return 0;
}

int cmd_eval_losses(const GlobalOptions& g, const std::string& a, const std::string& b) {
  const RunConfig cfg = resolve_config(g);
  const Waveform wa = read_wav(a);
  const Waveform wb = read_wav(b);
  if (wa.sample_rate() != wb.sample_rate()) {
    throw_invalid(fmt::format("sample rates differ: {} Hz vs {} Hz", wa.sample_rate(), wb.sample_rate()));
  }
  cfg.mel_loss.validate(wa.sample_rate());
  const double mel = multi_mel_loss(wa, wb, cfg.mel_loss);
  const double env = envelope_loss(wa, wb, cfg.envelope.win_size, cfg.envelope.hop_size);
  if (!std::isfinite(mel) || !std::isfinite(env)) {
    throw_numerical(fmt::format("non-finite loss (mel {}, envelope {})", mel, env));
  }
  std::cout << json{{"mel", mel}, {"envelope", env}}.dump() << "\n";
  return 0;
}

int cmd_train_toy(const GlobalOptions& g, const std::string& manifest, const std::string& out_dir,
                  const std::string& resume) {
  RunConfig cfg = resolve_config(g);
  if (!resume.empty()) {
    // The checkpoint's architecture wins; the step budget may still be raised.
    const CheckpointHeader h = read_checkpoint_header(resume);
    const int steps = cfg.training.steps;
    cfg = parse_config(h.config_text, RunConfig::full_band());
    cfg.training.steps = steps;
    cfg.validate();
  }
  std::ifstream mf(manifest);
  if (!mf) throw_io(fmt::format("cannot open manifest '{}'", manifest));
  json doc;
  try {
    mf >> doc;
  } catch (const json::exception& e) {
    throw_io(fmt::format("malformed manifest '{}': {}", manifest, e.what()));
  }
  if (!doc.is_object() || !doc.contains("files") || !doc["files"].is_array()) {
    throw_io(fmt::format("manifest '{}' has no 'files' array", manifest));
  }
  const auto n_slice = static_cast<std::size_t>(cfg.training.segment_samples);
  const std::size_t need = std::max(required_source_length(n_slice, cfg.shift.zeta_min),
                                    required_source_length(n_slice, cfg.shift.zeta_max));
  std::vector<Waveform> sources;
  for (const auto& f : doc["files"]) {
    const std::string path = f.at("path").get<std::string>();
    Waveform w = read_at_rate(path, cfg.sample_rate);
    if (w.size() < need) {
      std::cerr << fmt::format("warning: skipping {} ({} samples < {} needed)\n", path, w.size(), need);
      continue;
    }
    sources.push_back(std::move(w));
  }
  if (sources.empty()) throw_invalid(fmt::format("manifest '{}' has no usable clips of >= {} samples", manifest, need));

  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw_io(fmt::format("cannot create '{}': {}", out_dir, ec.message()));

  const std::uint64_t seed = resolve_seed(g, cfg);
  ModelState state(cfg.generator, cfg.discriminator, cfg.adam(), seed);
  if (!resume.empty()) load_checkpoint(resume, state);
  cfg.training.seed = state.seed;
  const std::string config_text = to_toml(cfg);

  const std::string metrics_path = (fs::path(out_dir) / "metrics.jsonl").string();
  std::ofstream metrics(metrics_path, resume.empty() ? std::ios::trunc : std::ios::app);
  if (!metrics) throw_io(fmt::format("cannot write '{}'", metrics_path));
  const FeatureSetup features = cfg.features();
  const LossSetup losses = cfg.losses();
  auto checkpoint = [&]() {
    save_checkpoint((fs::path(out_dir) / fmt::format("ckpt_{:06d}.bin", state.step)).string(), state, config_text);
    save_checkpoint((fs::path(out_dir) / "latest.bin").string(), state, config_text);
  };
  while (state.step < cfg.training.steps) {
    const TrainBatch batch = sample_batch(state, sources, cfg.training.batch_size, n_slice, cfg.shift,
                                          cfg.loudness, features);
    const Metrics m = train_step(state, batch, losses);
    metrics << metrics_json(m).dump() << "\n" << std::flush;
    if (state.step % cfg.training.checkpoint_every == 0) checkpoint();
  }
  checkpoint();
  std::cout << json{{"steps", state.step}, {"seed", state.seed}, {"metrics", metrics_path}}.dump() << "\n";
  return 0;
}

int cmd_copy_synth(const GlobalOptions& g, const std::string& in, const std::string& checkpoint,
                   const std::string& out) {
  const CheckpointHeader h = read_checkpoint_header(checkpoint);
  RunConfig cfg = parse_config(h.config_text, RunConfig::full_band());
  cfg.validate();
  const std::uint64_t seed = resolve_seed(g, RunConfig{});
  ModelState state(cfg.generator, cfg.discriminator, cfg.adam(), h.seed);
  load_checkpoint(checkpoint, state);

  const Waveform w = read_at_rate(in, cfg.sample_rate);
  const std::size_t hop = static_cast<std::size_t>(cfg.mel.hop_size);
  const std::size_t len = w.size() / hop * hop;
  if (len == 0) throw_invalid(fmt::format("'{}' is shorter than one hop ({} samples)", in, hop));
  const Waveform cut(std::vector<double>(w.samples().begin(), w.samples().begin() + len), w.sample_rate());
  const Conditioning c = extract_conditioning(cut, cfg.features(), seed);
  write_wav(out, state.generator.synthesize(c.templ, c.mel));
  return 0;
}

int cmd_dump_spec(const GlobalOptions& g, const std::string& in, const std::string& out, int fft, int hop, int win) {
  const RunConfig cfg = resolve_config(g);
  MelParamSet p = cfg.mel;
  if (fft > 0) p.fft_size = fft;
  if (hop > 0) p.hop_size = hop;
  if (win > 0) p.win_size = win;
  const Waveform w = read_wav(in);
  if (p.f_max > w.sample_rate() / 2.0) p.f_max = w.sample_rate() / 2.0;
  p.validate(w.sample_rate());
  const MelSpectrogram mel = mel_spectrogram(w, p);
  std::ofstream csv(out, std::ios::trunc);
  if (!csv) throw_io(fmt::format("cannot write '{}'", out));
  csv << "frame";
  for (std::size_t m = 0; m < mel.n_mels(); ++m) csv << ",mel_" << m;
  csv << "\n";
  for (std::size_t t = 0; t < mel.n_frames(); ++t) {
    csv << t;
    for (std::size_t m = 0; m < mel.n_mels(); ++m) csv << fmt::format(",{:.9g}", mel.log_mels(m, t));
    csv << "\n";
  }
  if (!csv) throw_io(fmt::format("failed writing '{}'", out));
  return 0;
}

}  // namespace pulsevoc::cli
