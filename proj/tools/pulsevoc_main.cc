// Copyright 2026 The pulsevoc Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

// pulsevoc: feature extraction, augmentation, loss evaluation, toy training
// and copy-synthesis from the command line.
//
// Exit codes: 0 success, 1 usage or config error, 2 I/O error, 3 numerical
// failure.

#include <CLI11.hpp>
#include <iostream>

#include "commands.h"
#include "pulsevoc/error.h"

int main(int argc, char** argv) {
  using namespace pulsevoc;
  CLI::App app{"pulsevoc: pitch-driven neural vocoder toolkit"};
  app.require_subcommand(1);

  cli::GlobalOptions g;
  std::uint64_t seed = 0;
  app.add_option("--preset", g.preset, "Base preset: default (44.1 kHz) or toy (8 kHz)")
      ->check(CLI::IsMember({"default", "toy"}));
  app.add_option("--config", g.config_path, "TOML-style config file applied over the preset");
  app.add_option("--set", g.overrides, "Override as section.key=value (repeatable)");
  auto* seed_opt = app.add_option("--seed", seed, "Seed for every random draw");

  std::string a, b, c;
  std::optional<int> zeta;
  int zeta_value = 0;
  int fft = 0, hop = 0, win = 0;
  std::string resume, out_path;

  auto* scan = app.add_subcommand("scan", "List WAV files of a directory as a JSON manifest");
  scan->add_option("dir", a, "Directory to scan")->required();
  scan->add_option("-o,--output", out_path, "Manifest path (stdout when omitted)");

  auto* pitch = app.add_subcommand("pitch", "Write the fused pitch curve as two-column text");
  pitch->add_option("input", a, "Input WAV")->required();
  pitch->add_option("output", b, "Output f0 text")->required();

  auto* templ = app.add_subcommand("template", "Write the speech template of a recording");
  templ->add_option("input", a, "Input WAV")->required();
  templ->add_option("output", b, "Output WAV")->required();

  auto* augment = app.add_subcommand("augment", "Pitch-shift and loudness-augment a recording");
  augment->add_option("input", a, "Input WAV")->required();
  augment->add_option("output", b, "Output WAV")->required();
  auto* zeta_opt = augment->add_option("--zeta", zeta_value, "Semitone shift (random when omitted)");

  auto* eval = app.add_subcommand("eval-losses", "Print multi-resolution mel and envelope losses as JSON");
  eval->add_option("reference", a, "Reference WAV")->required();
  eval->add_option("estimate", b, "Estimate WAV")->required();

  auto* train = app.add_subcommand("train-toy", "Train on a manifest, writing metrics and checkpoints");
  train->add_option("manifest", a, "Manifest JSON from 'scan'")->required();
  train->add_option("out_dir", b, "Output directory")->required();
  train->add_option("--resume", resume, "Checkpoint to continue from");

  auto* copy = app.add_subcommand("copy-synth", "Resynthesize a recording through a trained generator");
  copy->add_option("input", a, "Input WAV")->required();
  copy->add_option("checkpoint", b, "Checkpoint file")->required();
  copy->add_option("output", c, "Output WAV")->required();

  auto* dump = app.add_subcommand("dump-spec", "Write the log-mel spectrogram as CSV");
  dump->add_option("input", a, "Input WAV")->required();
  dump->add_option("output", b, "Output CSV")->required();
  dump->add_option("--fft", fft, "FFT size (config mel.fft_size when omitted)");
  dump->add_option("--hop", hop, "Hop size (config mel.hop_size when omitted)");
  dump->add_option("--win", win, "Window size (config mel.win_size when omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  if (*seed_opt) g.seed = seed;
  if (*zeta_opt) zeta = zeta_value;

  try {
    if (*scan) return cli::cmd_scan(g, a, out_path);
    if (*pitch) return cli::cmd_pitch(g, a, b);
    if (*templ) return cli::cmd_template(g, a, b);
    if (*augment) return cli::cmd_augment(g, a, b, zeta);
    if (*eval) return cli::cmd_eval_losses(g, a, b);
    if (*train) return cli::cmd_train_toy(g, a, b, resume);
    if (*copy) return cli::cmd_copy_synth(g, a, b, c);
    if (*dump) return cli::cmd_dump_spec(g, a, b, fft, hop, win);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
