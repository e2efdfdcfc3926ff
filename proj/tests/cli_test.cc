// Copyright 2026 The pulsevoc Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

// Drives the pulsevoc executable end to end and checks outputs and exit codes.

#include <gtest/gtest.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <json.hpp>
#include <sstream>

#include "pulsevoc/config.h"
#include "pulsevoc/pitch.h"
#include "pulsevoc/signal.h"
#include "pulsevoc/wav_io.h"
#include "test_util.h"

namespace pulsevoc {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct RunResult {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const std::string& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("pulsevoc_cli_" + std::to_string(::getpid()) + "_" +
                                        ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  RunResult run(const std::string& args) const {
    const std::string out = path("stdout.txt");
    const std::string err = path("stderr.txt");
    const std::string cmd = std::string("'") + PULSEVOC_CLI_PATH + "' " + args + " >'" + out + "' 2>'" + err + "'";
    const int status = std::system(cmd.c_str());
    RunResult r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
  }

  fs::path dir_;
};

Waveform voiced_clip(std::size_t n, int sr, double f0 = 200.0) {
  std::vector<double> s(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / sr;
    s[i] = 0.4 * std::sin(2.0 * M_PI * f0 * t) * (1.0 + 0.3 * std::sin(2.0 * M_PI * 3.0 * t)) +
           0.1 * std::sin(2.0 * M_PI * 2.0 * f0 * t);
  }
  return Waveform(std::move(s), sr);
}

TEST_F(CliTest, UsageErrorsExitOne) {
  EXPECT_EQ(run("").code, 1);
  EXPECT_EQ(run("frobnicate").code, 1);
  EXPECT_EQ(run("--preset huge scan .").code, 1);
  EXPECT_EQ(run("pitch only_one_arg.wav").code, 1);
  EXPECT_EQ(run("--help").code, 0);
}

TEST_F(CliTest, InvalidConfigExitsOneBeforeTouchingAudio) {
  const RunResult r = run("--set mel.hop_size=0 pitch '" + path("missing.wav") + "' '" + path("f0.txt") + "'");
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("hop_size"), std::string::npos) << r.err;
  std::ofstream(path("bad.toml")) << "[mel]\nhop_sise = 3\n";
  const RunResult r2 = run("--config '" + path("bad.toml") + "' pitch '" + path("missing.wav") + "' x");
  EXPECT_EQ(r2.code, 1);
  EXPECT_NE(r2.err.find("mel.hop_sise"), std::string::npos) << r2.err;
  EXPECT_EQ(run("--config '" + path("none.toml") + "' pitch a b").code, 2);
}

TEST_F(CliTest, ScanEmptyDirectory) {
  fs::create_directories(path("empty"));
  const RunResult r = run("scan '" + path("empty") + "'");
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = json::parse(r.out);
  EXPECT_TRUE(j["files"].is_array());
  EXPECT_TRUE(j["files"].empty());
  EXPECT_TRUE(j["warnings"].empty());
}

TEST_F(CliTest, ScanListsWavsAndWarnsOnCorruptFile) {
  fs::create_directories(path("d"));
  write_wav(path("d/a.wav"), testing::sine(220, 800, 8000, 0.5));
  write_wav(path("d/b.WAV"), testing::sine(220, 1600, 16000, 0.5), WavFormat::kPcm16);
  write_wav(path("d/c.wav"), testing::sine(220, 300, 8000, 0.5), WavFormat::kPcm24);
  std::ofstream(path("d/notes.txt")) << "not audio";
  const RunResult r = run("scan '" + path("d") + "' -o '" + path("m.json") + "'");
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = json::parse(slurp(path("m.json")));
  ASSERT_EQ(j["files"].size(), 3u);
  EXPECT_EQ(j["files"][0]["n_samples"], 800);
  EXPECT_EQ(j["files"][1]["sample_rate"], 16000);
  EXPECT_EQ(j["files"][2]["n_samples"], 300);
  EXPECT_TRUE(j["warnings"].empty());

  const std::string full = slurp(path("d/a.wav"));
  std::ofstream(path("d/z.wav"), std::ios::binary) << full.substr(0, 30);
  const RunResult r2 = run("scan '" + path("d") + "'");
  EXPECT_EQ(r2.code, 0);
  const json j2 = json::parse(r2.out);
  EXPECT_EQ(j2["files"].size(), 3u);
  ASSERT_EQ(j2["warnings"].size(), 1u);
  EXPECT_NE(j2["warnings"][0]["path"].get<std::string>().find("z.wav"), std::string::npos);
  EXPECT_NE(r2.err.find("z.wav"), std::string::npos);

  EXPECT_EQ(run("scan '" + path("nope") + "'").code, 2);
}

TEST_F(CliTest, PitchOfSineAndSilence) {
  write_wav(path("s.wav"), testing::sine(220, 44100, 44100, 0.5));
  ASSERT_EQ(run("pitch '" + path("s.wav") + "' '" + path("s.f0") + "'").code, 0);
  const PitchCurve c = read_pitch(path("s.f0"));
  std::vector<double> voiced;
  for (double f : c.f0) {
    if (f > 0) voiced.push_back(f);
  }
  ASSERT_FALSE(voiced.empty());
  std::nth_element(voiced.begin(), voiced.begin() + voiced.size() / 2, voiced.end());
  EXPECT_NEAR(voiced[voiced.size() / 2], 220.0, 220.0 * 0.02);

  write_wav(path("z.wav"), Waveform(std::vector<double>(22050, 0.0), 44100));
  ASSERT_EQ(run("pitch '" + path("z.wav") + "' '" + path("z.f0") + "'").code, 0);
  for (double f : read_pitch(path("z.f0")).f0) EXPECT_EQ(f, 0.0);

  const RunResult r = run("pitch '" + path("missing.wav") + "' '" + path("m.f0") + "'");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("missing.wav"), std::string::npos) << r.err;
}

TEST_F(CliTest, TemplatePulseSpacingAndDeterminism) {
  write_wav(path("s.wav"), testing::sine(200, 8000, 8000, 0.5));
  ASSERT_EQ(run("--preset toy --seed 4 template '" + path("s.wav") + "' '" + path("t1.wav") + "'").code, 0);
  ASSERT_EQ(run("--preset toy --seed 4 template '" + path("s.wav") + "' '" + path("t2.wav") + "'").code, 0);
  EXPECT_EQ(slurp(path("t1.wav")), slurp(path("t2.wav")));

  const Waveform t = read_wav(path("t1.wav"));
  ASSERT_EQ(t.size(), 8000u);
  const double top = peak(t);
  std::vector<std::size_t> pulses;
  for (std::size_t i = 2000; i < 6000; ++i) {
    if (std::abs(t[i]) > 0.5 * top) pulses.push_back(i);
  }
  ASSERT_GT(pulses.size(), 10u);
  for (std::size_t k = 1; k < pulses.size(); ++k) {
    EXPECT_NEAR(static_cast<double>(pulses[k] - pulses[k - 1]), 40.0, 1.0);
  }

  const RunResult seedless = run("--preset toy template '" + path("s.wav") + "' '" + path("t3.wav") + "'");
  EXPECT_EQ(seedless.code, 0);
  EXPECT_NE(seedless.err.find("seed: "), std::string::npos);
}

TEST_F(CliTest, TemplateOfSilenceIsLowAmplitude) {
  write_wav(path("z.wav"), Waveform(std::vector<double>(4000, 0.0), 8000));
  ASSERT_EQ(run("--preset toy --seed 1 template '" + path("z.wav") + "' '" + path("t.wav") + "'").code, 0);
  EXPECT_LT(peak(read_wav(path("t.wav"))), 0.05);
}

TEST_F(CliTest, AugmentShiftLengthIdentityAndRange) {
  write_wav(path("s.wav"), testing::sine(440, 8000, 8000, 0.5), WavFormat::kPcm16);
  const RunResult r = run("--preset toy --seed 2 augment '" + path("s.wav") + "' '" + path("up.wav") + "' --zeta 12");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NEAR(static_cast<double>(read_wav(path("up.wav")).size()), 4000.0, 1.0);
  EXPECT_EQ(json::parse(r.out)["zeta"], 12);
  EXPECT_EQ(probe_wav(path("up.wav")).format, WavFormat::kPcm16);

  const std::string flat = "--set loudness.r_min=1 --set loudness.r_max=1 ";
  ASSERT_EQ(run("--preset toy --seed 2 " + flat + "augment '" + path("s.wav") + "' '" + path("id.wav") + "' --zeta 0")
                .code,
            0);
  EXPECT_EQ(slurp(path("id.wav")), slurp(path("s.wav")));

  EXPECT_EQ(run("--preset toy augment '" + path("s.wav") + "' '" + path("x.wav") + "' --zeta 13").code, 1);
  EXPECT_EQ(run("--preset toy --seed 1 augment '" + path("nope.wav") + "' '" + path("x.wav") + "'").code, 2);

  const RunResult a = run("--preset toy --seed 9 augment '" + path("s.wav") + "' '" + path("r1.wav") + "'");
  const RunResult b = run("--preset toy --seed 9 augment '" + path("s.wav") + "' '" + path("r2.wav") + "'");
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(slurp(path("r1.wav")), slurp(path("r2.wav")));
}

TEST_F(CliTest, EvalLossesIdentityOffsetAndErrors) {
  const Waveform a = testing::noise(4000, 8000, 3, 0.3);
  write_wav(path("a.wav"), a);
  json j = json::parse(run("--preset toy eval-losses '" + path("a.wav") + "' '" + path("a.wav") + "'").out);
  EXPECT_EQ(j["mel"], 0.0);
  EXPECT_EQ(j["envelope"], 0.0);

  std::vector<double> shifted = a.samples();
  for (auto& v : shifted) v = static_cast<float>(v + 0.1);
  write_wav(path("b.wav"), Waveform(shifted, 8000));
  j = json::parse(run("--preset toy eval-losses '" + path("a.wav") + "' '" + path("b.wav") + "'").out);
  EXPECT_NEAR(j["envelope"].get<double>(), 0.2, 1e-4);
  EXPECT_GT(j["mel"].get<double>(), 0.0);

  write_wav(path("short.wav"), testing::noise(3000, 8000, 4, 0.3));
  EXPECT_EQ(run("--preset toy eval-losses '" + path("a.wav") + "' '" + path("short.wav") + "'").code, 1);
  write_wav(path("rate.wav"), testing::noise(4000, 16000, 4, 0.3));
  EXPECT_EQ(run("--preset toy eval-losses '" + path("a.wav") + "' '" + path("rate.wav") + "'").code, 1);
}

class CliTrainTest : public CliTest {
 protected:
  void make_manifest() {
    fs::create_directories(path("clips"));
    write_wav(path("clips/v.wav"), voiced_clip(8000, 8000));
    ASSERT_EQ(run("scan '" + path("clips") + "' -o '" + path("m.json") + "'").code, 0);
  }
  static std::vector<json> metrics(const std::string& p) {
    std::vector<json> rows;
    std::istringstream in(slurp(p));
    std::string line;
    while (std::getline(in, line)) rows.push_back(json::parse(line));
    return rows;
  }
};

TEST_F(CliTrainTest, TenStepsThenResumeMatchesUninterrupted) {
  make_manifest();
  const std::string base = "--preset toy --seed 11 --set training.checkpoint_every=5 ";
  RunResult r = run(base + "--set training.steps=10 train-toy '" + path("m.json") + "' '" + path("full") + "'");
  ASSERT_EQ(r.code, 0) << r.err;
  const auto full = metrics(path("full/metrics.jsonl"));
  ASSERT_EQ(full.size(), 10u);
  for (const auto& row : full) {
    for (const auto& [k, v] : row.items()) EXPECT_TRUE(std::isfinite(v.get<double>())) << k;
  }
  EXPECT_TRUE(fs::exists(path("full/ckpt_000005.bin")));
  EXPECT_TRUE(fs::exists(path("full/latest.bin")));

  r = run(base + "--set training.steps=5 train-toy '" + path("m.json") + "' '" + path("part") + "'");
  ASSERT_EQ(r.code, 0) << r.err;
  r = run("--preset toy --set training.steps=10 train-toy '" + path("m.json") + "' '" + path("part") +
          "' --resume '" + path("part/latest.bin") + "'");
  ASSERT_EQ(r.code, 0) << r.err;
  const auto resumed = metrics(path("part/metrics.jsonl"));
  ASSERT_EQ(resumed.size(), 10u);
  for (std::size_t i = 0; i < 10; ++i) EXPECT_EQ(resumed[i], full[i]) << "step " << i + 1;
  EXPECT_EQ(slurp(path("part/latest.bin")), slurp(path("full/latest.bin")));
}

TEST_F(CliTrainTest, TrainErrors) {
  EXPECT_EQ(run("--preset toy train-toy '" + path("missing.json") + "' '" + path("o") + "'").code, 2);
  std::ofstream(path("bad.json")) << "{not json";
  EXPECT_EQ(run("--preset toy train-toy '" + path("bad.json") + "' '" + path("o") + "'").code, 2);
  std::ofstream(path("empty.json")) << "{\"files\": [], \"warnings\": []}";
  EXPECT_EQ(run("--preset toy train-toy '" + path("empty.json") + "' '" + path("o") + "'").code, 1);
  make_manifest();
  EXPECT_EQ(run("--preset toy --set training.batch_size=0 train-toy '" + path("m.json") + "' '" + path("o") + "'").code,
            1);
  // Parameters overflow after the first update.
  const RunResult blowup = run("--preset toy --seed 3 --set training.steps=5 --set training.lr=1e300 train-toy '" +
                               path("m.json") + "' '" + path("o") + "'");
  EXPECT_EQ(blowup.code, 3);
  EXPECT_NE(blowup.err.find("non-finite"), std::string::npos) << blowup.err;
  std::ofstream(path("junk.bin")) << "junk";
  EXPECT_EQ(run("--preset toy train-toy '" + path("m.json") + "' '" + path("o") + "' --resume '" + path("junk.bin") +
                "'")
                .code,
            2);
}

TEST_F(CliTrainTest, CopySynthTruncatesToHopMultiple) {
  make_manifest();
  ASSERT_EQ(run("--preset toy --seed 5 --set training.steps=2 train-toy '" + path("m.json") + "' '" + path("o") + "'")
                .code,
            0);
  const std::string ckpt = path("o/latest.bin");
  const int hop = 4;
  for (std::size_t n : {std::size_t{1203}, std::size_t{2000}, std::size_t{3331}}) {
    write_wav(path("in.wav"), voiced_clip(n, 8000, 150.0));
    const RunResult r = run("--seed 1 copy-synth '" + path("in.wav") + "' '" + ckpt + "' '" + path("out.wav") + "'");
    ASSERT_EQ(r.code, 0) << r.err;
    const Waveform out = read_wav(path("out.wav"));
    EXPECT_EQ(out.size(), n / hop * hop);
    EXPECT_EQ(out.sample_rate(), 8000);
  }
  std::ofstream(path("bad.bin")) << "PVCKPT";
  EXPECT_EQ(run("copy-synth '" + path("in.wav") + "' '" + path("bad.bin") + "' '" + path("x.wav") + "'").code, 2);
  EXPECT_EQ(run("copy-synth '" + path("in.wav") + "' '" + path("none.bin") + "' '" + path("x.wav") + "'").code, 2);
  write_wav(path("tiny.wav"), Waveform({0.1, 0.2}, 8000));
  EXPECT_EQ(run("copy-synth '" + path("tiny.wav") + "' '" + ckpt + "' '" + path("x.wav") + "'").code, 1);
}

TEST_F(CliTest, DumpSpecMatchesLibrary) {
  const Waveform w = testing::noise(3000, 8000, 6, 0.4);
  write_wav(path("n.wav"), w);
  const RunResult r = run("--preset toy dump-spec '" + path("n.wav") + "' '" + path("s.csv") + "' --fft 128 --hop 32 --win 96");
  ASSERT_EQ(r.code, 0) << r.err;
  MelParamSet p = RunConfig::toy().mel;
  p.fft_size = 128;
  p.hop_size = 32;
  p.win_size = 96;
  const MelSpectrogram mel = mel_spectrogram(read_wav(path("n.wav")), p);

  std::istringstream csv(slurp(path("s.csv")));
  std::string line;
  ASSERT_TRUE(std::getline(csv, line));
  std::string expected_header = "frame";
  for (std::size_t m = 0; m < mel.n_mels(); ++m) expected_header += ",mel_" + std::to_string(m);
  EXPECT_EQ(line, expected_header);
  std::size_t rows = 0;
  while (std::getline(csv, line)) {
    std::istringstream row(line);
    std::string cell;
    std::getline(row, cell, ',');
    EXPECT_EQ(std::stoul(cell), rows);
    for (std::size_t m = 0; m < mel.n_mels(); ++m) {
      ASSERT_TRUE(std::getline(row, cell, ','));
      EXPECT_NEAR(std::stod(cell), mel.log_mels(m, rows), 1e-6);
    }
    ++rows;
  }
  EXPECT_EQ(rows, mel.n_frames());

  EXPECT_EQ(run("--preset toy dump-spec '" + path("n.wav") + "' '" + path("s.csv") + "' --fft 64 --win 96").code, 1);
  EXPECT_EQ(run("--preset toy dump-spec '" + path("n.wav") + "' '" + path("nodir/s.csv") + "'").code, 2);
}

}  // namespace
}  // namespace pulsevoc
