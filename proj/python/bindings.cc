// Copyright 2026 The pulsevoc Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

// Python surface over the signal, pitch, template, augmentation and loss
// modules plus checkpoint-driven copy-synthesis. Audio crosses the boundary as
// 1-D float64 arrays with an explicit sample rate.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <vector>

#include "pulsevoc/augment.h"
#include "pulsevoc/checkpoint.h"
#include "pulsevoc/config.h"
#include "pulsevoc/error.h"
#include "pulsevoc/losses.h"
#include "pulsevoc/pitch.h"
#include "pulsevoc/signal.h"
#include "pulsevoc/speech_template.h"
#include "pulsevoc/train.h"
#include "pulsevoc/wav_io.h"

namespace py = pybind11;
using namespace pulsevoc;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;
using OutArray = py::array_t<double>;

Waveform to_wave(const Array& a, int sample_rate) {
  if (a.ndim() != 1) throw_invalid("audio must be a 1-D array");
  const double* p = a.data();
  return Waveform(std::vector<double>(p, p + a.size()), sample_rate);
}

OutArray to_array(const std::vector<double>& v) {
  OutArray out(std::vector<py::ssize_t>{static_cast<py::ssize_t>(v.size())});
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

OutArray to_array(const Matrix& m) {
  OutArray out(std::vector<py::ssize_t>{static_cast<py::ssize_t>(m.rows()), static_cast<py::ssize_t>(m.cols())});
  std::copy(m.data().begin(), m.data().end(), out.mutable_data());
  return out;
}

RunConfig config_or_default(const std::optional<RunConfig>& cfg) {
  return cfg ? *cfg : RunConfig::full_band();
}

}  // namespace

PYBIND11_MODULE(_pulsevoc, m) {
  m.doc() = "Pitch-driven neural vocoder toolkit";

  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      switch (e.code()) {
        case ErrorCode::kIo:
          PyErr_SetString(PyExc_OSError, e.what());
          return;
        case ErrorCode::kNumerical:
          PyErr_SetString(PyExc_ArithmeticError, e.what());
          return;
        case ErrorCode::kInvalidArgument:
          PyErr_SetString(PyExc_ValueError, e.what());
          return;
      }
    }
  });

  py::class_<RunConfig>(m, "Config", "Run configuration; every section is validated on use.")
      .def(py::init([](const std::string& name) { return preset(name); }), py::arg("preset") = "default")
      .def_static(
          "from_toml", [](const std::string& text, const std::string& base) { return parse_config(text, preset(base)); },
          py::arg("text"), py::arg("preset") = "default")
      .def("set", [](RunConfig& c, const std::string& a) { apply_override(c, a); }, py::arg("assignment"),
           "Apply one 'section.key=value' override.")
      .def("validate", &RunConfig::validate)
      .def("to_toml", [](const RunConfig& c) { return to_toml(c); })
      .def_readonly("sample_rate", &RunConfig::sample_rate)
      .def("__repr__", [](const RunConfig& c) { return "<pulsevoc.Config sample_rate=" + std::to_string(c.sample_rate) + ">"; });

  m.def(
      "read_wav",
      [](const std::string& path) {
        const Waveform w = read_wav(path);
        return py::make_tuple(to_array(w.samples()), w.sample_rate());
      },
      py::arg("path"), "Return (samples, sample_rate); multichannel files yield channel 0.");
  m.def(
      "write_wav", [](const std::string& path, const Array& x, int sr) { write_wav(path, to_wave(x, sr)); },
      py::arg("path"), py::arg("samples"), py::arg("sample_rate"), "Write 32-bit float WAV.");

  m.def(
      "resample", [](const Array& x, int sr, int target) { return to_array(kaiser_resample(to_wave(x, sr), target).samples()); },
      py::arg("samples"), py::arg("sample_rate"), py::arg("target_rate"));

  m.def(
      "mel_spectrogram",
      [](const Array& x, int sr, int fft, int hop, int win, int n_mels, double f_min, std::optional<double> f_max) {
        MelParamSet p{fft, win, hop, n_mels, f_min, f_max ? *f_max : sr / 2.0};
        return to_array(mel_spectrogram(to_wave(x, sr), p).log_mels);
      },
      py::arg("samples"), py::arg("sample_rate"), py::arg("fft_size") = 2048, py::arg("hop_size") = 256,
      py::arg("win_size") = 2048, py::arg("n_mels") = 128, py::arg("f_min") = 20.0, py::arg("f_max") = py::none(),
      "Log-mel spectrogram of shape [n_mels, len // hop + 1].");

  m.def(
      "track_pitch",
      [](const Array& x, int sr, const std::optional<RunConfig>& cfg) {
        const RunConfig c = config_or_default(cfg);
        return to_array(track_pitch(to_wave(x, sr), c.mel.hop_size, c.fusion, c.pitch_range).f0);
      },
      py::arg("samples"), py::arg("sample_rate"), py::arg("config") = py::none(),
      "Fused f0 per mel frame; 0 marks unvoiced frames.");

  m.def(
      "speech_template",
      [](const Array& x, int sr, std::uint64_t seed, const std::optional<RunConfig>& cfg) {
        const RunConfig c = config_or_default(cfg);
        return to_array(extract_conditioning(to_wave(x, sr), c.features(), seed).templ.samples);
      },
      py::arg("samples"), py::arg("sample_rate"), py::arg("seed") = 0, py::arg("config") = py::none(),
      "Pulse-plus-noise template of the same length as the input.");

  m.def(
      "pitch_shift", [](const Array& x, int sr, int zeta) { return to_array(pitch_shift(to_wave(x, sr), zeta).samples()); },
      py::arg("samples"), py::arg("sample_rate"), py::arg("zeta"),
      "Resample by 2^(-zeta/12); the result has round(n * 2^(-zeta/12)) samples.");

  m.def(
      "loudness_augment",
      [](const Array& x, std::uint64_t seed, double p_min, double p_max, double r_min, double r_max) {
        Rng rng(seed);
        auto [w, gain] = loudness_augment(to_wave(x, 1), LoudnessRange{p_min, p_max, r_min, r_max}, rng);
        return py::make_tuple(to_array(w.samples()), gain);
      },
      py::arg("samples"), py::arg("seed"), py::arg("p_min") = 0.1, py::arg("p_max") = 1.0, py::arg("r_min") = 0.5,
      py::arg("r_max") = 2.0, "Return (rescaled samples, gain).");

  m.def(
      "multi_mel_loss",
      [](const Array& y, const Array& y_hat, int sr, const std::optional<RunConfig>& cfg) {
        return multi_mel_loss(to_wave(y, sr), to_wave(y_hat, sr), config_or_default(cfg).mel_loss);
      },
      py::arg("y"), py::arg("y_hat"), py::arg("sample_rate"), py::arg("config") = py::none());
  m.def(
      "envelope_loss",
      [](const Array& y, const Array& y_hat, int win, int hop) {
        return envelope_loss(to_wave(y, 1), to_wave(y_hat, 1), win, hop);
      },
      py::arg("y"), py::arg("y_hat"), py::arg("win_size") = 512, py::arg("hop_size") = 256);

  m.def(
      "copy_synth",
      [](const Array& x, int sr, const std::string& checkpoint, std::uint64_t seed) {
        const CheckpointHeader h = read_checkpoint_header(checkpoint);
        RunConfig cfg = parse_config(h.config_text, RunConfig::full_band());
        cfg.validate();
        ModelState state(cfg.generator, cfg.discriminator, cfg.adam(), h.seed);
        load_checkpoint(checkpoint, state);
        Waveform w = to_wave(x, sr);
        if (sr != cfg.sample_rate) w = kaiser_resample(w, cfg.sample_rate);
        const std::size_t hop = static_cast<std::size_t>(cfg.mel.hop_size);
        const std::size_t len = w.size() / hop * hop;
        if (len == 0) throw_invalid("input is shorter than one hop");
        const Waveform cut(std::vector<double>(w.samples().begin(), w.samples().begin() + len), w.sample_rate());
        const Conditioning c = extract_conditioning(cut, cfg.features(), seed);
        return to_array(state.generator.synthesize(c.templ, c.mel).samples());
      },
      py::arg("samples"), py::arg("sample_rate"), py::arg("checkpoint"), py::arg("seed") = 0,
      "Resynthesize through a trained generator; output length is truncated to a hop multiple.");
}
