// Copyright 2026 The pulsevoc Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "pulsevoc/config.h"

#include <fmt/format.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "pulsevoc/error.h"

namespace pulsevoc {

namespace {

// ---- TOML subset -----------------------------------------------------------

struct Value {
  enum class Kind { kInt, kFloat, kBool, kString, kArray };
  Kind kind = Kind::kInt;
  long long i = 0;
  double f = 0.0;
  bool b = false;
  std::string s;
  std::vector<Value> items;
};

class Parser {
 public:
  explicit Parser(const std::string& text) : text_(text) {}

  // Calls sink(section, key, value, line) per assignment in file order.
  void run(const std::function<void(const std::string&, const std::string&, const Value&, int)>& sink) {
    std::string section;
    while (true) {
      skip_blank_lines();
      if (pos_ >= text_.size()) break;
      const int line = line_;
      if (text_[pos_] == '[') {
        ++pos_;
        section = identifier();
        skip_inline_space();
        expect(']');
        end_of_line();
        continue;
      }
      const std::string key = identifier();
      skip_inline_space();
      expect('=');
      skip_inline_space();
      Value v = value();
      end_of_line();
      sink(section, key, v, line);
    }
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw_invalid(fmt::format("config line {}: {}", line_, what));
  }

  void skip_inline_space() {
    while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t' || text_[pos_] == '\r')) ++pos_;
  }

  void skip_comment() {
    if (pos_ < text_.size() && text_[pos_] == '#') {
      while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
    }
  }

  void skip_blank_lines() {
    while (pos_ < text_.size()) {
      skip_inline_space();
      skip_comment();
      if (pos_ < text_.size() && text_[pos_] == '\n') {
        ++pos_;
        ++line_;
      } else {
        break;
      }
    }
  }

  // Whitespace, comments and newlines inside arrays.
  void skip_any_space() {
    while (pos_ < text_.size()) {
      skip_inline_space();
      skip_comment();
      if (pos_ < text_.size() && text_[pos_] == '\n') {
        ++pos_;
        ++line_;
      } else {
        break;
      }
    }
  }

  void end_of_line() {
    skip_inline_space();
    skip_comment();
    if (pos_ < text_.size()) {
      if (text_[pos_] != '\n') fail(fmt::format("unexpected '{}'", text_[pos_]));
      ++pos_;
      ++line_;
    }
  }

  void expect(char c) {
    if (pos_ >= text_.size() || text_[pos_] != c) fail(fmt::format("expected '{}'", c));
    ++pos_;
  }

  std::string identifier() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
      ++pos_;
    }
    if (pos_ == start) fail("expected a name");
    return text_.substr(start, pos_ - start);
  }

  Value value() {
    if (pos_ >= text_.size()) fail("missing value");
    const char c = text_[pos_];
    Value v;
    if (c == '[') {
      ++pos_;
      v.kind = Value::Kind::kArray;
      skip_any_space();
      if (pos_ < text_.size() && text_[pos_] == ']') {
        ++pos_;
        return v;
      }
      while (true) {
        skip_any_space();
        v.items.push_back(value());
        skip_any_space();
        if (pos_ < text_.size() && text_[pos_] == ',') {
          ++pos_;
          skip_any_space();
          if (pos_ < text_.size() && text_[pos_] == ']') {
            ++pos_;
            return v;
          }
          continue;
        }
        expect(']');
        return v;
      }
    }
    if (c == '"') {
      ++pos_;
      v.kind = Value::Kind::kString;
      while (pos_ < text_.size() && text_[pos_] != '"' && text_[pos_] != '\n') v.s += text_[pos_++];
      expect('"');
      return v;
    }
    const std::size_t start = pos_;
    while (pos_ < text_.size() && !std::isspace(static_cast<unsigned char>(text_[pos_])) && text_[pos_] != ',' &&
           text_[pos_] != ']' && text_[pos_] != '#') {
      ++pos_;
    }
    const std::string tok = text_.substr(start, pos_ - start);
    if (tok == "true" || tok == "false") {
      v.kind = Value::Kind::kBool;
      v.b = tok == "true";
      return v;
    }
    std::string digits;
    for (char ch : tok) {
      if (ch != '_') digits += ch;
    }
    if (digits.empty()) fail("missing value");
    const bool is_float = digits.find_first_of(".eEn") != std::string::npos;
    try {
      std::size_t used = 0;
      if (is_float) {
        v.kind = Value::Kind::kFloat;
        v.f = std::stod(digits, &used);
      } else {
        v.kind = Value::Kind::kInt;
        v.i = std::stoll(digits, &used);
      }
      if (used != digits.size()) fail(fmt::format("malformed number '{}'", tok));
    } catch (const std::logic_error&) {
      fail(fmt::format("malformed value '{}'", tok));
    }
    return v;
  }

  const std::string& text_;
  std::size_t pos_ = 0;
  int line_ = 1;
};

// ---- typed setters ---------------------------------------------------------

[[noreturn]] void type_error(const std::string& path, const char* expected) {
  throw_invalid(fmt::format("{}: expected {}", path, expected));
}

long long as_int(const Value& v, const std::string& path) {
  if (v.kind != Value::Kind::kInt) type_error(path, "an integer");
  return v.i;
}

int as_int32(const Value& v, const std::string& path) {
  const long long x = as_int(v, path);
  if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max()) {
    throw_invalid(fmt::format("{}: {} is out of range", path, x));
  }
  return static_cast<int>(x);
}

double as_real(const Value& v, const std::string& path) {
  if (v.kind == Value::Kind::kInt) return static_cast<double>(v.i);
  if (v.kind != Value::Kind::kFloat) type_error(path, "a number");
  return v.f;
}

std::vector<int> as_int_list(const Value& v, const std::string& path) {
  if (v.kind != Value::Kind::kArray) type_error(path, "an array of integers");
  std::vector<int> out;
  for (std::size_t i = 0; i < v.items.size(); ++i) out.push_back(as_int32(v.items[i], fmt::format("{}[{}]", path, i)));
  return out;
}

std::vector<std::vector<int>> as_int_table(const Value& v, const std::string& path, std::size_t width) {
  if (v.kind != Value::Kind::kArray) type_error(path, "an array of integer arrays");
  std::vector<std::vector<int>> out;
  for (std::size_t i = 0; i < v.items.size(); ++i) {
    const std::string item_path = fmt::format("{}[{}]", path, i);
    std::vector<int> row = as_int_list(v.items[i], item_path);
    if (row.size() != width) throw_invalid(fmt::format("{}: expected {} integers, got {}", item_path, width, row.size()));
    out.push_back(std::move(row));
  }
  return out;
}

using Setter = std::function<void(RunConfig&, const Value&, const std::string&)>;

const std::map<std::string, std::map<std::string, Setter>>& registry() {
  static const auto* table = new std::map<std::string, std::map<std::string, Setter>>{
      {"audio",
       {{"sample_rate", [](RunConfig& c, const Value& v, const std::string& p) { c.sample_rate = as_int32(v, p); }}}},
      {"mel",
       {{"fft_size", [](RunConfig& c, const Value& v, const std::string& p) { c.mel.fft_size = as_int32(v, p); }},
        {"win_size", [](RunConfig& c, const Value& v, const std::string& p) { c.mel.win_size = as_int32(v, p); }},
        {"hop_size", [](RunConfig& c, const Value& v, const std::string& p) { c.mel.hop_size = as_int32(v, p); }},
        {"n_mels", [](RunConfig& c, const Value& v, const std::string& p) { c.mel.n_mels = as_int32(v, p); }},
        {"f_min", [](RunConfig& c, const Value& v, const std::string& p) { c.mel.f_min = as_real(v, p); }},
        {"f_max", [](RunConfig& c, const Value& v, const std::string& p) { c.mel.f_max = as_real(v, p); }}}},
      {"pitch",
       {{"sigma", [](RunConfig& c, const Value& v, const std::string& p) { c.fusion.sigma = as_real(v, p); }},
        {"gamma", [](RunConfig& c, const Value& v, const std::string& p) { c.fusion.gamma = as_real(v, p); }},
        {"zcr_win", [](RunConfig& c, const Value& v, const std::string& p) { c.fusion.zcr_win = as_int32(v, p); }},
        {"zcr_hop", [](RunConfig& c, const Value& v, const std::string& p) { c.fusion.zcr_hop = as_int32(v, p); }},
        {"f_floor", [](RunConfig& c, const Value& v, const std::string& p) { c.pitch_range.f_floor = as_real(v, p); }},
        {"f_ceil", [](RunConfig& c, const Value& v, const std::string& p) { c.pitch_range.f_ceil = as_real(v, p); }}}},
      {"template",
       {{"noise_amp", [](RunConfig& c, const Value& v, const std::string& p) { c.templ.noise_amp = as_real(v, p); }},
        {"pulse_width",
         [](RunConfig& c, const Value& v, const std::string& p) { c.templ.pulse_width = as_int32(v, p); }}}},
      {"shift",
       {{"zeta_min", [](RunConfig& c, const Value& v, const std::string& p) { c.shift.zeta_min = as_int32(v, p); }},
        {"zeta_max", [](RunConfig& c, const Value& v, const std::string& p) { c.shift.zeta_max = as_int32(v, p); }}}},
      {"loudness",
       {{"p_min", [](RunConfig& c, const Value& v, const std::string& p) { c.loudness.p_min = as_real(v, p); }},
        {"p_max", [](RunConfig& c, const Value& v, const std::string& p) { c.loudness.p_max = as_real(v, p); }},
        {"r_min", [](RunConfig& c, const Value& v, const std::string& p) { c.loudness.r_min = as_real(v, p); }},
        {"r_max", [](RunConfig& c, const Value& v, const std::string& p) { c.loudness.r_max = as_real(v, p); }}}},
      {"mel_loss",
       {{"sets",
         [](RunConfig& c, const Value& v, const std::string& p) {
           const auto rows = as_int_table(v, p, 4);
           const double f_min = c.mel_loss.param_sets.empty() ? 20.0 : c.mel_loss.param_sets[0].f_min;
           const double f_max =
               c.mel_loss.param_sets.empty() ? c.sample_rate / 2.0 : c.mel_loss.param_sets[0].f_max;
           c.mel_loss.param_sets.clear();
           for (const auto& r : rows) {
             MelParamSet s;
             s.fft_size = r[0];
             s.hop_size = r[1];
             s.win_size = r[2];
             s.n_mels = r[3];
             s.f_min = f_min;
             s.f_max = f_max;
             c.mel_loss.param_sets.push_back(s);
           }
         }},
        {"f_min",
         [](RunConfig& c, const Value& v, const std::string& p) {
           for (auto& s : c.mel_loss.param_sets) s.f_min = as_real(v, p);
         }},
        {"f_max",
         [](RunConfig& c, const Value& v, const std::string& p) {
           for (auto& s : c.mel_loss.param_sets) s.f_max = as_real(v, p);
         }},
        {"log_floor",
         [](RunConfig& c, const Value& v, const std::string& p) { c.mel_loss.log_floor = as_real(v, p); }}}},
      {"envelope",
       {{"win_size", [](RunConfig& c, const Value& v, const std::string& p) { c.envelope.win_size = as_int32(v, p); }},
        {"hop_size",
         [](RunConfig& c, const Value& v, const std::string& p) { c.envelope.hop_size = as_int32(v, p); }}}},
      {"loss",
       {{"lambda_mel",
         [](RunConfig& c, const Value& v, const std::string& p) { c.loss.lambda_mel = as_real(v, p); }}}},
      {"generator",
       {{"down_rates",
         [](RunConfig& c, const Value& v, const std::string& p) { c.generator.down_rates = as_int_list(v, p); }},
        {"up_rates",
         [](RunConfig& c, const Value& v, const std::string& p) { c.generator.up_rates = as_int_list(v, p); }},
        {"base_channels",
         [](RunConfig& c, const Value& v, const std::string& p) { c.generator.base_channels = as_int32(v, p); }},
        {"decoder_kernels",
         [](RunConfig& c, const Value& v, const std::string& p) { c.generator.decoder_kernels = as_int_list(v, p); }},
        {"encoder_kernel",
         [](RunConfig& c, const Value& v, const std::string& p) { c.generator.encoder_kernel = as_int32(v, p); }},
        {"dilations",
         [](RunConfig& c, const Value& v, const std::string& p) { c.generator.dilations = as_int_list(v, p); }},
        {"n_mels", [](RunConfig& c, const Value& v, const std::string& p) { c.generator.n_mels = as_int32(v, p); }},
        {"leaky_slope",
         [](RunConfig& c, const Value& v, const std::string& p) { c.generator.leaky_slope = as_real(v, p); }}}},
      {"discriminator",
       {{"mpd_periods",
         [](RunConfig& c, const Value& v, const std::string& p) { c.discriminator.mpd_periods = as_int_list(v, p); }},
        {"mrd_sets",
         [](RunConfig& c, const Value& v, const std::string& p) {
           c.discriminator.mrd_param_sets.clear();
           for (const auto& r : as_int_table(v, p, 3)) c.discriminator.mrd_param_sets.push_back({r[0], r[1], r[2]});
         }},
        {"mpd_channels",
         [](RunConfig& c, const Value& v, const std::string& p) { c.discriminator.mpd_channels = as_int_list(v, p); }},
        {"mrd_channels",
         [](RunConfig& c, const Value& v, const std::string& p) { c.discriminator.mrd_channels = as_int32(v, p); }},
        {"leaky_slope",
         [](RunConfig& c, const Value& v, const std::string& p) { c.discriminator.leaky_slope = as_real(v, p); }}}},
      {"training",
       {{"batch_size",
         [](RunConfig& c, const Value& v, const std::string& p) { c.training.batch_size = as_int32(v, p); }},
        {"steps", [](RunConfig& c, const Value& v, const std::string& p) { c.training.steps = as_int32(v, p); }},
        {"seed",
         [](RunConfig& c, const Value& v, const std::string& p) {
           const long long s = as_int(v, p);
           if (s < 0) throw_invalid(fmt::format("{}: must be non-negative, got {}", p, s));
           c.training.seed = static_cast<std::uint64_t>(s);
         }},
        {"lr", [](RunConfig& c, const Value& v, const std::string& p) { c.training.lr = as_real(v, p); }},
        {"beta1", [](RunConfig& c, const Value& v, const std::string& p) { c.training.beta1 = as_real(v, p); }},
        {"beta2", [](RunConfig& c, const Value& v, const std::string& p) { c.training.beta2 = as_real(v, p); }},
        {"segment_samples",
         [](RunConfig& c, const Value& v, const std::string& p) { c.training.segment_samples = as_int32(v, p); }},
        {"checkpoint_every",
         [](RunConfig& c, const Value& v, const std::string& p) { c.training.checkpoint_every = as_int32(v, p); }}}},
  };
  return *table;
}

void in_section(const char* section, const std::function<void()>& check) {
  try {
    check();
  } catch (const Error& e) {
    throw Error(e.code(), fmt::format("[{}] {}", section, e.what()));
  }
}

std::string list(const std::vector<int>& v) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + std::to_string(v[i]);
  return s + "]";
}

std::string real(double x) {
  std::string s = fmt::format("{}", x);
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

MelParamSet toy_set(int fft, int hop, int win, int mels) {
  MelParamSet s;
  s.fft_size = fft;
  s.hop_size = hop;
  s.win_size = win;
  s.n_mels = mels;
  s.f_min = 20.0;
  s.f_max = 4000.0;
  return s;
}

}  // namespace

void TrainingConfig::validate() const {
  if (batch_size < 1) throw_invalid(fmt::format("training.batch_size must be >= 1, got {}", batch_size));
  if (steps < 0) throw_invalid(fmt::format("training.steps must be >= 0, got {}", steps));
  if (segment_samples < 1) throw_invalid(fmt::format("training.segment_samples must be >= 1, got {}", segment_samples));
  if (checkpoint_every < 1) {
    throw_invalid(fmt::format("training.checkpoint_every must be >= 1, got {}", checkpoint_every));
  }
  nn::AdamConfig{lr, beta1, beta2}.validate();
}

void RunConfig::validate() const {
  if (sample_rate <= 0) throw_invalid(fmt::format("audio.sample_rate must be positive, got {}", sample_rate));
  in_section("mel", [&] { mel.validate(sample_rate); });
  in_section("pitch", [&] {
    fusion.validate();
    pitch_range.validate(sample_rate);
  });
  in_section("template", [&] { templ.validate(); });
  in_section("shift", [&] { shift.validate(); });
  in_section("loudness", [&] { loudness.validate(); });
  in_section("mel_loss", [&] { mel_loss.validate(sample_rate); });
  in_section("envelope", [&] { envelope.validate(); });
  in_section("loss", [&] { loss.validate(); });
  in_section("generator", [&] {
    generator.validate(mel.hop_size);
    if (generator.n_mels != mel.n_mels) {
      throw_invalid(fmt::format("generator.n_mels {} must equal mel.n_mels {}", generator.n_mels, mel.n_mels));
    }
  });
  in_section("discriminator", [&] { discriminator.validate(); });
  in_section("training", [&] {
    training.validate();
    if (training.segment_samples % mel.hop_size != 0) {
      throw_invalid(fmt::format("training.segment_samples {} must be a multiple of mel.hop_size {}",
                                training.segment_samples, mel.hop_size));
    }
    int longest = 0;
    for (const auto& g : discriminator.mrd_param_sets) longest = std::max(longest, g.fft_size);
    for (int p : discriminator.mpd_periods) longest = std::max(longest, p);
    if (training.segment_samples < longest) {
      throw_invalid(fmt::format("training.segment_samples {} is shorter than the largest discriminator span {}",
                                training.segment_samples, longest));
    }
  });
}

FeatureSetup RunConfig::features() const { return FeatureSetup{mel, fusion, pitch_range, templ}; }

LossSetup RunConfig::losses() const { return LossSetup{loss, mel_loss, envelope}; }

nn::AdamConfig RunConfig::adam() const { return nn::AdamConfig{training.lr, training.beta1, training.beta2}; }

RunConfig RunConfig::full_band() { return RunConfig{}; }

RunConfig RunConfig::toy() {
  RunConfig c;
  c.sample_rate = 8000;
  c.mel = toy_set(64, 4, 64, 8);
  c.fusion.zcr_win = 96;
  c.fusion.zcr_hop = 48;
  c.mel_loss.param_sets = {toy_set(64, 16, 64, 8),    toy_set(96, 24, 96, 8),     toy_set(192, 48, 192, 16),
                           toy_set(256, 64, 256, 16), toy_set(512, 128, 512, 16), toy_set(128, 32, 128, 8)};
  c.envelope = {96, 48};
  c.generator = GeneratorConfig::toy();
  c.discriminator = DiscriminatorConfig::toy();
  c.training.batch_size = 1;
  c.training.steps = 500;
  c.training.lr = 2e-3;
  c.training.segment_samples = 2048;
  c.training.checkpoint_every = 100;
  return c;
}

RunConfig preset(const std::string& name) {
  if (name == "default") return RunConfig::full_band();
  if (name == "toy") return RunConfig::toy();
  throw_invalid(fmt::format("unknown preset '{}' (expected 'default' or 'toy')", name));
}

RunConfig parse_config(const std::string& text, const RunConfig& base) {
  RunConfig cfg = base;
  std::set<std::string> seen;
  Parser(text).run([&](const std::string& section, const std::string& key, const Value& v, int line) {
    const std::string path = section.empty() ? key : section + "." + key;
    const auto& reg = registry();
    auto sec = reg.find(section);
    if (sec == reg.end()) {
      throw_invalid(section.empty() ? fmt::format("config line {}: key '{}' outside any section", line, key)
                                    : fmt::format("config line {}: unknown section '{}'", line, section));
    }
    auto it = sec->second.find(key);
    if (it == sec->second.end()) throw_invalid(fmt::format("config line {}: unknown key '{}'", line, path));
    if (!seen.insert(path).second) throw_invalid(fmt::format("config line {}: duplicate key '{}'", line, path));
    it->second(cfg, v, path);
  });
  return cfg;
}

RunConfig load_config(const std::string& path, const RunConfig& base) {
  std::ifstream in(path);
  if (!in) throw_io(fmt::format("cannot open config '{}'", path));
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), base);
}

void apply_override(RunConfig& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  const auto dot = assignment.find('.');
  if (eq == std::string::npos || dot == std::string::npos || dot > eq) {
    throw_invalid(fmt::format("override '{}' must look like section.key=value", assignment));
  }
  const std::string text = fmt::format("[{}]\n{} = {}\n", assignment.substr(0, dot),
                                       assignment.substr(dot + 1, eq - dot - 1), assignment.substr(eq + 1));
  cfg = parse_config(text, cfg);
}

std::string to_toml(const RunConfig& c) {
  std::string out;
  auto line = [&out](const std::string& key, const std::string& value) { out += key + " = " + value + "\n"; };
  out += "[audio]\n";
  line("sample_rate", std::to_string(c.sample_rate));
  out += "\n[mel]\n";
  line("fft_size", std::to_string(c.mel.fft_size));
  line("win_size", std::to_string(c.mel.win_size));
  line("hop_size", std::to_string(c.mel.hop_size));
  line("n_mels", std::to_string(c.mel.n_mels));
  line("f_min", real(c.mel.f_min));
  line("f_max", real(c.mel.f_max));
  out += "\n[pitch]\n";
  line("sigma", real(c.fusion.sigma));
  line("gamma", real(c.fusion.gamma));
  line("zcr_win", std::to_string(c.fusion.zcr_win));
  line("zcr_hop", std::to_string(c.fusion.zcr_hop));
  line("f_floor", real(c.pitch_range.f_floor));
  line("f_ceil", real(c.pitch_range.f_ceil));
  out += "\n[template]\n";
  line("noise_amp", real(c.templ.noise_amp));
  line("pulse_width", std::to_string(c.templ.pulse_width));
  out += "\n[shift]\n";
  line("zeta_min", std::to_string(c.shift.zeta_min));
  line("zeta_max", std::to_string(c.shift.zeta_max));
  out += "\n[loudness]\n";
  line("p_min", real(c.loudness.p_min));
  line("p_max", real(c.loudness.p_max));
  line("r_min", real(c.loudness.r_min));
  line("r_max", real(c.loudness.r_max));
  out += "\n[mel_loss]\n";
  std::string sets = "[";
  for (std::size_t i = 0; i < c.mel_loss.param_sets.size(); ++i) {
    const auto& s = c.mel_loss.param_sets[i];
    sets += fmt::format("{}[{}, {}, {}, {}]", i ? ", " : "", s.fft_size, s.hop_size, s.win_size, s.n_mels);
  }
  line("sets", sets + "]");
  if (!c.mel_loss.param_sets.empty()) {
    line("f_min", real(c.mel_loss.param_sets[0].f_min));
    line("f_max", real(c.mel_loss.param_sets[0].f_max));
  }
  line("log_floor", real(c.mel_loss.log_floor));
  out += "\n[envelope]\n";
  line("win_size", std::to_string(c.envelope.win_size));
  line("hop_size", std::to_string(c.envelope.hop_size));
  out += "\n[loss]\n";
  line("lambda_mel", real(c.loss.lambda_mel));
  out += "\n[generator]\n";
  line("down_rates", list(c.generator.down_rates));
  line("up_rates", list(c.generator.up_rates));
  line("base_channels", std::to_string(c.generator.base_channels));
  line("decoder_kernels", list(c.generator.decoder_kernels));
  line("encoder_kernel", std::to_string(c.generator.encoder_kernel));
  line("dilations", list(c.generator.dilations));
  line("n_mels", std::to_string(c.generator.n_mels));
  line("leaky_slope", real(c.generator.leaky_slope));
  out += "\n[discriminator]\n";
  line("mpd_periods", list(c.discriminator.mpd_periods));
  std::string mrd = "[";
  for (std::size_t i = 0; i < c.discriminator.mrd_param_sets.size(); ++i) {
    const auto& g = c.discriminator.mrd_param_sets[i];
    mrd += fmt::format("{}[{}, {}, {}]", i ? ", " : "", g.fft_size, g.hop_size, g.win_size);
  }
  line("mrd_sets", mrd + "]");
  line("mpd_channels", list(c.discriminator.mpd_channels));
  line("mrd_channels", std::to_string(c.discriminator.mrd_channels));
  line("leaky_slope", real(c.discriminator.leaky_slope));
  out += "\n[training]\n";
  line("batch_size", std::to_string(c.training.batch_size));
  line("steps", std::to_string(c.training.steps));
  if (c.training.seed) line("seed", std::to_string(*c.training.seed));
  line("lr", real(c.training.lr));
  line("beta1", real(c.training.beta1));
  line("beta2", real(c.training.beta2));
  line("segment_samples", std::to_string(c.training.segment_samples));
  line("checkpoint_every", std::to_string(c.training.checkpoint_every));
  return out;
}

}  // namespace pulsevoc
