// Copyright 2026 The pulsevoc Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "pulsevoc/checkpoint.h"

#include <fmt/format.h>

#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include "pulsevoc/error.h"

namespace pulsevoc {

namespace {

constexpr char kMagic[8] = {'P', 'V', 'C', 'K', 'P', 'T', 0, 0};

struct Entry {
  std::string name;
  nn::Tensor* tensor;
};

class Writer {
 public:
  template <typename T>
  void put(T v) {
    const auto* p = reinterpret_cast<const char*>(&v);
    bytes_.insert(bytes_.end(), p, p + sizeof(T));
  }
  void put_str(const std::string& s) {
    put<std::uint64_t>(s.size());
    bytes_.insert(bytes_.end(), s.begin(), s.end());
  }
  void put_tensor(const std::string& name, const nn::Tensor& t) {
    put_str(name);
    put<std::uint32_t>(static_cast<std::uint32_t>(t.ndim()));
    for (std::size_t d : t.shape()) put<std::uint64_t>(d);
    const auto* p = reinterpret_cast<const char*>(t.data());
    bytes_.insert(bytes_.end(), p, p + t.numel() * sizeof(double));
  }
  void raw(const char* p, std::size_t n) { bytes_.insert(bytes_.end(), p, p + n); }
  std::vector<char> take() { return std::move(bytes_); }

 private:
  std::vector<char> bytes_;
};

class Reader {
 public:
  explicit Reader(const std::vector<char>& bytes) : bytes_(bytes) {}
  template <typename T>
  T get() {
    T v;
    need(sizeof(T));
    std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  std::string get_str() {
    const auto n = get<std::uint64_t>();
    need(n);
    std::string s(bytes_.data() + pos_, n);
    pos_ += n;
    return s;
  }
  std::pair<std::string, nn::Tensor> get_tensor() {
    std::string name = get_str();
    const auto rank = get<std::uint32_t>();
    if (rank > 8) throw_io(fmt::format("checkpoint: tensor '{}' has implausible rank {}", name, rank));
    nn::Shape shape(rank);
    std::size_t n = 1;
    for (auto& d : shape) {
      d = get<std::uint64_t>();
      if (d != 0 && n > (bytes_.size() / sizeof(double)) / d) throw_io("checkpoint: tensor size exceeds file");
      n *= d;
    }
    need(n * sizeof(double));
    std::vector<double> data(n);
    std::memcpy(data.data(), bytes_.data() + pos_, n * sizeof(double));
    pos_ += n * sizeof(double);
    return {std::move(name), nn::Tensor(std::move(shape), std::move(data))};
  }
  void expect_magic() {
    need(sizeof(kMagic));
    if (std::memcmp(bytes_.data(), kMagic, sizeof(kMagic)) != 0) throw_io("checkpoint: bad magic");
    pos_ += sizeof(kMagic);
  }
  bool at_end() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (n > bytes_.size() - pos_) throw_io("checkpoint: truncated file");
  }
  const std::vector<char>& bytes_;
  std::size_t pos_ = 0;
};

// Adam step counts travel as scalar tensors held here during (de)serialization.
struct StepScalars {
  nn::Tensor g = nn::Tensor::scalar(0.0);
  nn::Tensor d = nn::Tensor::scalar(0.0);
};

void add_params(const nn::ParamList& params, const std::string& prefix, std::vector<Entry>& out) {
  for (const auto& p : params) {
    nn::Var v = p.var;
    out.push_back({prefix + p.name, &v.mutable_value()});
  }
}

void add_optimizer(const std::string& prefix, const nn::ParamList& params, nn::Adam& opt, nn::Tensor* steps,
                   std::vector<Entry>& out) {
  out.push_back({prefix + ".step", steps});
  for (std::size_t i = 0; i < params.size(); ++i) {
    out.push_back({fmt::format("{}.m.{}", prefix, params[i].name), &opt.first_moments()[i]});
    out.push_back({fmt::format("{}.v.{}", prefix, params[i].name), &opt.second_moments()[i]});
  }
}

std::vector<Entry> entries(ModelState& state, StepScalars& steps) {
  std::vector<Entry> out;
  const nn::ParamList gp = state.generator.parameters();
  const nn::ParamList dp = state.discriminators.parameters();
  add_params(gp, "param.", out);
  add_params(dp, "param.", out);
  add_optimizer("opt_g", gp, state.opt_g, &steps.g, out);
  add_optimizer("opt_d", dp, state.opt_d, &steps.d, out);
  return out;
}

std::vector<char> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw_io(fmt::format("cannot open checkpoint '{}'", path));
  return std::vector<char>(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

CheckpointHeader read_header(Reader& r) {
  r.expect_magic();
  const auto version = r.get<std::uint32_t>();
  if (version != kCheckpointVersion) {
    throw_io(fmt::format("checkpoint: unsupported version {} (expected {})", version, kCheckpointVersion));
  }
  CheckpointHeader h;
  h.config_text = r.get_str();
  h.step = r.get<std::int64_t>();
  h.seed = r.get<std::uint64_t>();
  return h;
}

}  // namespace

std::vector<char> serialize_checkpoint(const ModelState& state, const std::string& config_text) {
  // Entries expose mutable views; serialization only reads through them.
  auto& s = const_cast<ModelState&>(state);
  StepScalars steps;
  steps.g[0] = static_cast<double>(s.opt_g.steps());
  steps.d[0] = static_cast<double>(s.opt_d.steps());
  const std::vector<Entry> list = entries(s, steps);

  Writer w;
  w.raw(kMagic, sizeof(kMagic));
  w.put<std::uint32_t>(kCheckpointVersion);
  w.put_str(config_text);
  w.put<std::int64_t>(state.step);
  w.put<std::uint64_t>(state.seed);
  std::ostringstream rng_text;
  rng_text << state.rng;
  w.put_str(rng_text.str());
  w.put<std::uint64_t>(list.size());
  for (const Entry& e : list) w.put_tensor(e.name, *e.tensor);
  return w.take();
}

void save_checkpoint(const std::string& path, const ModelState& state, const std::string& config_text) {
  const std::vector<char> bytes = serialize_checkpoint(state, config_text);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw_io(fmt::format("cannot write checkpoint '{}'", path));
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw_io(fmt::format("failed writing checkpoint '{}'", path));
}

CheckpointHeader read_checkpoint_header(const std::string& path) {
  const std::vector<char> bytes = read_file(path);
  Reader r(bytes);
  return read_header(r);
}

CheckpointHeader load_checkpoint_bytes(const std::vector<char>& bytes, ModelState& state) {
  Reader r(bytes);
  CheckpointHeader h = read_header(r);
  const std::string rng_text = r.get_str();
  const auto count = r.get<std::uint64_t>();

  StepScalars steps;
  const std::vector<Entry> list = entries(state, steps);
  if (count != list.size()) {
    throw_invalid(fmt::format("checkpoint holds {} tensors, the configured model needs {}", count, list.size()));
  }
  std::vector<nn::Tensor> loaded;
  loaded.reserve(list.size());
  for (const Entry& e : list) {
    auto [name, tensor] = r.get_tensor();
    if (name != e.name || tensor.shape() != e.tensor->shape()) {
      throw_invalid(fmt::format("checkpoint tensor '{}' {} does not match expected '{}' {}", name,
                                nn::shape_str(tensor.shape()), e.name, nn::shape_str(e.tensor->shape())));
    }
    loaded.push_back(std::move(tensor));
  }
  if (!r.at_end()) throw_io("checkpoint: trailing bytes");
  Rng rng;
  std::istringstream rng_in(rng_text);
  rng_in >> rng;
  if (!rng_in) throw_io("checkpoint: malformed RNG state");

  // Commit only after the whole file validated.
  for (std::size_t i = 0; i < list.size(); ++i) *list[i].tensor = std::move(loaded[i]);
  state.opt_g.set_steps(static_cast<std::int64_t>(steps.g[0]));
  state.opt_d.set_steps(static_cast<std::int64_t>(steps.d[0]));
  state.step = h.step;
  state.seed = h.seed;
  state.rng = rng;
  return h;
}

CheckpointHeader load_checkpoint(const std::string& path, ModelState& state) {
  return load_checkpoint_bytes(read_file(path), state);
}

}  // namespace pulsevoc
