// Copyright 2026 The pulsevoc Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "pulsevoc/wav_io.h"

#include <fmt/format.h>

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <iostream>
#include <iterator>
#include <vector>

#include "pulsevoc/error.h"

namespace pulsevoc {

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint32_t le32(const unsigned char* p) {
  return p[0] | (p[1] << 8) | (p[2] << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}
std::uint16_t le16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

struct Parsed {
  WavInfo info;
  std::size_t data_offset = 0;
  int bytes_per_sample = 0;
};

std::vector<unsigned char> slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw_io(fmt::format("cannot open '{}'", path));
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Parsed parse(const std::vector<unsigned char>& bytes, const std::string& path) {
  auto fail = [&](const std::string& why) -> void {
    throw_io(fmt::format("'{}' is not a readable WAV file: {}", path, why));
  };
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    fail("missing RIFF/WAVE header");
  }
  Parsed p;
  bool have_fmt = false;
  bool have_data = false;
  std::uint16_t tag = 0;
  int bits = 0;
  std::size_t pos = 12;
  std::size_t data_bytes = 0;
  while (pos + 8 <= bytes.size()) {
    const unsigned char* chunk = bytes.data() + pos;
    const std::uint32_t size = le32(chunk + 4);
    const std::size_t body = pos + 8;
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (size < 16 || body + size > bytes.size()) fail("truncated fmt chunk");
      tag = le16(bytes.data() + body);
      p.info.channels = le16(bytes.data() + body + 2);
      p.info.sample_rate = static_cast<int>(le32(bytes.data() + body + 4));
      bits = le16(bytes.data() + body + 14);
      if (tag == kFormatExtensible) {
        if (size < 26) fail("truncated extensible fmt chunk");
        tag = le16(bytes.data() + body + 24);
      }
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      if (body + size > bytes.size()) fail("data chunk extends past end of file");
      p.data_offset = body;
      data_bytes = size;
      have_data = true;
      break;
    }
    pos = body + size + (size & 1);
  }
  if (!have_fmt) fail("no fmt chunk");
  if (!have_data) fail("no data chunk");
  if (p.info.channels < 1) fail("zero channels");
  if (p.info.sample_rate <= 0) fail("non-positive sample rate");
  if (tag == kFormatPcm && bits == 16) {
    p.info.format = WavFormat::kPcm16;
  } else if (tag == kFormatPcm && bits == 24) {
    p.info.format = WavFormat::kPcm24;
  } else if (tag == kFormatFloat && bits == 32) {
    p.info.format = WavFormat::kFloat32;
  } else {
    fail(fmt::format("unsupported encoding (format tag {}, {} bits)", tag, bits));
  }
  p.bytes_per_sample = bits / 8;
  p.info.n_samples = data_bytes / (p.bytes_per_sample * p.info.channels);
  return p;
}

}  // namespace

WavInfo probe_wav(const std::string& path) {
  const auto bytes = slurp(path);
  return parse(bytes, path).info;
}

Waveform read_wav(const std::string& path) {
  const auto bytes = slurp(path);
  const Parsed p = parse(bytes, path);
  if (p.info.channels > 1) {
    std::cerr << "warning: '" << path << "' has " << p.info.channels
              << " channels, using channel 0\n";
  }
  std::vector<double> samples(p.info.n_samples);
  const std::size_t stride = static_cast<std::size_t>(p.bytes_per_sample) * p.info.channels;
  for (std::size_t i = 0; i < p.info.n_samples; ++i) {
    const unsigned char* s = bytes.data() + p.data_offset + i * stride;
    switch (p.info.format) {
      case WavFormat::kPcm16:
        samples[i] = static_cast<std::int16_t>(le16(s)) / 32768.0;
        break;
      case WavFormat::kPcm24: {
        std::int32_t v = s[0] | (s[1] << 8) | (s[2] << 16);
        if (v & 0x800000) v -= 0x1000000;
        samples[i] = v / 8388608.0;
        break;
      }
      case WavFormat::kFloat32:
        samples[i] = std::bit_cast<float>(le32(s));
        break;
    }
  }
  try {
    return Waveform(std::move(samples), p.info.sample_rate);
  } catch (const Error& e) {
    throw_io(fmt::format("'{}': {}", path, e.what()));
  }
}

void write_wav(const std::string& path, const Waveform& wave, WavFormat format) {
  const int bytes_per_sample = format == WavFormat::kPcm16 ? 2 : format == WavFormat::kPcm24 ? 3 : 4;
  const std::uint32_t data_bytes = static_cast<std::uint32_t>(wave.size() * bytes_per_sample);
  std::vector<unsigned char> out;
  out.reserve(44 + data_bytes);
  auto put32 = [&](std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>(v >> (8 * i)));
  };
  auto put16 = [&](std::uint16_t v) {
    out.push_back(static_cast<unsigned char>(v));
    out.push_back(static_cast<unsigned char>(v >> 8));
  };
  auto tag = [&](const char* t) { out.insert(out.end(), t, t + 4); };
  tag("RIFF");
  put32(36 + data_bytes);
  tag("WAVE");
  tag("fmt ");
  put32(16);
  put16(format == WavFormat::kFloat32 ? kFormatFloat : kFormatPcm);
  put16(1);
  put32(static_cast<std::uint32_t>(wave.sample_rate()));
  put32(static_cast<std::uint32_t>(wave.sample_rate() * bytes_per_sample));
  put16(static_cast<std::uint16_t>(bytes_per_sample));
  put16(static_cast<std::uint16_t>(bytes_per_sample * 8));
  tag("data");
  put32(data_bytes);
  for (double v : wave.samples()) {
    switch (format) {
      case WavFormat::kPcm16: {
        const double c = std::clamp(v, -1.0, 1.0);
        put16(static_cast<std::uint16_t>(static_cast<std::int16_t>(std::lround(std::min(c * 32768.0, 32767.0)))));
        break;
      }
      case WavFormat::kPcm24: {
        const double c = std::clamp(v, -1.0, 1.0);
        const auto q = static_cast<std::int32_t>(std::lround(std::min(c * 8388608.0, 8388607.0)));
        const auto u = static_cast<std::uint32_t>(q);
        for (int i = 0; i < 3; ++i) out.push_back(static_cast<unsigned char>(u >> (8 * i)));
        break;
      }
      case WavFormat::kFloat32:
        put32(std::bit_cast<std::uint32_t>(static_cast<float>(v)));
        break;
    }
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw_io(fmt::format("cannot write '{}'", path));
  f.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
  if (!f) throw_io(fmt::format("failed writing '{}'", path));
}

}  // namespace pulsevoc
