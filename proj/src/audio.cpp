// Copyright 2026 The Wavemux Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "wavemux/audio.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "wavemux/errors.hpp"

namespace wavemux {

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint16_t read_u16(std::span<const unsigned char> b, std::size_t at) {
  return static_cast<std::uint16_t>(b[at] | (b[at + 1] << 8));
}

std::uint32_t read_u32(std::span<const unsigned char> b, std::size_t at) {
  return static_cast<std::uint32_t>(b[at]) | (static_cast<std::uint32_t>(b[at + 1]) << 8) |
         (static_cast<std::uint32_t>(b[at + 2]) << 16) |
         (static_cast<std::uint32_t>(b[at + 3]) << 24);
}

void put_u16(std::vector<unsigned char>& out, std::uint16_t v) {
  out.push_back(static_cast<unsigned char>(v & 0xFF));
  out.push_back(static_cast<unsigned char>(v >> 8));
}

void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xFF));
}

void put_tag(std::vector<unsigned char>& out, const char* tag) { out.insert(out.end(), tag, tag + 4); }

bool tag_is(std::span<const unsigned char> b, std::size_t at, const char* tag) {
  return std::memcmp(b.data() + at, tag, 4) == 0;
}

std::int16_t to_pcm16(double x) {
  const double clipped = std::clamp(x, -1.0, 1.0);
  const double scaled = std::round(clipped * 32768.0);
  return static_cast<std::int16_t>(std::clamp(scaled, -32768.0, 32767.0));
}

}  // namespace

AudioBuffer::AudioBuffer(std::vector<double> samples, int sample_rate)
    : samples_(std::move(samples)), sample_rate_(sample_rate) {
  if (samples_.empty()) throw InvalidArgument("AudioBuffer: empty sample vector");
  if (sample_rate_ <= 0) throw InvalidArgument("AudioBuffer: sample rate must be positive");
  for (double s : samples_) {
    if (!std::isfinite(s)) throw InvalidArgument("AudioBuffer: non-finite sample");
  }
}

AudioBuffer AudioBuffer::zeros(std::size_t n, int sample_rate) {
  return AudioBuffer(std::vector<double>(n, 0.0), sample_rate);
}

double energy(std::span<const double> x) {
  double e = 0.0;
  for (double v : x) e += v * v;
  return e;
}

std::vector<unsigned char> encode_wav(const AudioBuffer& buf, WavEncoding encoding) {
  const bool pcm = encoding == WavEncoding::kPcm16;
  const std::uint16_t bits = pcm ? 16 : 32;
  const std::uint16_t block_align = bits / 8;
  const std::uint32_t data_bytes = static_cast<std::uint32_t>(buf.size() * block_align);
  const std::uint32_t fmt_bytes = pcm ? 16 : 18;

  std::vector<unsigned char> out;
  out.reserve(44 + data_bytes);
  put_tag(out, "RIFF");
  put_u32(out, 4 + (8 + fmt_bytes) + (8 + data_bytes));
  put_tag(out, "WAVE");
  put_tag(out, "fmt ");
  put_u32(out, fmt_bytes);
  put_u16(out, pcm ? kFormatPcm : kFormatFloat);
  put_u16(out, 1);
  put_u32(out, static_cast<std::uint32_t>(buf.sample_rate()));
  put_u32(out, static_cast<std::uint32_t>(buf.sample_rate()) * block_align);
  put_u16(out, block_align);
  put_u16(out, bits);
  if (!pcm) put_u16(out, 0);  // cbSize
  put_tag(out, "data");
  put_u32(out, data_bytes);
  for (double s : buf.samples()) {
    if (pcm) {
      put_u16(out, static_cast<std::uint16_t>(to_pcm16(s)));
    } else {
      put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(s)));
    }
  }
  return out;
}

AudioBuffer decode_wav(std::span<const unsigned char> b) {
  if (b.size() < 12 || !tag_is(b, 0, "RIFF") || !tag_is(b, 8, "WAVE")) {
    throw IoError("not a RIFF/WAVE stream");
  }
  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  bool have_fmt = false;
  std::size_t pos = 12;
  while (pos + 8 <= b.size()) {
    const std::uint32_t len = read_u32(b, pos + 4);
    const std::size_t body = pos + 8;
    if (body + len > b.size()) throw IoError("truncated WAV chunk");
    if (tag_is(b, pos, "fmt ")) {
      if (len < 16) throw IoError("fmt chunk too short");
      format = read_u16(b, body);
      channels = read_u16(b, body + 2);
      rate = read_u32(b, body + 4);
      bits = read_u16(b, body + 14);
      if (format == kFormatExtensible) {
        if (len < 40) throw IoError("extensible fmt chunk too short");
        format = read_u16(b, body + 24);  // first two bytes of the subformat GUID
      }
      have_fmt = true;
    } else if (tag_is(b, pos, "data")) {
      if (!have_fmt) throw IoError("data chunk before fmt chunk");
      if (channels != 1) {
        throw IoError("unsupported channel count " + std::to_string(channels) + " (mono only)");
      }
      std::vector<double> samples;
      if (format == kFormatPcm && bits == 16) {
        samples.resize(len / 2);
        for (std::size_t i = 0; i < samples.size(); ++i) {
          samples[i] = static_cast<std::int16_t>(read_u16(b, body + 2 * i)) / 32768.0;
        }
      } else if (format == kFormatFloat && bits == 32) {
        samples.resize(len / 4);
        for (std::size_t i = 0; i < samples.size(); ++i) {
          samples[i] = std::bit_cast<float>(read_u32(b, body + 4 * i));
        }
      } else {
        throw IoError("unsupported WAV encoding (format " + std::to_string(format) + ", " +
                      std::to_string(bits) + " bits); expected PCM16 or float32");
      }
      if (samples.empty()) throw IoError("WAV data chunk is empty");
      try {
        return AudioBuffer(std::move(samples), static_cast<int>(rate));
      } catch (const InvalidArgument& e) {
        throw IoError(std::string("invalid WAV contents: ") + e.what());
      }
    }
    pos = body + len + (len & 1);
  }
  throw IoError("WAV stream has no data chunk");
}

AudioBuffer load_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return decode_wav(bytes);
  } catch (const IoError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

void save_wav(const AudioBuffer& buf, const std::filesystem::path& path, WavEncoding encoding) {
  const auto bytes = encode_wav(buf, encoding);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

AudioBuffer quantize_pcm16(const AudioBuffer& buf) {
  std::vector<double> q(buf.size());
  for (std::size_t i = 0; i < q.size(); ++i) q[i] = to_pcm16(buf[i]) / 32768.0;
  return buf.with_samples(std::move(q));
}

}  // namespace wavemux
