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

#ifndef WAVEMUX_AUDIO_HPP_
#define WAVEMUX_AUDIO_HPP_

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

namespace wavemux {

inline constexpr int kDefaultSampleRate = 16000;

// Mono waveform. Non-empty, finite samples, positive sample rate; values are
// nominally in [-1, 1] but are not clipped until they are written as PCM16.
class AudioBuffer {
 public:
  explicit AudioBuffer(std::vector<double> samples, int sample_rate = kDefaultSampleRate);

  static AudioBuffer zeros(std::size_t n, int sample_rate = kDefaultSampleRate);

  std::span<const double> samples() const { return samples_; }
  const std::vector<double>& vec() const { return samples_; }
  std::size_t size() const { return samples_.size(); }
  int sample_rate() const { return sample_rate_; }
  double duration_s() const { return static_cast<double>(size()) / sample_rate_; }
  double operator[](std::size_t i) const { return samples_[i]; }

  // New buffer with the same sample rate.
  AudioBuffer with_samples(std::vector<double> samples) const {
    return AudioBuffer(std::move(samples), sample_rate_);
  }

  friend bool operator==(const AudioBuffer&, const AudioBuffer&) = default;

 private:
  std::vector<double> samples_;
  int sample_rate_;
};

enum class WavEncoding { kPcm16, kFloat32 };

// Reads a mono PCM16 or IEEE float32 RIFF/WAVE file. PCM16 is normalized by
// 1/32768. Multichannel files are rejected rather than downmixed.
AudioBuffer load_wav(const std::filesystem::path& path);

// PCM16 output clips to [-1, 1] and rounds x * 32768 to the nearest integer,
// saturating at 32767.
void save_wav(const AudioBuffer& buf, const std::filesystem::path& path,
              WavEncoding encoding = WavEncoding::kPcm16);

// In-memory equivalents, used by the file functions and by tests.
std::vector<unsigned char> encode_wav(const AudioBuffer& buf, WavEncoding encoding);
AudioBuffer decode_wav(std::span<const unsigned char> bytes);

// Round-trips samples through PCM16 quantization without touching disk.
AudioBuffer quantize_pcm16(const AudioBuffer& buf);

// Sum of squares.
double energy(std::span<const double> x);

}  // namespace wavemux

#endif  // WAVEMUX_AUDIO_HPP_
