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

#ifndef WAVEMUX_STFT_HPP_
#define WAVEMUX_STFT_HPP_

#include <cstddef>
#include <span>
#include <vector>

#include "wavemux/audio.hpp"
#include "wavemux/fft.hpp"

namespace wavemux {

enum class Window { kHann };

// Hann analysis/synthesis at 50% overlap. frame_len must be a power of two
// and hop exactly frame_len / 2.
struct StftConfig {
  std::size_t frame_len = 1024;
  std::size_t hop = 512;
  Window window = Window::kHann;

  void validate() const;
  std::size_t n_bins() const { return frame_len / 2 + 1; }
  // Frames needed to cover `len` samples with the framing used by stft().
  std::size_t frames_for(std::size_t len) const { return (len + hop - 1) / hop + 1; }

  friend bool operator==(const StftConfig&, const StftConfig&) = default;
};

// Periodic Hann window of length n.
std::vector<double> hann_window(std::size_t n);

// Complex one-sided T-F grid, row-major [frame][bin].
class Spectrogram {
 public:
  Spectrogram(std::vector<Complex> grid, std::size_t n_frames, StftConfig config, int sample_rate,
              std::size_t orig_len);

  std::size_t n_frames() const { return n_frames_; }
  std::size_t n_bins() const { return config_.n_bins(); }
  const StftConfig& config() const { return config_; }
  int sample_rate() const { return sample_rate_; }
  std::size_t orig_len() const { return orig_len_; }

  Complex& at(std::size_t t, std::size_t k) { return grid_[t * n_bins() + k]; }
  const Complex& at(std::size_t t, std::size_t k) const { return grid_[t * n_bins() + k]; }
  std::span<Complex> frame(std::size_t t) { return {grid_.data() + t * n_bins(), n_bins()}; }
  std::span<const Complex> frame(std::size_t t) const {
    return {grid_.data() + t * n_bins(), n_bins()};
  }
  std::span<Complex> grid() { return grid_; }
  std::span<const Complex> grid() const { return grid_; }

  // Center frequency of bin k in Hz.
  double bin_hz(std::size_t k) const {
    return static_cast<double>(k) * sample_rate_ / static_cast<double>(config_.frame_len);
  }

  Spectrogram& operator+=(const Spectrogram& other);

 private:
  std::vector<Complex> grid_;
  std::size_t n_frames_;
  StftConfig config_;
  int sample_rate_;
  std::size_t orig_len_;
};

// Frame t covers padded samples [t * hop, t * hop + frame_len) of the signal
// preceded by hop zeros and followed by zeros up to the last frame, so every
// input sample lies under exactly two frames. Requires size() >= frame_len.
Spectrogram stft(const AudioBuffer& buf, const StftConfig& cfg = {});

// Weighted overlap-add with the analysis window as synthesis window and
// sum-of-squared-window normalization; output truncated to orig_len().
AudioBuffer istft(const Spectrogram& spec);

// Index of the bin whose center is nearest to `hz`.
std::size_t hz_to_bin(double hz, int sample_rate, std::size_t frame_len);

}  // namespace wavemux

#endif  // WAVEMUX_STFT_HPP_
