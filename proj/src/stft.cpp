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

#include "wavemux/stft.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>

#include "wavemux/errors.hpp"

namespace wavemux {

void StftConfig::validate() const {
  if (frame_len < 4 || !std::has_single_bit(frame_len)) {
    throw InvalidArgument("StftConfig: frame_len must be a power of two >= 4");
  }
  if (hop != frame_len / 2) throw InvalidArgument("StftConfig: hop must equal frame_len / 2");
}

std::vector<double> hann_window(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double s = std::sin(std::numbers::pi * static_cast<double>(i) / static_cast<double>(n));
    w[i] = s * s;
  }
  return w;
}

Spectrogram::Spectrogram(std::vector<Complex> grid, std::size_t n_frames, StftConfig config,
                         int sample_rate, std::size_t orig_len)
    : grid_(std::move(grid)),
      n_frames_(n_frames),
      config_(config),
      sample_rate_(sample_rate),
      orig_len_(orig_len) {
  config_.validate();
  if (grid_.size() != n_frames_ * config_.n_bins()) {
    throw InvalidArgument("Spectrogram: grid size does not match n_frames x n_bins");
  }
  if (orig_len_ == 0 || n_frames_ != config_.frames_for(orig_len_)) {
    throw InvalidArgument("Spectrogram: frame count inconsistent with orig_len");
  }
  if (sample_rate_ <= 0) throw InvalidArgument("Spectrogram: bad sample rate");
}

Spectrogram& Spectrogram::operator+=(const Spectrogram& other) {
  if (other.n_frames_ != n_frames_ || !(other.config_ == config_)) {
    throw InvalidArgument("Spectrogram: dimension mismatch in +=");
  }
  for (std::size_t i = 0; i < grid_.size(); ++i) grid_[i] += other.grid_[i];
  return *this;
}

Spectrogram stft(const AudioBuffer& buf, const StftConfig& cfg) {
  cfg.validate();
  const std::size_t n = cfg.frame_len, hop = cfg.hop, len = buf.size();
  if (len < n) throw InvalidArgument("stft: buffer shorter than one frame");
  const std::size_t frames = cfg.frames_for(len);
  const std::size_t bins = cfg.n_bins();
  const auto window = hann_window(n);
  const auto x = buf.samples();

  std::vector<Complex> grid(frames * bins);
  std::vector<double> frame(n);
  for (std::size_t t = 0; t < frames; ++t) {
    for (std::size_t i = 0; i < n; ++i) {
      // padded index p = t * hop + i maps to input sample p - hop
      const std::size_t p = t * hop + i;
      const double v = (p >= hop && p - hop < len) ? x[p - hop] : 0.0;
      frame[i] = window[i] * v;
    }
    rfft(frame, std::span<Complex>(grid.data() + t * bins, bins));
  }
  return Spectrogram(std::move(grid), frames, cfg, buf.sample_rate(), len);
}

AudioBuffer istft(const Spectrogram& spec) {
  const auto& cfg = spec.config();
  const std::size_t n = cfg.frame_len, hop = cfg.hop;
  const std::size_t frames = spec.n_frames();
  const std::size_t padded = (frames - 1) * hop + n;
  const auto window = hann_window(n);

  std::vector<double> acc(padded, 0.0), norm(padded, 0.0), frame(n);
  for (std::size_t t = 0; t < frames; ++t) {
    irfft(spec.frame(t), frame);
    for (std::size_t i = 0; i < n; ++i) {
      acc[t * hop + i] += window[i] * frame[i];
      norm[t * hop + i] += window[i] * window[i];
    }
  }
  std::vector<double> out(spec.orig_len());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const std::size_t p = i + hop;
    out[i] = acc[p] / norm[p];  // norm >= 0.5 for every covered sample
  }
  return AudioBuffer(std::move(out), spec.sample_rate());
}

std::size_t hz_to_bin(double hz, int sample_rate, std::size_t frame_len) {
  const double k = std::round(hz * static_cast<double>(frame_len) / sample_rate);
  return static_cast<std::size_t>(std::clamp(k, 0.0, static_cast<double>(frame_len / 2)));
}

}  // namespace wavemux
