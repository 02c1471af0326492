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


#ifndef WAVEMUX_MUX_HPP_
#define WAVEMUX_MUX_HPP_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "wavemux/audio.hpp"
#include "wavemux/backends.hpp"
#include "wavemux/stft.hpp"

namespace wavemux {

enum class MaskLabel { kNaive, kFdm, kTdm, kPatfm };
std::string to_string(MaskLabel label);

// Geometry of the T-F grid a mask applies to.
struct TfDims {
  std::size_t n_frames = 0;
  int sample_rate = 16000;
  StftConfig stft{};

  std::size_t n_bins() const { return stft.n_bins(); }
  static TfDims of(const Spectrogram& spec);
  static TfDims for_signal(std::size_t len, int sample_rate, const StftConfig& cfg = {});
  friend bool operator==(const TfDims&, const TfDims&) = default;
};

// Non-negative gain per T-F cell, row-major [frame][bin].
struct RoutingMask {
  std::vector<double> grid;
  TfDims dims;
  MaskLabel label = MaskLabel::kNaive;

  double at(std::size_t t, std::size_t k) const { return grid[t * dims.n_bins() + k]; }
  double& at(std::size_t t, std::size_t k) { return grid[t * dims.n_bins() + k]; }
};

struct Band {
  double lo_hz = 0.0;
  double hi_hz = 0.0;
};

// Half-open bands [lo, hi) by bin center frequency. A band whose upper edge
// is the Nyquist frequency also takes the Nyquist bin.
struct BandPlan {
  std::vector<Band> bands;
  bool require_disjoint = true;

  // [0,4k)/[4k,8k) for two watermarks, [0,2k)/[2k,5k)/[5k,8k) for three,
  // equal widths otherwise; edges are clamped to the Nyquist frequency.
  static BandPlan default_for(std::size_t n_watermarks, int sample_rate);
  void validate(int sample_rate) const;
  bool contains(std::size_t band, std::size_t bin, const TfDims& dims) const;
};

// Round-robin ownership of consecutive slots of ceil(slot_len_ms * fs / 1000 / hop) frames.
struct SlotPlan {
  double slot_len_ms = 60.0;
  std::size_t n_watermarks = 2;

  void validate() const;
  std::size_t frames_per_slot(int sample_rate, std::size_t hop) const;
  std::size_t owner(std::size_t frame, int sample_rate, std::size_t hop) const;
};

struct MuxResult {
  AudioBuffer audio;
  // Samples whose magnitude exceeded 1 before clipping.
  std::size_t clipped = 0;
};

// Clamps every sample to [-1, 1] and returns how many were out of range.
std::size_t clip_unit(std::span<double> x);

// x + sum_i alphas[i] * delta_i, clipped.
MuxResult mux_parallel(const AudioBuffer& x, std::span<const Perturbation> perturbations,
                       std::span<const double> alphas);

// Embeds each stage on the previous stage's (clipped) output, scaling stage i's
// perturbation by gains[i] (all 1 when empty). The clip count is summed over
// stages.
MuxResult mux_sequential(const AudioBuffer& x, std::span<const WatermarkSpec> order,
                         const BackendConfig& cfg = {}, std::span<const double> gains = {});

std::vector<RoutingMask> make_naive_masks(std::span<const double> alphas, const TfDims& dims);
std::vector<RoutingMask> make_fdm_masks(const BandPlan& plan, std::span<const double> alphas,
                                        const TfDims& dims);
std::vector<RoutingMask> make_tdm_masks(const SlotPlan& plan, std::span<const double> alphas,
                                        const TfDims& dims);

// istft(X + sum_i W_i * stft(delta_i)), clipped.
MuxResult apply_tf_routing(const AudioBuffer& x, std::span<const Perturbation> perturbations,
                           std::span<const RoutingMask> masks, const StftConfig& cfg = {});

}  // namespace wavemux

#endif  // WAVEMUX_MUX_HPP_
