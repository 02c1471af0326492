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


#ifndef WAVEMUX_PATFM_HPP_
#define WAVEMUX_PATFM_HPP_

#include <cstddef>
#include <span>
#include <vector>

#include "wavemux/audio.hpp"
#include "wavemux/backends.hpp"
#include "wavemux/mux.hpp"
#include "wavemux/stft.hpp"

namespace wavemux {

// Per-tile masking headroom in [0, 1], row-major [slot][band]. A slot spans
// frames_per_slot consecutive STFT frames; the last slot may be shorter.
struct PerceptualMask {
  std::vector<double> tiles;
  std::size_t n_slots = 0;
  std::size_t n_bands = 0;
  double slot_len_ms = 60.0;
  std::size_t frames_per_slot = 1;
  BandPlan bands;

  double at(std::size_t slot, std::size_t band) const { return tiles[slot * n_bands + band]; }
  double& at(std::size_t slot, std::size_t band) { return tiles[slot * n_bands + band]; }
};

// Geometric over arithmetic mean of power (floored at 1e-12) per tile; exactly
// 1 when the powers agree to 12 significant digits.
PerceptualMask spectral_flatness(const Spectrogram& spec, const BandPlan& bands, double slot_len_ms);

// Per band, the floor is the 10th-percentile tile power in dB (lower nearest
// rank over slots); tile value is clamp((dB - floor) / 30, 0, 1). Needs at
// least 10 slots.
PerceptualMask local_snr_mask(const Spectrogram& spec, const BandPlan& bands, double slot_len_ms);

enum class MaskSource { kCombined, kFlatness, kLocalSnr };

// kCombined is the elementwise mean of the two estimates.
PerceptualMask perceptual_mask(const Spectrogram& spec, const BandPlan& bands, double slot_len_ms,
                               MaskSource source = MaskSource::kCombined);

struct GainCurve {
  double floor = 0.25;
  double slope = 0.75;
  double operator()(double m) const { return floor + slope * m; }
};

struct MultiplexPlan {
  std::vector<std::size_t> tile_owner;
  std::vector<double> tile_gain;
  std::size_t n_slots = 0;
  std::size_t n_bands = 0;

  std::size_t owner(std::size_t slot, std::size_t band) const { return tile_owner[slot * n_bands + band]; }
  double gain(std::size_t slot, std::size_t band) const { return tile_gain[slot * n_bands + band]; }
};

// Tiles are visited by descending mask value, ties by (slot, band), and dealt
// round-robin to the watermarks. With `eligible` (per watermark, per band) a
// tile goes to the next watermark in the rotation allowed on its band; a band
// nobody may use is open to all. Gain is alphas[owner] * g(mask).
MultiplexPlan build_plan(const PerceptualMask& mask, std::size_t n_wm, std::span<const double> alphas,
                         const GainCurve& gain = {},
                         const std::vector<std::vector<bool>>& eligible = {});

// Per-bin routing masks realizing the plan on a grid of the given geometry.
std::vector<RoutingMask> expand_plan(const MultiplexPlan& plan, const PerceptualMask& mask,
                                     const TfDims& dims);

// Tile bands used by PA-TFM unless configured otherwise.
BandPlan default_tile_bands(int sample_rate);

// Band in which a backend embeds, from its parameters.
Band backend_band(BackendId id, const BackendConfig& cfg);

struct PaTfmConfig {
  BandPlan bands;  // empty means default_tile_bands()
  double slot_len_ms = 60.0;
  MaskSource source = MaskSource::kCombined;
  GainCurve gain{};
  // Restrict each watermark to tile bands overlapping its backend's band.
  bool backend_affinity = true;
};

struct PaTfmResult {
  MuxResult mux;
  PerceptualMask mask;
  MultiplexPlan plan;
};

// Perturbations are computed on x, then routed tile by tile with gain.
PaTfmResult pa_tfm_embed(const AudioBuffer& x, std::span<const WatermarkSpec> specs,
                         std::span<const double> alphas, const PaTfmConfig& cfg = {},
                         const BackendConfig& backend_cfg = {});

// Non-negative weights normalized to sum 1.
class FusionWeights {
 public:
  explicit FusionWeights(std::vector<double> w);
  static FusionWeights uniform(std::size_t n);
  std::span<const double> values() const { return w_; }
  std::size_t size() const { return w_.size(); }
  // L2 norm; the null standard deviation of the fused logit.
  double norm() const;

 private:
  std::vector<double> w_;
};

// logit = sum_i w_i * logit_i; raw and z carry the same value.
DetectionScore fuse_scores(std::span<const DetectionScore> scores, const FusionWeights& w);

// w_i proportional to mean positive z minus mean negative z of detector i on
// a calibration batch (negative separations count as 0); uniform if none is
// positive.
FusionWeights calibrate_fusion_weights(std::span<const std::vector<double>> pos_z,
                                       std::span<const std::vector<double>> neg_z);

}  // namespace wavemux

#endif  // WAVEMUX_PATFM_HPP_
