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

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "cell_projection.hpp"
#include "wavemux/backends.hpp"
#include "wavemux/errors.hpp"
#include "wavemux/rng.hpp"

namespace wavemux {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct PhaseLayout {
  std::vector<std::size_t> bins;
  CounterRng dither;
  CounterRng chips;
};

PhaseLayout layout(const WatermarkKey& key, int sample_rate, const PhaseParams& p) {
  if (p.frame_stride == 0) throw InvalidArgument("frame_stride must be > 0");
  return {detail::select_bins(key.seed, rng_stream::kPhaseBins, p.band_lo_hz, p.band_hi_hz,
                              p.n_bins, sample_rate, p.stft.frame_len, p.bin_spacing),
          CounterRng(key.seed, rng_stream::kPhaseDither), CounterRng(key.seed, rng_stream::kPhaseSigns)};
}

void check_theta(double theta) {
  if (!(theta > 0.0) || theta > std::numbers::pi / 4.0 + 1e-12) {
    throw InvalidArgument("phase: theta must be in (0, pi/4]");
  }
}

}  // namespace

double phase_lattice_spacing(double theta) {
  check_theta(theta);
  return kTwoPi / std::ceil(std::numbers::pi / theta - 1e-9);
}

Perturbation phase_embed(const AudioBuffer& x, const Payload& payload, const WatermarkKey& key,
                         double theta, const PhaseParams& params) {
  const double s = phase_lattice_spacing(theta);
  if (x.size() < params.stft.frame_len) throw InvalidArgument("phase: signal shorter than one STFT frame");
  const PhaseLayout lay = layout(key, x.sample_rate(), params);
  const std::size_t k_bins = lay.bins.size(), n_bits = payload.size(),
                    stride = params.frame_stride;

  const Spectrogram host = stft(x, params.stft);
  std::vector<Complex> target(((host.n_frames() + stride - 1) / stride) * k_bins);
  double scale = 0.0;
  for (std::size_t t = 0; t < host.n_frames(); t += stride) {
    for (std::size_t j = 0; j < k_bins; ++j) {
      const std::size_t cell = (t / stride) * k_bins + j;
      const std::uint64_t coset = payload[cell % n_bits] ^ (lay.chips.at(cell) >> 63);
      const double offset = lay.dither.uniform_at(cell) * s + static_cast<double>(coset) * s / 2.0;
      const Complex c = host.at(t, lay.bins[j]);
      const double phase = std::arg(c);
      const double snapped = offset + s * std::round((phase - offset) / s);
      target[cell] = std::polar(std::abs(c), snapped);
      scale = std::max(scale, std::abs(c));
    }
  }
  if (scale == 0.0) return {std::vector<double>(x.size(), 0.0), BackendId::kPhase};

  std::vector<char> marked(host.grid().size(), 0);
  for (std::size_t t = 0; t < host.n_frames(); t += stride) {
    for (std::size_t j = 0; j < k_bins; ++j) marked[t * host.n_bins() + lay.bins[j]] = 1;
  }

  // Unmarked cells keep their current phase but get the host magnitude back,
  // which keeps the overlap-add leakage of the phase changes out of the
  // magnitude spectrogram.
  auto project = [&](Spectrogram& spec) {
    const auto grid = spec.grid();
    const auto orig = host.grid();
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (marked[i]) continue;
      const double mag = std::abs(grid[i]);
      grid[i] = mag > 0.0 ? grid[i] * (std::abs(orig[i]) / mag) : orig[i];
    }
    double worst = 0.0;
    for (std::size_t t = 0; t < spec.n_frames(); t += stride) {
      for (std::size_t j = 0; j < k_bins; ++j) {
        Complex& c = spec.at(t, lay.bins[j]);
        const Complex& want = target[(t / stride) * k_bins + j];
        worst = std::max(worst, std::abs(c - want));
        c = want;
      }
    }
    return worst / scale;
  };
  return {detail::project_cells(x, params.stft, params.iterations, 1e-4, project), BackendId::kPhase};
}

DetectionScore phase_detect(const AudioBuffer& y, const WatermarkKey& key, std::size_t n_bits,
                            const PhaseParams& params) {
  if (n_bits == 0 || n_bits > 64) throw InvalidArgument("phase_detect: payload must have 1..64 bits");
  const double s = phase_lattice_spacing(params.theta);
  if (y.size() < params.stft.frame_len) throw InvalidArgument("phase: signal shorter than one STFT frame");
  const PhaseLayout lay = layout(key, y.sample_rate(), params);
  const std::size_t k_bins = lay.bins.size(), stride = params.frame_stride;
  const Spectrogram spec = stft(y, params.stft);

  // Weights are magnitudes capped at their upper quartile, so a few loud
  // harmonics cannot dominate and the per-bit sums stay close to Gaussian.
  std::vector<double> mags;
  for (std::size_t t = 0; t < spec.n_frames(); t += stride) {
    for (std::size_t j = 0; j < k_bins; ++j) mags.push_back(std::abs(spec.at(t, lay.bins[j])));
  }
  const auto q = mags.begin() + static_cast<std::ptrdiff_t>(mags.size() * 3 / 4);
  std::nth_element(mags.begin(), q, mags.end());
  const double cap = *q;

  // sum[b] > 0 favours bit 1; var[b] is its exact null variance given the
  // weights, since the dither makes (phase - dither) mod s uniform.
  std::vector<double> sum(n_bits, 0.0), var(n_bits, 0.0);
  double weight_total = 0.0;
  for (std::size_t t = 0; t < spec.n_frames(); t += stride) {
    for (std::size_t j = 0; j < k_bins; ++j) {
      const std::size_t cell = (t / stride) * k_bins + j;
      const Complex c = spec.at(t, lay.bins[j]);
      const double w = std::min(std::abs(c), cap);
      if (w == 0.0) continue;
      const double corr = std::cos(kTwoPi * (std::arg(c) - lay.dither.uniform_at(cell) * s) / s);
      const double chip = (lay.chips.at(cell) >> 63) ? -1.0 : 1.0;
      const std::size_t bit = cell % n_bits;
      sum[bit] -= w * corr * chip;
      var[bit] += w * w / 2.0;
      weight_total += w;
    }
  }

  DetectionScore score;
  score.bits.resize(n_bits);
  std::vector<double> z_bits(n_bits, 0.0);
  double abs_sum = 0.0;
  for (std::size_t b = 0; b < n_bits; ++b) {
    z_bits[b] = var[b] > 0.0 ? sum[b] / std::sqrt(var[b]) : 0.0;
    score.bits[b] = z_bits[b] > 0.0 ? 1 : 0;
    abs_sum += std::abs(sum[b]);
  }
  score.raw = weight_total > 0.0 ? abs_sum / weight_total : 0.0;
  score.z = detail::half_normal_presence(z_bits);
  score.logit = score.z;
  return score;
}

}  // namespace wavemux
