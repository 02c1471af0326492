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

#include <cmath>
#include <vector>

#include "cell_projection.hpp"
#include "wavemux/backends.hpp"
#include "wavemux/errors.hpp"
#include "wavemux/rng.hpp"

namespace wavemux {

namespace {

struct QimLayout {
  std::vector<std::size_t> bins;
  CounterRng dither;
};

QimLayout layout(const WatermarkKey& key, int sample_rate, const QimParams& p) {
  if (p.frame_stride == 0) throw InvalidArgument("frame_stride must be > 0");
  return {detail::select_bins(key.seed, rng_stream::kQimBins, p.band_lo_hz, p.band_hi_hz, p.n_bins,
                              sample_rate, p.stft.frame_len, p.bin_spacing),
          CounterRng(key.seed, rng_stream::kQimDither)};
}

void check_length(std::size_t len, const QimParams& p) {
  if (len < p.stft.frame_len) throw InvalidArgument("qim: signal shorter than one STFT frame");
}

}  // namespace

Perturbation qim_embed(const AudioBuffer& x, const Payload& payload, const WatermarkKey& key,
                       double step, const QimParams& params) {
  if (!(step > 0.0) || !std::isfinite(step)) throw InvalidArgument("qim_embed: step must be > 0");
  check_length(x.size(), params);
  const QimLayout lay = layout(key, x.sample_rate(), params);
  const std::size_t k_bins = lay.bins.size(), n_bits = payload.size(),
                    stride = params.frame_stride;

  // Targets come from the host's magnitudes and stay fixed while iterating.
  const Spectrogram host = stft(x, params.stft);
  std::vector<double> target(((host.n_frames() + stride - 1) / stride) * k_bins);
  for (std::size_t t = 0; t < host.n_frames(); t += stride) {
    for (std::size_t j = 0; j < k_bins; ++j) {
      const std::size_t cell = (t / stride) * k_bins + j;
      const double offset =
          std::fmod(payload[cell % n_bits] * step / 2.0 + lay.dither.uniform_at(cell) * step, step);
      const double mag = std::abs(host.at(t, lay.bins[j]));
      double q = offset + step * std::round((mag - offset) / step);
      if (q < 0.0) q += step;
      target[cell] = q;
    }
  }

  auto project = [&](Spectrogram& spec) {
    double worst = 0.0;
    for (std::size_t t = 0; t < spec.n_frames(); t += stride) {
      for (std::size_t j = 0; j < k_bins; ++j) {
        Complex& c = spec.at(t, lay.bins[j]);
        const double mag = std::abs(c);
        const double q = target[(t / stride) * k_bins + j];
        worst = std::max(worst, std::abs(mag - q));
        c = mag > 0.0 ? c * (q / mag) : Complex(q, 0.0);
      }
    }
    return worst / step;
  };
  return {detail::project_cells(x, params.stft, params.iterations, 1e-3, project), BackendId::kQim};
}

DetectionScore qim_detect(const AudioBuffer& y, const WatermarkKey& key, std::size_t n_bits,
                          const QimParams& params) {
  if (n_bits == 0 || n_bits > 64) throw InvalidArgument("qim_detect: payload must have 1..64 bits");
  check_length(y.size(), params);
  const QimLayout lay = layout(key, y.sample_rate(), params);
  const std::size_t k_bins = lay.bins.size(), stride = params.frame_stride;
  const double step = params.step;
  if (!(step > 0.0)) throw InvalidArgument("qim_detect: step must be > 0");
  const Spectrogram spec = stft(y, params.stft);

  std::vector<std::size_t> ones(n_bits, 0), count(n_bits, 0);
  for (std::size_t t = 0; t < spec.n_frames(); t += stride) {
    for (std::size_t j = 0; j < k_bins; ++j) {
      const std::size_t cell = (t / stride) * k_bins + j;
      const double u = (std::abs(spec.at(t, lay.bins[j])) - lay.dither.uniform_at(cell) * step) / step;
      const double frac = u - std::floor(u);
      const std::size_t bit = cell % n_bits;
      ones[bit] += (frac >= 0.25 && frac < 0.75) ? 1 : 0;
      ++count[bit];
    }
  }

  DetectionScore score;
  score.bits.resize(n_bits);
  double dev = 0.0, mean = 0.0, var = 0.0, matched = 0.0, total = 0.0;
  for (std::size_t b = 0; b < n_bits; ++b) {
    const double n = static_cast<double>(count[b]), k = static_cast<double>(ones[b]);
    score.bits[b] = k > n / 2.0 ? 1 : 0;
    dev += std::abs(k - n / 2.0);
    const double mad = detail::binomial_mad(count[b]);
    mean += mad;
    var += n / 4.0 - mad * mad;
    matched += std::max(k, n - k);
    total += n;
  }
  score.raw = matched / total - 0.5;
  score.z = var > 0.0 ? (dev - mean) / std::sqrt(var) : 0.0;
  score.logit = score.z;
  return score;
}

}  // namespace wavemux
