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
#include <array>
#include <cmath>
#include <vector>

#include "wavemux/backends.hpp"
#include "wavemux/errors.hpp"
#include "wavemux/rng.hpp"

namespace wavemux {

namespace {

void check_capacity(std::size_t len, std::size_t n_bits, const SsParams& params) {
  if (n_bits == 0 || n_bits > 64) throw InvalidArgument("ss: payload must have 1..64 bits");
  if (params.block_len == 0) throw InvalidArgument("ss: block_len must be positive");
  if (len < params.stft.frame_len) throw InvalidArgument("ss: signal shorter than one STFT frame");
  const std::size_t blocks = (len + params.block_len - 1) / params.block_len;
  // Every bit needs at least one block in each of the two detection halves.
  if (blocks < 2 * n_bits) {
    throw InvalidArgument("ss: payload of " + std::to_string(n_bits) +
                          " bits exceeds chip capacity (" + std::to_string(blocks) + " blocks)");
  }
}

bool in_band(double hz, const SsParams& p) { return hz >= p.band_lo_hz && hz < p.band_hi_hz; }

// Frame-wise spectral whitening restricted to the chip band.
std::vector<double> whiten(const AudioBuffer& y, const SsParams& p) {
  Spectrogram spec = stft(y, p.stft);
  const std::size_t bins = spec.n_bins();
  const double floor_ratio = std::pow(10.0, p.whiten_floor_db / 20.0);
  const std::size_t w = p.whiten_smooth_bins;
  std::vector<double> mag(bins), prefix(bins + 1), smooth(bins);
  for (std::size_t t = 0; t < spec.n_frames(); ++t) {
    auto frame = spec.frame(t);
    for (std::size_t k = 0; k < bins; ++k) mag[k] = std::abs(frame[k]);
    prefix[0] = 0.0;
    for (std::size_t k = 0; k < bins; ++k) prefix[k + 1] = prefix[k] + mag[k];
    double peak = 0.0;
    for (std::size_t k = 0; k < bins; ++k) {
      const std::size_t lo = k >= w ? k - w : 0;
      const std::size_t hi = std::min(bins, k + w + 1);
      smooth[k] = (prefix[hi] - prefix[lo]) / static_cast<double>(hi - lo);
      peak = std::max(peak, smooth[k]);
    }
    const double floor = peak * floor_ratio;
    for (std::size_t k = 0; k < bins; ++k) {
      if (peak > 0.0 && in_band(spec.bin_hz(k), p)) {
        frame[k] /= std::max(smooth[k], floor);
      } else {
        frame[k] = 0.0;
      }
    }
  }
  return istft(spec).vec();
}

}  // namespace

Perturbation ss_embed(const AudioBuffer& x, const Payload& payload, const WatermarkKey& key,
                      double alpha, const SsParams& params) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw InvalidArgument("ss_embed: alpha must be > 0");
  const std::size_t len = x.size(), n_bits = payload.size();
  check_capacity(len, n_bits, params);

  const CounterRng chips(key.seed, rng_stream::kSsChips);
  std::vector<double> train(len);
  for (std::size_t n = 0; n < len; ++n) {
    const std::size_t bit = (n / params.block_len) % n_bits;
    train[n] = (payload[bit] ? 1.0 : -1.0) * chips.sign_at(n);
  }
  Spectrogram spec = stft(AudioBuffer(std::move(train), x.sample_rate()), params.stft);
  for (std::size_t t = 0; t < spec.n_frames(); ++t) {
    for (std::size_t k = 0; k < spec.n_bins(); ++k) {
      if (!in_band(spec.bin_hz(k), params)) spec.at(t, k) = 0.0;
    }
  }
  std::vector<double> delta = istft(spec).vec();
  const double rms = std::sqrt(energy(delta) / static_cast<double>(len));
  if (rms <= 0.0) throw InvalidArgument("ss_embed: chip band is empty");
  for (double& d : delta) d = alpha * (d / rms);
  return {std::move(delta), BackendId::kSpreadSpectrum};
}

DetectionScore ss_detect(const AudioBuffer& y, const WatermarkKey& key, std::size_t n_bits,
                         const SsParams& params) {
  const std::size_t len = y.size();
  check_capacity(len, n_bits, params);
  const std::vector<double> w = whiten(y, params);
  const CounterRng chips(key.seed, rng_stream::kSsChips);
  std::vector<double> sign(len);
  for (std::size_t n = 0; n < len; ++n) sign[n] = chips.sign_at(n);

  std::vector<double> sq_prefix(len + 1, 0.0);
  for (std::size_t n = 0; n < len; ++n) sq_prefix[n + 1] = sq_prefix[n] + w[n] * w[n];

  // corr[half][lag][bit], power[half][lag][bit]
  const std::size_t max_lag = std::min(params.max_lag, len / 4);
  const std::size_t n_lags = 2 * max_lag + 1;
  const std::size_t block = params.block_len;
  const std::size_t n_blocks = (len + block - 1) / block;
  std::array<std::vector<double>, 2> corr, power;
  for (int h = 0; h < 2; ++h) {
    corr[h].assign(n_lags * n_bits, 0.0);
    power[h].assign(n_lags * n_bits, 0.0);
  }
  for (std::size_t li = 0; li < n_lags; ++li) {
    const long lag = static_cast<long>(li) - static_cast<long>(max_lag);
    for (std::size_t j = 0; j < n_blocks; ++j) {
      const std::size_t bit = j % n_bits;
      const int half = static_cast<int>((j / n_bits) % 2);
      // samples n in the block with 0 <= n + lag < len
      long lo = static_cast<long>(j * block), hi = static_cast<long>(std::min(len, (j + 1) * block));
      lo = std::max(lo, -lag);
      hi = std::min(hi, static_cast<long>(len) - lag);
      if (lo >= hi) continue;
      const double* wp = w.data() + lag;
      double a0 = 0.0, a1 = 0.0, a2 = 0.0, a3 = 0.0;
      long n = lo;
      for (; n + 4 <= hi; n += 4) {
        a0 += wp[n] * sign[n];
        a1 += wp[n + 1] * sign[n + 1];
        a2 += wp[n + 2] * sign[n + 2];
        a3 += wp[n + 3] * sign[n + 3];
      }
      for (; n < hi; ++n) a0 += wp[n] * sign[n];
      corr[half][li * n_bits + bit] += (a0 + a1) + (a2 + a3);
      power[half][li * n_bits + bit] += sq_prefix[hi + lag] - sq_prefix[lo + lag];
    }
  }

  // Best lag per half by the chi-square style statistic sum_b c^2 / e,
  // visiting lags in the order 0, +1, -1, +2, ... so ties prefer small shifts.
  std::array<std::size_t, 2> best{max_lag, max_lag};
  for (int h = 0; h < 2; ++h) {
    double best_stat = -1.0;
    for (std::size_t step = 0; step < n_lags; ++step) {
      const long off = (step % 2 == 1) ? static_cast<long>((step + 1) / 2) : -static_cast<long>(step / 2);
      const std::size_t li = static_cast<std::size_t>(static_cast<long>(max_lag) + off);
      double stat = 0.0;
      for (std::size_t b = 0; b < n_bits; ++b) {
        const double e = power[h][li * n_bits + b];
        if (e > 0.0) stat += corr[h][li * n_bits + b] * corr[h][li * n_bits + b] / e;
      }
      if (stat > best_stat) {
        best_stat = stat;
        best[h] = li;
      }
    }
  }

  std::vector<double> z_bits(n_bits, 0.0);
  double raw = 0.0;
  DetectionScore score;
  score.bits.resize(n_bits);
  for (std::size_t b = 0; b < n_bits; ++b) {
    double sum = 0.0;
    int sides = 0;
    for (int h = 0; h < 2; ++h) {
      const std::size_t li = best[1 - h];  // lag chosen on the other half
      const double e = power[h][li * n_bits + b];
      if (e > 0.0) {
        sum += corr[h][li * n_bits + b] / std::sqrt(e);
        ++sides;
      }
    }
    z_bits[b] = sides > 0 ? sum / std::sqrt(static_cast<double>(sides)) : 0.0;
    score.bits[b] = z_bits[b] > 0.0 ? 1 : 0;
    const double samples_per_bit = static_cast<double>(len) / static_cast<double>(n_bits);
    raw += std::abs(z_bits[b]) / std::sqrt(samples_per_bit);
  }
  score.raw = raw / static_cast<double>(n_bits);
  score.z = detail::half_normal_presence(z_bits);
  score.logit = score.z;
  return score;
}

}  // namespace wavemux
