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


#include "wavemux/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "wavemux/errors.hpp"
#include "wavemux/fft.hpp"

namespace wavemux {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

// Intelligibility constants of the standard measure.
constexpr int kStoiRate = 10000;
constexpr std::size_t kStoiFrame = 256;
constexpr std::size_t kStoiFft = 512;
constexpr std::size_t kStoiBands = 15;
constexpr double kStoiMinFreq = 150.0;
constexpr std::size_t kStoiSegment = 30;
constexpr double kStoiBeta = -15.0;
constexpr double kStoiDynRange = 40.0;

// Symmetric Hann of length n without its zero end points.
std::vector<double> stoi_window(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i + 1) / static_cast<double>(n + 1));
  }
  return w;
}

std::vector<double> to_stoi_rate(const AudioBuffer& a) {
  if (a.sample_rate() == kStoiRate) return a.vec();
  const auto g = std::gcd(static_cast<std::size_t>(kStoiRate), static_cast<std::size_t>(a.sample_rate()));
  return resample_poly(a.samples(), kStoiRate / g, static_cast<std::size_t>(a.sample_rate()) / g);
}

// Drops frames of x more than the dynamic range below its loudest frame and
// overlap-adds the kept frames of both signals.
void remove_silent_frames(std::vector<double>& x, std::vector<double>& y) {
  const std::size_t hop = kStoiFrame / 2;
  const std::vector<double> w = stoi_window(kStoiFrame);
  if (x.size() < kStoiFrame) {
    x.clear();
    y.clear();
    return;
  }
  const std::size_t n_frames = (x.size() - kStoiFrame) / hop + 1;
  std::vector<double> db(n_frames);
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t f = 0; f < n_frames; ++f) {
    double e = 0.0;
    for (std::size_t i = 0; i < kStoiFrame; ++i) {
      const double v = w[i] * x[f * hop + i];
      e += v * v;
    }
    db[f] = 20.0 * std::log10(std::sqrt(e) + kEps);
    top = std::max(top, db[f]);
  }
  std::vector<std::size_t> keep;
  for (std::size_t f = 0; f < n_frames; ++f) {
    if (db[f] > top - kStoiDynRange) keep.push_back(f);
  }
  if (keep.empty()) {
    x.clear();
    y.clear();
    return;
  }
  const std::size_t out_len = (keep.size() - 1) * hop + kStoiFrame;
  std::vector<double> xs(out_len, 0.0), ys(out_len, 0.0);
  for (std::size_t j = 0; j < keep.size(); ++j) {
    for (std::size_t i = 0; i < kStoiFrame; ++i) {
      xs[j * hop + i] += w[i] * x[keep[j] * hop + i];
      ys[j * hop + i] += w[i] * y[keep[j] * hop + i];
    }
  }
  x = std::move(xs);
  y = std::move(ys);
}

// One-third octave band envelopes, [band][frame].
std::vector<std::vector<double>> third_octave_envelopes(const std::vector<double>& x) {
  const std::size_t hop = kStoiFrame / 2, n_bins = kStoiFft / 2 + 1;
  const std::vector<double> w = stoi_window(kStoiFrame);
  const std::size_t n_frames = x.size() < kStoiFrame ? 0 : (x.size() - kStoiFrame) / hop + 1;

  std::vector<std::size_t> lo(kStoiBands), hi(kStoiBands);
  auto nearest_bin = [&](double hz) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < n_bins; ++k) {
      const double f = static_cast<double>(k) * kStoiRate / static_cast<double>(kStoiFft);
      const double d = (f - hz) * (f - hz);
      if (d < best_d) {
        best_d = d;
        best = k;
      }
    }
    return best;
  };
  for (std::size_t b = 0; b < kStoiBands; ++b) {
    const double bd = static_cast<double>(b);
    lo[b] = nearest_bin(kStoiMinFreq * std::pow(2.0, (2.0 * bd - 1.0) / 6.0));
    hi[b] = nearest_bin(kStoiMinFreq * std::pow(2.0, (2.0 * bd + 1.0) / 6.0));
  }

  std::vector<std::vector<double>> env(kStoiBands, std::vector<double>(n_frames, 0.0));
  std::vector<double> frame(kStoiFft, 0.0);
  std::vector<Complex> spec(n_bins);
  for (std::size_t f = 0; f < n_frames; ++f) {
    std::fill(frame.begin(), frame.end(), 0.0);
    for (std::size_t i = 0; i < kStoiFrame; ++i) frame[i] = w[i] * x[f * hop + i];
    rfft(frame, spec);
    for (std::size_t b = 0; b < kStoiBands; ++b) {
      double p = 0.0;
      for (std::size_t k = lo[b]; k < hi[b]; ++k) p += std::norm(spec[k]);
      env[b][f] = std::sqrt(p);
    }
  }
  return env;
}

double i0(double x) { return std::cyl_bessel_i(0.0, x); }

}  // namespace

double snr_db(const AudioBuffer& ref, const AudioBuffer& test) {
  if (ref.size() != test.size()) throw InvalidArgument("snr_db: length mismatch");
  const double er = energy(ref.samples());
  if (er == 0.0) throw InvalidArgument("snr_db: reference is all zero");
  double ee = 0.0;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    const double d = ref[i] - test[i];
    ee += d * d;
  }
  if (ee == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(er / ee);
}

std::vector<double> resample_poly(std::span<const double> x, std::size_t up, std::size_t down) {
  if (up == 0 || down == 0) throw InvalidArgument("resample_poly: factors must be > 0");
  const std::size_t g = std::gcd(up, down);
  up /= g;
  down /= g;
  if (up == 1 && down == 1) return {x.begin(), x.end()};
  const std::size_t max_rate = std::max(up, down);
  const std::size_t half = 10 * max_rate, taps = 2 * half + 1;
  const double cutoff = 1.0 / static_cast<double>(max_rate);
  const double beta = 5.0;
  std::vector<double> h(taps);
  double sum = 0.0;
  for (std::size_t n = 0; n < taps; ++n) {
    const double m = static_cast<double>(n) - static_cast<double>(half);
    const double arg = std::numbers::pi * cutoff * m;
    const double sinc = m == 0.0 ? 1.0 : std::sin(arg) / arg;
    const double r = 2.0 * static_cast<double>(n) / static_cast<double>(taps - 1) - 1.0;
    h[n] = cutoff * sinc * i0(beta * std::sqrt(std::max(0.0, 1.0 - r * r))) / i0(beta);
    sum += h[n];
  }
  for (double& v : h) v *= static_cast<double>(up) / sum;

  const std::size_t out_len = (x.size() * up + down - 1) / down;
  std::vector<double> y(out_len, 0.0);
  const auto n_up = static_cast<std::ptrdiff_t>(x.size() * up);
  for (std::size_t m = 0; m < out_len; ++m) {
    // y[m] = sum_j h[half + m*down - j] * xu[j], xu nonzero at multiples of up.
    const auto center = static_cast<std::ptrdiff_t>(m * down);
    std::ptrdiff_t j_lo = std::max<std::ptrdiff_t>(0, center - static_cast<std::ptrdiff_t>(half));
    const std::ptrdiff_t j_hi = std::min<std::ptrdiff_t>(n_up - 1, center + static_cast<std::ptrdiff_t>(half));
    const auto u = static_cast<std::ptrdiff_t>(up);
    j_lo = ((j_lo + u - 1) / u) * u;
    double acc = 0.0;
    for (std::ptrdiff_t j = j_lo; j <= j_hi; j += u) {
      acc += h[static_cast<std::size_t>(static_cast<std::ptrdiff_t>(half) + center - j)] *
             x[static_cast<std::size_t>(j / u)];
    }
    y[m] = acc;
  }
  return y;
}

double stoi(const AudioBuffer& ref, const AudioBuffer& test) {
  if (ref.size() != test.size()) throw InvalidArgument("stoi: length mismatch");
  if (ref.sample_rate() != test.sample_rate()) throw InvalidArgument("stoi: sample rate mismatch");
  std::vector<double> x = to_stoi_rate(ref), y = to_stoi_rate(test);
  remove_silent_frames(x, y);
  const auto xe = third_octave_envelopes(x), ye = third_octave_envelopes(y);
  const std::size_t n_frames = xe[0].size();
  if (n_frames < kStoiSegment) {
    throw InvalidArgument("stoi: fewer than 384 ms of non-silent audio");
  }
  const double clip = 1.0 + std::pow(10.0, -kStoiBeta / 20.0);
  double total = 0.0;
  std::size_t count = 0;
  std::vector<double> xs(kStoiSegment), ys(kStoiSegment);
  for (std::size_t m = kStoiSegment; m <= n_frames; ++m) {
    for (std::size_t b = 0; b < kStoiBands; ++b) {
      double nx = 0.0, ny = 0.0;
      for (std::size_t i = 0; i < kStoiSegment; ++i) {
        xs[i] = xe[b][m - kStoiSegment + i];
        ys[i] = ye[b][m - kStoiSegment + i];
        nx += xs[i] * xs[i];
        ny += ys[i] * ys[i];
      }
      const double norm = std::sqrt(nx) / (std::sqrt(ny) + kEps);
      double mx = 0.0, my = 0.0;
      for (std::size_t i = 0; i < kStoiSegment; ++i) {
        ys[i] = std::min(ys[i] * norm, xs[i] * clip);
        mx += xs[i];
        my += ys[i];
      }
      mx /= kStoiSegment;
      my /= kStoiSegment;
      double sxy = 0.0, sxx = 0.0, syy = 0.0;
      for (std::size_t i = 0; i < kStoiSegment; ++i) {
        const double a = xs[i] - mx, c = ys[i] - my;
        sxy += a * c;
        sxx += a * a;
        syy += c * c;
      }
      total += sxy / ((std::sqrt(sxx) + kEps) * (std::sqrt(syy) + kEps));
      ++count;
    }
  }
  return std::clamp(total / static_cast<double>(count), 0.0, 1.0);
}

double roc_auc(std::span<const double> pos, std::span<const double> neg) {
  if (pos.empty() || neg.empty()) throw InvalidArgument("roc_auc: empty score list");
  std::vector<double> sorted(neg.begin(), neg.end());
  std::sort(sorted.begin(), sorted.end());
  double u = 0.0;
  for (double p : pos) {
    const auto lo = std::lower_bound(sorted.begin(), sorted.end(), p);
    const auto hi = std::upper_bound(lo, sorted.end(), p);
    u += static_cast<double>(lo - sorted.begin()) + 0.5 * static_cast<double>(hi - lo);
  }
  return u / (static_cast<double>(pos.size()) * static_cast<double>(neg.size()));
}

double threshold_at_fpr(std::span<const double> neg, double fpr) {
  if (neg.empty()) throw InvalidArgument("threshold: no negative scores");
  if (!(fpr > 0.0 && fpr < 1.0)) throw InvalidArgument("threshold: fpr must be in (0, 1)");
  for (double v : neg) {
    if (std::isnan(v)) throw InvalidArgument("threshold: NaN score");
  }
  std::vector<double> desc(neg.begin(), neg.end());
  std::sort(desc.begin(), desc.end(), std::greater<>());
  const auto k = static_cast<std::size_t>(std::floor(fpr * static_cast<double>(desc.size())));
  // Walk down the distinct values while the count at or above stays <= k.
  double best = std::nextafter(desc.front(), std::numeric_limits<double>::infinity());
  std::size_t i = 0;
  while (i < desc.size()) {
    std::size_t j = i;
    while (j < desc.size() && desc[j] == desc[i]) ++j;
    if (j > k) break;
    best = desc[i];
    i = j;
  }
  return best;
}

double fraction_at_or_above(std::span<const double> scores, double threshold) {
  if (scores.empty()) throw InvalidArgument("no scores");
  std::size_t n = 0;
  for (double s : scores) n += s >= threshold ? 1 : 0;
  return static_cast<double>(n) / static_cast<double>(scores.size());
}

double tpr_at_fpr(std::span<const double> pos, std::span<const double> neg, double fpr) {
  if (pos.empty()) throw InvalidArgument("tpr_at_fpr: no positive scores");
  return fraction_at_or_above(pos, threshold_at_fpr(neg, fpr));
}

double calibrate_threshold(std::span<const double> neg, double target_fpr) {
  if (!(target_fpr > 0.0 && target_fpr < 1.0)) throw InvalidArgument("calibrate_threshold: fpr must be in (0, 1)");
  if (static_cast<double>(neg.size()) * target_fpr < 1.0 - 1e-9) {
    throw InvalidArgument("calibrate_threshold: need at least 1/fpr negative scores");
  }
  return threshold_at_fpr(neg, target_fpr);
}

}  // namespace wavemux
