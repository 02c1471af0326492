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
#include <numeric>

#include <gtest/gtest.h>

#include "test_util.hpp"
#include "wavemux/backends.hpp"
#include "wavemux/errors.hpp"
#include "wavemux/metrics.hpp"
#include "wavemux/rng.hpp"
#include "wavemux/stft.hpp"

namespace wavemux {
namespace {

using testing::noise;
using testing::speech;

WatermarkSpec spec(BackendId id, std::uint64_t key, double strength = 0.0, std::uint64_t payload_seed = 5) {
  return {id, Payload::random(payload_seed), {key, id}, strength};
}

AudioBuffer marked(const AudioBuffer& x, const WatermarkSpec& s) {
  return apply_perturbation(x, embed(x, s));
}

// Two-sample Kolmogorov-Smirnov p-value (asymptotic).
double ks_pvalue(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == v) ++i;
    while (j < b.size() && b[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / a.size() - static_cast<double>(j) / b.size()));
  }
  const double ne = static_cast<double>(a.size() * b.size()) / static_cast<double>(a.size() + b.size());
  const double lambda = (std::sqrt(ne) + 0.12 + 0.11 / std::sqrt(ne)) * d;
  double p = 0.0;
  for (int k = 1; k <= 100; ++k) p += 2.0 * ((k % 2) ? 1.0 : -1.0) * std::exp(-2.0 * k * k * lambda * lambda);
  return std::clamp(p, 0.0, 1.0);
}

TEST(CounterRng, MatchesSplitMix64ReferenceValues) {
  // Reference outputs of SplitMix64 seeded with 0 (Vigna's generator).
  std::uint64_t state = 0;
  auto next = [&] {
    state += 0x9e3779b97f4a7c15ULL;
    return splitmix64(state - 0x9e3779b97f4a7c15ULL);
  };
  EXPECT_EQ(next(), 0xe220a8397b1dcdafULL);
  EXPECT_EQ(next(), 0x6e789e6aa1b965f4ULL);
  EXPECT_EQ(next(), 0x06c45d188009454fULL);
  const CounterRng r(42, 7);
  CounterRng seq(42, 7);
  for (std::uint64_t c = 0; c < 10; ++c) {
    EXPECT_EQ(seq.next(), r.at(c));
    const double s = r.sign_at(c);
    EXPECT_TRUE(s == 1.0 || s == -1.0);
  }
  EXPECT_NE(CounterRng(42, 7).at(0), CounterRng(42, 8).at(0));
}

TEST(Payload, ParsingAndRandom) {
  const Payload p = Payload::from_string("0110");
  EXPECT_EQ(p.size(), 4u);
  EXPECT_EQ(p.to_string(), "0110");
  EXPECT_THROW(Payload::from_string("01x"), InvalidArgument);
  EXPECT_THROW(Payload::from_string(""), InvalidArgument);
  EXPECT_THROW(Payload(std::vector<std::uint8_t>(65, 0)), InvalidArgument);
  EXPECT_EQ(Payload::random(3), Payload::random(3));
  EXPECT_NE(Payload::random(3), Payload::random(4));
  EXPECT_EQ(Payload::random(3, 40).size(), 40u);
  EXPECT_DOUBLE_EQ(bit_error_rate(p, std::vector<std::uint8_t>{0, 1, 0, 0}), 0.25);
}

TEST(Backends, NamesRoundTrip) {
  for (BackendId id : {BackendId::kSpreadSpectrum, BackendId::kQim, BackendId::kPhase}) {
    EXPECT_EQ(backend_from_string(to_string(id)), id);
  }
  EXPECT_THROW(backend_from_string("lsb"), InvalidArgument);
}

TEST(Backends, SelectBinsLayout) {
  const auto bins = detail::select_bins(9, rng_stream::kQimBins, 1000.0, 5000.0, 32, 16000, 1024, 4);
  ASSERT_EQ(bins.size(), 32u);
  EXPECT_TRUE(std::is_sorted(bins.begin(), bins.end()));
  for (std::size_t i = 0; i < bins.size(); ++i) {
    const double hz = bins[i] * 16000.0 / 1024.0;
    EXPECT_GE(hz, 1000.0);
    EXPECT_LT(hz, 5000.0);
    if (i > 0) {
      EXPECT_GE(bins[i] - bins[i - 1], 4u);
    }
    EXPECT_EQ(bins[i] % 4, bins[0] % 4);
  }
  EXPECT_EQ(bins, detail::select_bins(9, rng_stream::kQimBins, 1000.0, 5000.0, 32, 16000, 1024, 4));
  EXPECT_NE(bins, detail::select_bins(10, rng_stream::kQimBins, 1000.0, 5000.0, 32, 16000, 1024, 4));
  EXPECT_THROW(detail::select_bins(1, 2, 1000.0, 1100.0, 32, 16000, 1024, 4), InvalidArgument);
}

TEST(Backends, BinomialMadMatchesExactSum) {
  for (std::size_t n : {1u, 2u, 5u, 16u, 34u, 61u}) {
    // Exact rational-free enumeration with Pascal's triangle.
    std::vector<double> row{1.0};
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> next(row.size() + 1, 0.0);
      for (std::size_t k = 0; k < row.size(); ++k) {
        next[k] += row[k] / 2.0;
        next[k + 1] += row[k] / 2.0;
      }
      row = next;
    }
    double mad = 0.0;
    for (std::size_t k = 0; k <= n; ++k) mad += row[k] * std::abs(static_cast<double>(k) - n / 2.0);
    EXPECT_NEAR(detail::binomial_mad(n), mad, 1e-12);
  }
}

TEST(Backends, HalfNormalPresenceIsStandardized) {
  const std::vector<double> at_mean(16, std::sqrt(2.0 / M_PI));
  EXPECT_NEAR(detail::half_normal_presence(at_mean), 0.0, 1e-12);
  double sum = 0.0, sq = 0.0;
  const int trials = 4000;
  for (int t = 0; t < trials; ++t) {
    const std::vector<double> z = testing::gaussian(16, 1000 + t, 1.0);
    const double p = detail::half_normal_presence(z);
    sum += p;
    sq += p * p;
  }
  const double mean = sum / trials, sd = std::sqrt(sq / trials - mean * mean);
  EXPECT_NEAR(mean, 0.0, 0.08);
  EXPECT_NEAR(sd, 1.0, 0.05);
}

TEST(SpreadSpectrum, LinearInAlphaAndHostIndependent) {
  const AudioBuffer x = speech(1, 1.0);
  const Payload p = Payload::random(2);
  const WatermarkKey k{77, BackendId::kSpreadSpectrum};
  EXPECT_THROW(ss_embed(x, p, k, 0.0), InvalidArgument);
  const Perturbation d1 = ss_embed(x, p, k, 0.01), d2 = ss_embed(x, p, k, 0.02);
  for (std::size_t n = 0; n < d1.delta.size(); ++n) EXPECT_NEAR(d2.delta[n], 2.0 * d1.delta[n], 1e-15);
  // Additive construction: the chip train does not depend on the host, and
  // has RMS alpha.
  const Perturbation dz = ss_embed(AudioBuffer::zeros(x.size()), p, k, 0.01);
  EXPECT_EQ(dz.delta, d1.delta);
  EXPECT_NEAR(testing::l2(dz.delta), 0.01 * std::sqrt(static_cast<double>(x.size())), 1e-12);
}

TEST(SpreadSpectrum, ChipsStayInBand) {
  const Perturbation d = ss_embed(AudioBuffer::zeros(16000), Payload::random(1), {3, BackendId::kSpreadSpectrum}, 0.01);
  const Spectrogram s = stft(AudioBuffer(d.delta));
  double in = 0.0, total = 0.0;
  for (std::size_t t = 0; t < s.n_frames(); ++t) {
    for (std::size_t k = 0; k < s.n_bins(); ++k) {
      const double e = std::norm(s.at(t, k));
      total += e;
      if (s.bin_hz(k) >= 450.0 && s.bin_hz(k) < 7050.0) in += e;
    }
  }
  EXPECT_GT(in / total, 0.99);
}

TEST(SpreadSpectrum, CapacityChecks) {
  const AudioBuffer x = noise(4096, 1);
  EXPECT_THROW(ss_embed(x, Payload::random(1, 16), {1, BackendId::kSpreadSpectrum}, 0.01), InvalidArgument);
  EXPECT_THROW(ss_detect(AudioBuffer::zeros(500), {1, BackendId::kSpreadSpectrum}), InvalidArgument);
}

TEST(SpreadSpectrum, RoundTripAt20DbOverManyKeys) {
  for (std::uint64_t key = 0; key < 100; ++key) {
    const AudioBuffer x = speech(500 + key, 1.0);
    const Payload p = Payload::random(key * 31 + 1);
    const Perturbation d = ss_embed(x, p, {key, BackendId::kSpreadSpectrum}, 0.01);
    // scale to exactly 20 dB host SNR
    const double g = testing::l2(x.vec()) / testing::l2(d.delta) / 10.0;
    std::vector<double> y = x.vec();
    for (std::size_t n = 0; n < y.size(); ++n) y[n] += g * d.delta[n];
    const DetectionScore s = ss_detect(AudioBuffer(y), {key, BackendId::kSpreadSpectrum});
    EXPECT_EQ(bit_error_rate(p, s.bits), 0.0) << "key " << key;
    EXPECT_GT(s.z, 6.0) << "key " << key;
  }
}

TEST(SpreadSpectrum, NullOnWrongKeysAndUnmarkedHosts) {
  std::vector<double> z;
  for (std::uint64_t t = 0; t < 1000; ++t) {
    const AudioBuffer y = t % 2 ? noise(16000, 7000 + t) : speech(7000 + t, 1.0);
    z.push_back(ss_detect(y, {123456 + t, BackendId::kSpreadSpectrum}).z);
  }
  const double mean = std::accumulate(z.begin(), z.end(), 0.0) / z.size();
  const auto inside = std::count_if(z.begin(), z.end(), [](double v) { return std::abs(v) < 4.0; });
  std::nth_element(z.begin(), z.begin() + 500, z.end());
  EXPECT_NEAR(mean, 0.0, 0.15);
  EXPECT_GE(inside, 990);
  EXPECT_NEAR(z[500], 0.0, 0.5);
}

TEST(Qim, IdempotentOnMarkedSignal) {
  const AudioBuffer x = speech(11, 2.0);
  const WatermarkSpec s = spec(BackendId::kQim, 9);
  const AudioBuffer y = marked(x, s);
  const Perturbation again = embed(y, s);
  EXPECT_LT(testing::l2(again.delta) / testing::l2(x.vec()), 1e-3);
}

TEST(Qim, RoundTripBerZero) {
  for (std::uint64_t t = 0; t < 100; ++t) {
    const AudioBuffer x = speech(900 + t, 1.0);
    const WatermarkSpec s = spec(BackendId::kQim, 40 + t, 0.0, t);
    const DetectionScore d = detect(marked(x, s), s.key);
    EXPECT_EQ(bit_error_rate(s.payload, d.bits), 0.0) << t;
    EXPECT_GT(d.raw + 0.5, 0.9) << t;
  }
}

TEST(Qim, PerturbationShrinksWithStep) {
  const AudioBuffer x = speech(12, 1.0);
  double prev = INFINITY;
  for (double step : {1.0, 0.5, 0.25, 0.1, 0.05, 0.01}) {
    const double n = testing::l2(qim_embed(x, Payload::random(1), {5, BackendId::kQim}, step).delta);
    EXPECT_LT(n, prev) << step;
    prev = n;
  }
  EXPECT_LT(prev, 0.02 * testing::l2(x.vec()));
}

// With 33 frames, 17 even frames carry 32 cells each: 34 cells per bit.
TEST(Qim, NullMatchFractionIsBinomial) {
  double raw = 0.0, z = 0.0;
  const int trials = 300;
  for (int t = 0; t < trials; ++t) {
    const DetectionScore s = qim_detect(noise(16000, 300 + t), {static_cast<std::uint64_t>(t), BackendId::kQim});
    raw += s.raw + 0.5;
    z += s.z;
  }
  const double expected = 0.5 + detail::binomial_mad(34) / 34.0;
  EXPECT_NEAR(raw / trials, expected, 0.006);
  EXPECT_NEAR(z / trials, 0.0, 0.2);
}

TEST(Qim, GainChangeDestroysLattice) {
  const AudioBuffer x = speech(13, 1.0);
  const WatermarkSpec s = spec(BackendId::kQim, 21);
  const AudioBuffer y = marked(x, s);
  const DetectionScore clean = detect(y, s.key);
  std::vector<double> v = y.vec();
  for (double& a : v) a *= 2.0;
  const DetectionScore scaled = detect(AudioBuffer(v), s.key);
  EXPECT_GT(clean.z, 10.0);
  EXPECT_LT(std::abs(scaled.z), 4.0);
  EXPECT_LT(scaled.raw, clean.raw);
}

TEST(Phase, SmallThetaIsTransparent) {
  const AudioBuffer x = speech(14, 1.0);
  const Perturbation d = phase_embed(x, Payload::random(1), {3, BackendId::kPhase}, 0.01);
  EXPECT_GT(snr_db(x, apply_perturbation(x, d)), 40.0);
  EXPECT_THROW(phase_embed(x, Payload::random(1), {3, BackendId::kPhase}, 0.0), InvalidArgument);
}

TEST(Phase, LatticeSpacing) {
  EXPECT_DOUBLE_EQ(phase_lattice_spacing(0.38), 2.0 * M_PI / 9.0);
  EXPECT_DOUBLE_EQ(phase_lattice_spacing(M_PI / 4.0), M_PI / 2.0);
  EXPECT_THROW(phase_lattice_spacing(1.0), InvalidArgument);
  EXPECT_DOUBLE_EQ(phase_lattice_spacing(0.3), 2.0 * M_PI / 11.0);
}

TEST(Phase, RoundTripAtTheta03) {
  PhaseParams params;
  params.theta = 0.3;
  for (std::uint64_t t = 0; t < 30; ++t) {
    const AudioBuffer x = speech(1200 + t, 1.0);
    const Payload p = Payload::random(t);
    const WatermarkKey k{60 + t, BackendId::kPhase};
    const AudioBuffer y = apply_perturbation(x, phase_embed(x, p, k, 0.3, params));
    EXPECT_EQ(bit_error_rate(p, phase_detect(y, k, 16, params).bits), 0.0) << t;
  }
}

// Marked (even) frames of speech-active regions, within 15 dB of the loudest
// frame; in near-silent frames the ratio is dominated by leakage from loud
// neighbors.
TEST(Phase, MagnitudesPreservedPerMarkedFrame) {
  for (std::uint64_t h = 0; h < 5; ++h) {
    const AudioBuffer x = speech(15 + h, 2.0);
    const AudioBuffer y = marked(x, spec(BackendId::kPhase, 4));
    const Spectrogram sx = stft(x), sy = stft(y);
    std::vector<double> energy(sx.n_frames(), 0.0);
    for (std::size_t t = 0; t < sx.n_frames(); ++t) {
      for (std::size_t k = 0; k < sx.n_bins(); ++k) energy[t] += std::norm(sx.at(t, k));
    }
    const double loudest = *std::max_element(energy.begin(), energy.end());
    for (std::size_t t = 0; t < sx.n_frames(); t += 2) {
      if (energy[t] < loudest * std::pow(10.0, -1.5)) continue;
      double num = 0.0;
      for (std::size_t k = 0; k < sx.n_bins(); ++k) {
        const double d = std::abs(sy.at(t, k)) - std::abs(sx.at(t, k));
        num += d * d;
      }
      EXPECT_LT(std::sqrt(num / energy[t]), 0.05) << "host " << h << " frame " << t;
    }
  }
}

TEST(Backends, DefaultStrengthsGiveAbout20Db) {
  for (BackendId id : {BackendId::kSpreadSpectrum, BackendId::kQim, BackendId::kPhase}) {
    double mean = 0.0;
    for (std::uint64_t h = 0; h < 10; ++h) {
      const AudioBuffer x = speech(2000 + h);
      mean += snr_db(x, marked(x, spec(id, 8 + h))) / 10.0;
    }
    EXPECT_NEAR(mean, 20.0, 2.0) << to_string(id);
  }
}

TEST(Backends, DeterministicEmbedding) {
  const AudioBuffer x = speech(16, 1.0);
  for (BackendId id : {BackendId::kSpreadSpectrum, BackendId::kQim, BackendId::kPhase}) {
    EXPECT_EQ(embed(x, spec(id, 1)).delta, embed(x, spec(id, 1)).delta);
    EXPECT_NE(embed(x, spec(id, 1)).delta, embed(x, spec(id, 2)).delta);
  }
}

TEST(Backends, LogitEqualsZ) {
  const AudioBuffer x = speech(17, 1.0);
  for (BackendId id : {BackendId::kSpreadSpectrum, BackendId::kQim, BackendId::kPhase}) {
    const DetectionScore s = detect(marked(x, spec(id, 3)), {3, id});
    EXPECT_EQ(s.logit, s.z);
  }
}

TEST(Backends, KeyIsolationMatchesNull) {
  for (BackendId id : {BackendId::kSpreadSpectrum, BackendId::kQim, BackendId::kPhase}) {
    std::vector<double> wrong, null;
    for (std::uint64_t h = 0; h < 50; ++h) {
      const AudioBuffer x = speech(3000 + h, 1.0);
      const AudioBuffer y = marked(x, spec(id, 99999));
      for (std::uint64_t k = 0; k < 20; ++k) {
        wrong.push_back(detect(y, {h * 20 + k, id}).z);
        null.push_back(detect(x, {h * 20 + k, id}).z);
      }
    }
    EXPECT_GT(ks_pvalue(wrong, null), 0.01) << to_string(id);
    const double mean = std::accumulate(wrong.begin(), wrong.end(), 0.0) / wrong.size();
    EXPECT_NEAR(mean, 0.0, 0.2) << to_string(id);
  }
}

TEST(Backends, CleanZNonDecreasingInStrength) {
  const std::vector<std::pair<BackendId, std::vector<double>>> grids = {
      {BackendId::kSpreadSpectrum, {0.001, 0.002, 0.005, 0.01}},
      {BackendId::kQim, {0.25, 0.5, 0.75, 1.0}},
      {BackendId::kPhase, {0.1, 0.2, 0.38, 0.6, 0.78}},
  };
  for (const auto& [id, grid] : grids) {
    double prev = -INFINITY;
    for (double s : grid) {
      BackendConfig cfg;
      cfg.qim.step = s;  // both lattice detectors must know the strength
      cfg.phase.theta = s;
      double mean = 0.0;
      for (std::uint64_t h = 0; h < 8; ++h) {
        const AudioBuffer x = speech(4000 + h, 1.0);
        const WatermarkSpec w = spec(id, 70 + h, s);
        mean += detect(apply_perturbation(x, embed(x, w, cfg)), w.key, 16, cfg).z / 8.0;
      }
      EXPECT_GE(mean, prev) << to_string(id) << " strength " << s;
      prev = mean;
    }
  }
}

}  // namespace
}  // namespace wavemux
