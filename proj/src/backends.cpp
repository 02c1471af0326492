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

#include "wavemux/backends.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "wavemux/errors.hpp"
#include "wavemux/rng.hpp"

namespace wavemux {

std::string_view to_string(BackendId id) {
  switch (id) {
    case BackendId::kSpreadSpectrum:
      return "ss";
    case BackendId::kQim:
      return "qim";
    case BackendId::kPhase:
      return "phase";
  }
  return "?";
}

BackendId backend_from_string(std::string_view name) {
  if (name == "ss") return BackendId::kSpreadSpectrum;
  if (name == "qim") return BackendId::kQim;
  if (name == "phase") return BackendId::kPhase;
  throw InvalidArgument("unknown backend '" + std::string(name) + "' (expected ss, qim or phase)");
}

Payload::Payload(std::vector<std::uint8_t> bits) : bits_(std::move(bits)) {
  if (bits_.empty() || bits_.size() > 64) throw InvalidArgument("Payload: need 1..64 bits");
  for (auto b : bits_) {
    if (b > 1) throw InvalidArgument("Payload: bits must be 0 or 1");
  }
}

Payload Payload::from_string(std::string_view s) {
  std::vector<std::uint8_t> bits;
  for (char c : s) {
    if (c != '0' && c != '1') throw InvalidArgument("Payload: expected a string of 0/1");
    bits.push_back(static_cast<std::uint8_t>(c - '0'));
  }
  return Payload(std::move(bits));
}

Payload Payload::random(std::uint64_t seed, std::size_t n_bits) {
  const CounterRng rng(seed, rng_stream::kPayload);
  std::vector<std::uint8_t> bits(n_bits);
  for (std::size_t i = 0; i < n_bits; ++i) bits[i] = static_cast<std::uint8_t>(rng.at(i) & 1);
  return Payload(std::move(bits));
}

std::string Payload::to_string() const {
  std::string s;
  for (auto b : bits_) s.push_back(static_cast<char>('0' + b));
  return s;
}

double bit_error_rate(const Payload& sent, std::span<const std::uint8_t> decoded) {
  const std::size_t n = std::min(sent.size(), decoded.size());
  if (n == 0) return 1.0;
  std::size_t errors = 0;
  for (std::size_t i = 0; i < n; ++i) errors += sent[i] != decoded[i];
  return static_cast<double>(errors) / static_cast<double>(n);
}

double default_strength(BackendId id, const BackendConfig& cfg) {
  switch (id) {
    case BackendId::kSpreadSpectrum:
      return cfg.ss.alpha;
    case BackendId::kQim:
      return cfg.qim.step;
    case BackendId::kPhase:
      return cfg.phase.theta;
  }
  return 0.0;
}

Perturbation embed(const AudioBuffer& x, const WatermarkSpec& spec, const BackendConfig& cfg) {
  if (spec.key.backend != spec.backend) {
    throw InvalidArgument("embed: key belongs to a different backend");
  }
  const double s = spec.strength > 0.0 ? spec.strength : default_strength(spec.backend, cfg);
  switch (spec.backend) {
    case BackendId::kSpreadSpectrum:
      return ss_embed(x, spec.payload, spec.key, s, cfg.ss);
    case BackendId::kQim:
      return qim_embed(x, spec.payload, spec.key, s, cfg.qim);
    case BackendId::kPhase:
      return phase_embed(x, spec.payload, spec.key, s, cfg.phase);
  }
  throw InvalidArgument("embed: unknown backend");
}

DetectionScore detect(const AudioBuffer& y, const WatermarkKey& key, std::size_t n_bits,
                      const BackendConfig& cfg) {
  switch (key.backend) {
    case BackendId::kSpreadSpectrum:
      return ss_detect(y, key, n_bits, cfg.ss);
    case BackendId::kQim:
      return qim_detect(y, key, n_bits, cfg.qim);
    case BackendId::kPhase:
      return phase_detect(y, key, n_bits, cfg.phase);
  }
  throw InvalidArgument("detect: unknown backend");
}

AudioBuffer apply_perturbation(const AudioBuffer& x, const Perturbation& p) {
  if (p.delta.size() != x.size()) throw InvalidArgument("perturbation length differs from host");
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = x[i] + p.delta[i];
  return x.with_samples(std::move(y));
}

namespace detail {

std::vector<std::size_t> select_bins(std::uint64_t seed, std::uint64_t stream, double lo_hz,
                                     double hi_hz, std::size_t count, int sample_rate,
                                     std::size_t frame_len, std::size_t spacing) {
  if (spacing == 0) throw InvalidArgument("select_bins: spacing must be > 0");
  std::vector<std::size_t> in_band;
  for (std::size_t k = 0; k <= frame_len / 2; ++k) {
    const double f = static_cast<double>(k) * sample_rate / static_cast<double>(frame_len);
    if (f >= lo_hz && f < hi_hz) in_band.push_back(k);
  }
  CounterRng rng(seed, stream);
  const std::size_t offset = spacing > 1 ? rng.below(spacing) : 0;
  std::vector<std::size_t> candidates;
  for (std::size_t i = offset; i < in_band.size(); i += spacing) candidates.push_back(in_band[i]);
  if (count == 0 || count > candidates.size()) {
    throw InvalidArgument("select_bins: band holds " + std::to_string(candidates.size()) +
                          " bins, cannot pick " + std::to_string(count));
  }
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = i + rng.below(candidates.size() - i);
    std::swap(candidates[i], candidates[j]);
  }
  candidates.resize(count);
  std::sort(candidates.begin(), candidates.end());
  return candidates;
}

double half_normal_presence(std::span<const double> z_bits) {
  if (z_bits.empty()) return 0.0;
  const double b = static_cast<double>(z_bits.size());
  double total = 0.0;
  for (double z : z_bits) total += std::abs(z);
  const double mean = std::sqrt(2.0 / std::numbers::pi);
  return (total - b * mean) / std::sqrt(b * (1.0 - 2.0 / std::numbers::pi));
}

double binomial_mad(std::size_t n) {
  if (n == 0) return 0.0;
  const double nd = static_cast<double>(n);
  const double log_norm = std::lgamma(nd + 1.0) - nd * std::numbers::ln2;
  double mad = 0.0;
  for (std::size_t k = 0; k <= n; ++k) {
    const double kd = static_cast<double>(k);
    const double logp = log_norm - std::lgamma(kd + 1.0) - std::lgamma(nd - kd + 1.0);
    mad += std::exp(logp) * std::abs(kd - nd / 2.0);
  }
  return mad;
}

}  // namespace detail

}  // namespace wavemux
