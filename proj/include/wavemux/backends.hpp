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

#ifndef WAVEMUX_BACKENDS_HPP_
#define WAVEMUX_BACKENDS_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wavemux/audio.hpp"
#include "wavemux/stft.hpp"

namespace wavemux {

enum class BackendId { kSpreadSpectrum, kQim, kPhase };

std::string_view to_string(BackendId id);
BackendId backend_from_string(std::string_view name);  // "ss", "qim", "phase"

struct WatermarkKey {
  std::uint64_t seed = 0;
  BackendId backend = BackendId::kSpreadSpectrum;
};

// 1..64 message bits.
class Payload {
 public:
  explicit Payload(std::vector<std::uint8_t> bits);

  static Payload from_string(std::string_view bits);  // e.g. "0110..."
  static Payload random(std::uint64_t seed, std::size_t n_bits = 16);

  std::size_t size() const { return bits_.size(); }
  std::uint8_t operator[](std::size_t i) const { return bits_[i]; }
  const std::vector<std::uint8_t>& bits() const { return bits_; }
  std::string to_string() const;

  friend bool operator==(const Payload&, const Payload&) = default;

 private:
  std::vector<std::uint8_t> bits_;
};

// delta = W(x) - x.
struct Perturbation {
  std::vector<double> delta;
  BackendId backend = BackendId::kSpreadSpectrum;
};

// Detector output. `z` is standard normal under the no-watermark hypothesis;
// `logit` is the log-odds proxy used for fusion (slope 1 in z). `bits` holds
// the decoded payload when the detector recovers one.
struct DetectionScore {
  double raw = 0.0;
  double z = 0.0;
  double logit = 0.0;
  std::vector<std::uint8_t> bits;
};

// Fraction of differing bits over the shorter of the two sequences.
double bit_error_rate(const Payload& sent, std::span<const std::uint8_t> decoded);

// Strengths that give roughly 20 dB host SNR on speech at -26 dBFS RMS.
inline constexpr double kDefaultSsAlpha = 0.005;
inline constexpr double kDefaultQimStep = 0.75;
inline constexpr double kDefaultPhaseTheta = 0.38;

// Spread spectrum: +/-1 chips from the key, one chip per sample, grouped into
// blocks of `block_len` samples. Block j carries bit j mod B. The chip train is
// band-limited in the STFT domain and normalized to unit power.
//
// Detection whitens the observation frame by frame, correlates it with the
// raw chips, and searches integer lags in [-max_lag, max_lag]. The lag used to
// score odd payload passes is chosen on the even ones and vice versa, so the
// null distribution of the per-bit statistic is not inflated by the search.
struct SsParams {
  // Strength used by embed() when a WatermarkSpec leaves it unset.
  double alpha = kDefaultSsAlpha;
  double band_lo_hz = 500.0;
  double band_hi_hz = 7000.0;
  std::size_t block_len = 256;
  std::size_t max_lag = 240;
  std::size_t whiten_smooth_bins = 8;
  double whiten_floor_db = -40.0;
  StftConfig stft{};
};

// QIM on STFT magnitudes of key-chosen bins in [band_lo, band_hi). Only
// every frame_stride-th frame is marked and chosen bins are at least
// bin_spacing apart, so marked cells barely overlap and the projection
// converges quickly. Cell c = (t / frame_stride) * n_bins + j carries bit
// c mod B and is quantized onto step * Z + bit * step / 2 + dither(key, c).
// Embedding alternates quantization and re-synthesis until the re-analyzed
// cells sit on their lattice.
struct QimParams {
  // Lattice step assumed by the detector; embedding takes its step explicitly.
  double step = kDefaultQimStep;
  double band_lo_hz = 1000.0;
  double band_hi_hz = 5000.0;
  std::size_t n_bins = 32;
  std::size_t bin_spacing = 4;
  std::size_t frame_stride = 2;
  std::size_t iterations = 40;
  StftConfig stft{};
};

// Phase coding on key-chosen bins in [band_lo, band_hi). The phase of each
// cell is moved to the nearest point of a dithered lattice with spacing
// s = 2 pi / ceil(pi / theta); bit XOR chip(key, cell) selects the half-step
// coset, so the offset never exceeds theta and magnitudes are untouched.
// Cell layout follows QimParams.
// Detection is a magnitude-weighted correlation of cos(2 pi (phase - dither) / s)
// with the chip signs.
struct PhaseParams {
  // Maximum offset assumed by the detector; embedding takes theta explicitly.
  double theta = kDefaultPhaseTheta;
  double band_lo_hz = 300.0;
  double band_hi_hz = 3000.0;
  std::size_t n_bins = 40;
  std::size_t bin_spacing = 4;
  std::size_t frame_stride = 2;
  std::size_t iterations = 40;
  StftConfig stft{};
};

Perturbation ss_embed(const AudioBuffer& x, const Payload& p, const WatermarkKey& k, double alpha,
                      const SsParams& params = {});
DetectionScore ss_detect(const AudioBuffer& y, const WatermarkKey& k, std::size_t n_bits = 16,
                         const SsParams& params = {});

Perturbation qim_embed(const AudioBuffer& x, const Payload& p, const WatermarkKey& k,
                       double step, const QimParams& params = {});
DetectionScore qim_detect(const AudioBuffer& y, const WatermarkKey& k, std::size_t n_bits = 16,
                          const QimParams& params = {});

Perturbation phase_embed(const AudioBuffer& x, const Payload& p, const WatermarkKey& k,
                         double theta, const PhaseParams& params = {});
// Lattice spacing 2 pi / ceil(pi / theta).
double phase_lattice_spacing(double theta);

DetectionScore phase_detect(const AudioBuffer& y, const WatermarkKey& k, std::size_t n_bits = 16,
                            const PhaseParams& params = {});

// Parameters for all three backends.
struct BackendConfig {
  SsParams ss{};
  QimParams qim{};
  PhaseParams phase{};
};

// Strength used when a WatermarkSpec leaves it unset. For QIM this is the
// detector's lattice step, for phase the detector's theta, so that embed and
// detect agree.
double default_strength(BackendId id, const BackendConfig& cfg = {});

// Everything needed to embed one watermark.
struct WatermarkSpec {
  BackendId backend = BackendId::kSpreadSpectrum;
  Payload payload = Payload::random(0);
  WatermarkKey key{};
  double strength = 0.0;  // alpha, step or theta; <= 0 selects the default
};

// Uniform embed/detect contract used by the multiplexers.
Perturbation embed(const AudioBuffer& x, const WatermarkSpec& spec, const BackendConfig& cfg = {});
DetectionScore detect(const AudioBuffer& y, const WatermarkKey& key, std::size_t n_bits = 16,
                      const BackendConfig& cfg = {});

// x + delta, without clipping.
AudioBuffer apply_perturbation(const AudioBuffer& x, const Perturbation& p);

namespace detail {

// Key-chosen bins in [lo_hz, hi_hz), ascending, drawn from a grid with the
// given spacing whose offset is also key-chosen.
std::vector<std::size_t> select_bins(std::uint64_t seed, std::uint64_t stream, double lo_hz,
                                     double hi_hz, std::size_t count, int sample_rate,
                                     std::size_t frame_len, std::size_t spacing = 1);

// Presence statistic from per-bit standard-normal scores: the sum of |z_b| is
// standardized against its half-normal null.
double half_normal_presence(std::span<const double> z_bits);

// Mean absolute deviation E|K - n/2| for K ~ Binomial(n, 1/2).
double binomial_mad(std::size_t n);

}  // namespace detail

}  // namespace wavemux

#endif  // WAVEMUX_BACKENDS_HPP_
