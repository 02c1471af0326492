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


#include "wavemux/patfm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "wavemux/errors.hpp"

namespace wavemux {

namespace {

constexpr double kPowerFloor = 1e-12;

struct TileGeometry {
  std::size_t frames_per_slot;
  std::size_t n_slots;
  std::vector<std::vector<std::size_t>> band_bins;
};

TileGeometry tile_geometry(const Spectrogram& spec, const BandPlan& bands, double slot_len_ms) {
  if (!(slot_len_ms > 0.0)) throw InvalidArgument("slot length must be > 0");
  const TfDims dims = TfDims::of(spec);
  bands.validate(dims.sample_rate);
  TileGeometry g;
  g.frames_per_slot = SlotPlan{slot_len_ms, 1}.frames_per_slot(dims.sample_rate, dims.stft.hop);
  g.n_slots = (spec.n_frames() + g.frames_per_slot - 1) / g.frames_per_slot;
  g.band_bins.resize(bands.bands.size());
  for (std::size_t b = 0; b < bands.bands.size(); ++b) {
    for (std::size_t k = 0; k < dims.n_bins(); ++k) {
      if (bands.contains(b, k, dims)) g.band_bins[b].push_back(k);
    }
    if (g.band_bins[b].empty()) {
      throw InvalidArgument("band " + std::to_string(b) + " is narrower than one bin");
    }
  }
  return g;
}

PerceptualMask empty_mask(const TileGeometry& g, const BandPlan& bands, double slot_len_ms) {
  PerceptualMask m;
  m.n_slots = g.n_slots;
  m.n_bands = bands.bands.size();
  m.tiles.assign(m.n_slots * m.n_bands, 0.0);
  m.slot_len_ms = slot_len_ms;
  m.frames_per_slot = g.frames_per_slot;
  m.bands = bands;
  return m;
}

template <typename Fn>
void for_tile_powers(const Spectrogram& spec, const TileGeometry& g, std::size_t slot, std::size_t band,
                     Fn&& fn) {
  const std::size_t t0 = slot * g.frames_per_slot;
  const std::size_t t1 = std::min(spec.n_frames(), t0 + g.frames_per_slot);
  for (std::size_t t = t0; t < t1; ++t) {
    for (std::size_t k : g.band_bins[band]) fn(std::max(std::norm(spec.at(t, k)), kPowerFloor));
  }
}

}  // namespace

PerceptualMask spectral_flatness(const Spectrogram& spec, const BandPlan& bands, double slot_len_ms) {
  const TileGeometry g = tile_geometry(spec, bands, slot_len_ms);
  PerceptualMask m = empty_mask(g, bands, slot_len_ms);
  for (std::size_t s = 0; s < m.n_slots; ++s) {
    for (std::size_t b = 0; b < m.n_bands; ++b) {
      double log_sum = 0.0, sum = 0.0, lo = HUGE_VAL, hi = 0.0;
      std::size_t n = 0;
      for_tile_powers(spec, g, s, b, [&](double p) {
        lo = std::min(lo, p);
        hi = std::max(hi, p);
        log_sum += std::log(p);
        sum += p;
        ++n;
      });
      const double nd = static_cast<double>(n);
      // equal up to rounding counts as constant
      const bool constant = hi - lo <= 1e-12 * hi;
      m.at(s, b) = constant ? 1.0 : std::clamp(std::exp(log_sum / nd) / (sum / nd), 0.0, 1.0);
    }
  }
  return m;
}

PerceptualMask local_snr_mask(const Spectrogram& spec, const BandPlan& bands, double slot_len_ms) {
  const TileGeometry g = tile_geometry(spec, bands, slot_len_ms);
  if (g.n_slots < 10) {
    throw InvalidArgument("local_snr_mask needs at least 10 slots, got " + std::to_string(g.n_slots));
  }
  PerceptualMask m = empty_mask(g, bands, slot_len_ms);
  std::vector<double> db(m.n_slots);
  for (std::size_t b = 0; b < m.n_bands; ++b) {
    for (std::size_t s = 0; s < m.n_slots; ++s) {
      double sum = 0.0;
      std::size_t n = 0;
      for_tile_powers(spec, g, s, b, [&](double p) {
        sum += p;
        ++n;
      });
      db[s] = 10.0 * std::log10(sum / static_cast<double>(n));
    }
    std::vector<double> sorted = db;
    std::sort(sorted.begin(), sorted.end());
    const double floor_db = sorted[static_cast<std::size_t>(0.1 * static_cast<double>(sorted.size() - 1))];
    for (std::size_t s = 0; s < m.n_slots; ++s) {
      m.at(s, b) = std::clamp((db[s] - floor_db) / 30.0, 0.0, 1.0);
    }
  }
  return m;
}

PerceptualMask perceptual_mask(const Spectrogram& spec, const BandPlan& bands, double slot_len_ms,
                               MaskSource source) {
  switch (source) {
    case MaskSource::kFlatness: return spectral_flatness(spec, bands, slot_len_ms);
    case MaskSource::kLocalSnr: return local_snr_mask(spec, bands, slot_len_ms);
    case MaskSource::kCombined: break;
  }
  PerceptualMask m = spectral_flatness(spec, bands, slot_len_ms);
  const PerceptualMask snr = local_snr_mask(spec, bands, slot_len_ms);
  for (std::size_t i = 0; i < m.tiles.size(); ++i) m.tiles[i] = 0.5 * (m.tiles[i] + snr.tiles[i]);
  return m;
}

MultiplexPlan build_plan(const PerceptualMask& mask, std::size_t n_wm, std::span<const double> alphas,
                         const GainCurve& gain, const std::vector<std::vector<bool>>& eligible) {
  if (n_wm == 0) throw InvalidArgument("build_plan: need at least one watermark");
  if (alphas.size() != n_wm) throw InvalidArgument("build_plan: one alpha per watermark");
  const std::size_t n_tiles = mask.n_slots * mask.n_bands;
  if (n_wm > n_tiles) throw InvalidArgument("build_plan: more watermarks than tiles");
  for (double a : alphas) {
    if (!(a >= 0.0) || !std::isfinite(a)) throw InvalidArgument("build_plan: alphas must be >= 0");
  }
  if (!(gain.floor >= 0.0) || !(gain.slope >= 0.0) || gain.floor + gain.slope > 1.0 + 1e-12) {
    throw InvalidArgument("build_plan: gain curve must map [0,1] into [0,1]");
  }
  if (!eligible.empty()) {
    if (eligible.size() != n_wm) throw InvalidArgument("build_plan: eligibility per watermark");
    for (const auto& e : eligible) {
      if (e.size() != mask.n_bands) throw InvalidArgument("build_plan: eligibility per band");
    }
  }
  auto allowed = [&](std::size_t wm, std::size_t band) {
    if (eligible.empty()) return true;
    bool anyone = false;
    for (const auto& e : eligible) anyone = anyone || e[band];
    return !anyone || eligible[wm][band];
  };

  std::vector<std::size_t> order(n_tiles);
  std::iota(order.begin(), order.end(), 0);
  // Tile index is slot-major, so index order is (slot, band) order.
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return mask.tiles[a] > mask.tiles[b]; });

  MultiplexPlan plan;
  plan.n_slots = mask.n_slots;
  plan.n_bands = mask.n_bands;
  plan.tile_owner.assign(n_tiles, 0);
  plan.tile_gain.assign(n_tiles, 0.0);
  std::size_t next = 0;
  for (std::size_t tile : order) {
    const std::size_t band = tile % mask.n_bands;
    std::size_t wm = next;
    for (std::size_t step = 0; step < n_wm && !allowed(wm, band); ++step) wm = (wm + 1) % n_wm;
    plan.tile_owner[tile] = wm;
    plan.tile_gain[tile] = alphas[wm] * gain(std::clamp(mask.tiles[tile], 0.0, 1.0));
    next = (wm + 1) % n_wm;
  }
  return plan;
}

std::vector<RoutingMask> expand_plan(const MultiplexPlan& plan, const PerceptualMask& mask,
                                     const TfDims& dims) {
  if (plan.n_slots != mask.n_slots || plan.n_bands != mask.n_bands) {
    throw InvalidArgument("expand_plan: plan and mask shapes differ");
  }
  std::size_t n_wm = 0;
  for (std::size_t o : plan.tile_owner) n_wm = std::max(n_wm, o + 1);
  std::vector<RoutingMask> masks;
  for (std::size_t i = 0; i < n_wm; ++i) {
    masks.push_back({std::vector<double>(dims.n_frames * dims.n_bins(), 0.0), dims, MaskLabel::kPatfm});
  }
  std::vector<std::ptrdiff_t> bin_band(dims.n_bins(), -1);
  for (std::size_t k = 0; k < dims.n_bins(); ++k) {
    for (std::size_t b = 0; b < mask.n_bands && bin_band[k] < 0; ++b) {
      if (mask.bands.contains(b, k, dims)) bin_band[k] = static_cast<std::ptrdiff_t>(b);
    }
  }
  for (std::size_t t = 0; t < dims.n_frames; ++t) {
    const std::size_t slot = std::min(t / mask.frames_per_slot, mask.n_slots - 1);
    for (std::size_t k = 0; k < dims.n_bins(); ++k) {
      if (bin_band[k] < 0) continue;
      const auto b = static_cast<std::size_t>(bin_band[k]);
      masks[plan.owner(slot, b)].at(t, k) = plan.gain(slot, b);
    }
  }
  return masks;
}

BandPlan default_tile_bands(int sample_rate) {
  const double nyq = sample_rate / 2.0;
  BandPlan plan;
  double lo = 0.0;
  for (double hi : {500.0, 1000.0, 1500.0, 2000.0, 3000.0, 4000.0, 5500.0}) {
    if (hi >= nyq) break;
    plan.bands.push_back({lo, hi});
    lo = hi;
  }
  plan.bands.push_back({lo, nyq});
  return plan;
}

Band backend_band(BackendId id, const BackendConfig& cfg) {
  switch (id) {
    case BackendId::kSpreadSpectrum: return {cfg.ss.band_lo_hz, cfg.ss.band_hi_hz};
    case BackendId::kQim: return {cfg.qim.band_lo_hz, cfg.qim.band_hi_hz};
    case BackendId::kPhase: return {cfg.phase.band_lo_hz, cfg.phase.band_hi_hz};
  }
  throw InvalidArgument("unknown backend");
}

PaTfmResult pa_tfm_embed(const AudioBuffer& x, std::span<const WatermarkSpec> specs,
                         std::span<const double> alphas, const PaTfmConfig& cfg,
                         const BackendConfig& backend_cfg) {
  if (specs.empty()) throw InvalidArgument("pa_tfm_embed: no watermarks");
  for (std::size_t i = 0; i < specs.size(); ++i) {
    for (std::size_t j = i + 1; j < specs.size(); ++j) {
      if (specs[i].backend == specs[j].backend) throw InvalidArgument("pa_tfm_embed: backends must be distinct");
    }
  }
  const StftConfig& stft_cfg = backend_cfg.ss.stft;
  const BandPlan bands = cfg.bands.bands.empty() ? default_tile_bands(x.sample_rate()) : cfg.bands;

  std::vector<Perturbation> deltas;
  for (const WatermarkSpec& s : specs) deltas.push_back(embed(x, s, backend_cfg));

  const Spectrogram host = stft(x, stft_cfg);
  PaTfmResult out{{x, 0}, perceptual_mask(host, bands, cfg.slot_len_ms, cfg.source), {}};

  std::vector<std::vector<bool>> eligible;
  if (cfg.backend_affinity) {
    for (const WatermarkSpec& s : specs) {
      const Band fb = backend_band(s.backend, backend_cfg);
      std::vector<bool> e;
      for (const Band& b : bands.bands) e.push_back(b.lo_hz < fb.hi_hz && fb.lo_hz < b.hi_hz);
      eligible.push_back(std::move(e));
    }
  }
  out.plan = build_plan(out.mask, specs.size(), alphas, cfg.gain, eligible);
  const std::vector<RoutingMask> masks = expand_plan(out.plan, out.mask, TfDims::of(host));
  out.mux = apply_tf_routing(x, deltas, masks, stft_cfg);
  return out;
}

FusionWeights::FusionWeights(std::vector<double> w) : w_(std::move(w)) {
  if (w_.empty()) throw InvalidArgument("fusion weights are empty");
  double total = 0.0;
  for (double v : w_) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw InvalidArgument("fusion weights must be finite and >= 0");
    total += v;
  }
  if (total <= 0.0) throw InvalidArgument("fusion weights are all zero");
  for (double& v : w_) v /= total;
}

FusionWeights FusionWeights::uniform(std::size_t n) { return FusionWeights(std::vector<double>(n, 1.0)); }

double FusionWeights::norm() const {
  double s = 0.0;
  for (double v : w_) s += v * v;
  return std::sqrt(s);
}

DetectionScore fuse_scores(std::span<const DetectionScore> scores, const FusionWeights& w) {
  if (scores.size() != w.size()) throw InvalidArgument("fuse_scores: one weight per score");
  double logit = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) logit += w.values()[i] * scores[i].logit;
  DetectionScore out;
  out.raw = out.z = out.logit = logit;
  return out;
}

FusionWeights calibrate_fusion_weights(std::span<const std::vector<double>> pos_z,
                                       std::span<const std::vector<double>> neg_z) {
  if (pos_z.size() != neg_z.size() || pos_z.empty()) {
    throw InvalidArgument("calibrate_fusion_weights: need matching per-detector batches");
  }
  auto mean = [](const std::vector<double>& v) {
    if (v.empty()) throw InvalidArgument("calibrate_fusion_weights: empty batch");
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  };
  std::vector<double> w(pos_z.size());
  double total = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    w[i] = std::max(0.0, mean(pos_z[i]) - mean(neg_z[i]));
    total += w[i];
  }
  if (!(total > 0.0) || !std::isfinite(total)) return FusionWeights::uniform(w.size());
  return FusionWeights(std::move(w));
}

}  // namespace wavemux
