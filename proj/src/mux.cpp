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


#include "wavemux/mux.hpp"

#include <algorithm>
#include <cmath>

#include "wavemux/errors.hpp"

namespace wavemux {

std::string to_string(MaskLabel label) {
  switch (label) {
    case MaskLabel::kNaive: return "naive";
    case MaskLabel::kFdm: return "fdm";
    case MaskLabel::kTdm: return "tdm";
    case MaskLabel::kPatfm: return "patfm";
  }
  return "unknown";
}

TfDims TfDims::of(const Spectrogram& spec) {
  return {spec.n_frames(), spec.sample_rate(), spec.config()};
}

TfDims TfDims::for_signal(std::size_t len, int sample_rate, const StftConfig& cfg) {
  cfg.validate();
  return {cfg.frames_for(len), sample_rate, cfg};
}

BandPlan BandPlan::default_for(std::size_t n_watermarks, int sample_rate) {
  if (n_watermarks == 0) throw InvalidArgument("band plan needs at least one watermark");
  const double nyq = sample_rate / 2.0;
  std::vector<double> edges;
  if (n_watermarks == 2) {
    edges = {0.0, 4000.0, 8000.0};
  } else if (n_watermarks == 3) {
    edges = {0.0, 2000.0, 5000.0, 8000.0};
  } else {
    for (std::size_t i = 0; i <= n_watermarks; ++i) {
      edges.push_back(nyq * static_cast<double>(i) / static_cast<double>(n_watermarks));
    }
  }
  BandPlan plan;
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    plan.bands.push_back({std::min(edges[i], nyq), std::min(edges[i + 1], nyq)});
  }
  plan.bands.back().hi_hz = nyq;
  return plan;
}

void BandPlan::validate(int sample_rate) const {
  if (bands.empty()) throw InvalidArgument("band plan is empty");
  const double nyq = sample_rate / 2.0;
  for (const Band& b : bands) {
    if (!(b.lo_hz >= 0.0 && b.lo_hz < b.hi_hz && b.hi_hz <= nyq)) {
      throw InvalidArgument("band [" + std::to_string(b.lo_hz) + ", " + std::to_string(b.hi_hz) +
                            ") outside [0, Nyquist]");
    }
  }
  if (!require_disjoint) return;
  for (std::size_t i = 0; i < bands.size(); ++i) {
    for (std::size_t j = i + 1; j < bands.size(); ++j) {
      if (bands[i].lo_hz < bands[j].hi_hz && bands[j].lo_hz < bands[i].hi_hz) {
        throw InvalidArgument("bands " + std::to_string(i) + " and " + std::to_string(j) +
                              " overlap");
      }
    }
  }
}

bool BandPlan::contains(std::size_t band, std::size_t bin, const TfDims& dims) const {
  const Band& b = bands.at(band);
  const double f = static_cast<double>(bin) * dims.sample_rate / static_cast<double>(dims.stft.frame_len);
  const double nyq = dims.sample_rate / 2.0;
  return f >= b.lo_hz && (f < b.hi_hz || (b.hi_hz >= nyq && f >= nyq));
}

void SlotPlan::validate() const {
  if (!(slot_len_ms >= 40.0 && slot_len_ms <= 80.0)) {
    throw InvalidArgument("slot length must be within [40, 80] ms");
  }
  if (n_watermarks == 0) throw InvalidArgument("slot plan needs at least one watermark");
}

std::size_t SlotPlan::frames_per_slot(int sample_rate, std::size_t hop) const {
  const double frames = slot_len_ms * sample_rate / 1000.0 / static_cast<double>(hop);
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(frames - 1e-9)));
}

std::size_t SlotPlan::owner(std::size_t frame, int sample_rate, std::size_t hop) const {
  return (frame / frames_per_slot(sample_rate, hop)) % n_watermarks;
}

std::size_t clip_unit(std::span<double> x) {
  std::size_t n = 0;
  for (double& v : x) {
    if (v > 1.0) {
      v = 1.0;
      ++n;
    } else if (v < -1.0) {
      v = -1.0;
      ++n;
    }
  }
  return n;
}

namespace {

void check_alphas(std::span<const double> alphas) {
  for (double a : alphas) {
    if (!(a >= 0.0) || !std::isfinite(a)) throw InvalidArgument("alphas must be finite and >= 0");
  }
}

MuxResult finish(const AudioBuffer& x, std::vector<double> y) {
  const std::size_t clipped = clip_unit(y);
  return {x.with_samples(std::move(y)), clipped};
}

}  // namespace

MuxResult mux_parallel(const AudioBuffer& x, std::span<const Perturbation> perturbations,
                       std::span<const double> alphas) {
  if (perturbations.size() != alphas.size()) {
    throw InvalidArgument("mux_parallel: perturbation and alpha counts differ");
  }
  check_alphas(alphas);
  std::vector<double> y = x.vec();
  for (std::size_t i = 0; i < perturbations.size(); ++i) {
    const auto& d = perturbations[i].delta;
    if (d.size() != x.size()) throw InvalidArgument("mux_parallel: perturbation length differs from host");
    if (alphas[i] == 0.0) continue;
    for (std::size_t n = 0; n < y.size(); ++n) y[n] += alphas[i] * d[n];
  }
  return finish(x, std::move(y));
}

MuxResult mux_sequential(const AudioBuffer& x, std::span<const WatermarkSpec> order,
                         const BackendConfig& cfg, std::span<const double> gains) {
  if (order.empty()) throw InvalidArgument("mux_sequential: empty order");
  if (!gains.empty()) {
    if (gains.size() != order.size()) throw InvalidArgument("mux_sequential: one gain per stage");
    check_alphas(gains);
  }
  MuxResult cur{x, 0};
  for (std::size_t i = 0; i < order.size(); ++i) {
    const double g = gains.empty() ? 1.0 : gains[i];
    if (g == 0.0) continue;
    const Perturbation p = embed(cur.audio, order[i], cfg);
    std::vector<double> y = cur.audio.vec();
    for (std::size_t n = 0; n < y.size(); ++n) y[n] += g * p.delta[n];
    const std::size_t clipped = clip_unit(y);
    cur = {x.with_samples(std::move(y)), cur.clipped + clipped};
  }
  return cur;
}

std::vector<RoutingMask> make_naive_masks(std::span<const double> alphas, const TfDims& dims) {
  check_alphas(alphas);
  std::vector<RoutingMask> masks;
  for (double a : alphas) {
    masks.push_back({std::vector<double>(dims.n_frames * dims.n_bins(), a), dims, MaskLabel::kNaive});
  }
  return masks;
}

std::vector<RoutingMask> make_fdm_masks(const BandPlan& plan, std::span<const double> alphas,
                                        const TfDims& dims) {
  plan.validate(dims.sample_rate);
  if (plan.bands.size() != alphas.size()) throw InvalidArgument("make_fdm_masks: one band per alpha");
  check_alphas(alphas);
  std::vector<RoutingMask> masks;
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    RoutingMask m{std::vector<double>(dims.n_frames * dims.n_bins(), 0.0), dims, MaskLabel::kFdm};
    bool any = false;
    for (std::size_t k = 0; k < dims.n_bins(); ++k) {
      if (!plan.contains(i, k, dims)) continue;
      any = true;
      for (std::size_t t = 0; t < dims.n_frames; ++t) m.at(t, k) = alphas[i];
    }
    if (!any) throw InvalidArgument("make_fdm_masks: band " + std::to_string(i) + " holds no bin");
    masks.push_back(std::move(m));
  }
  return masks;
}

std::vector<RoutingMask> make_tdm_masks(const SlotPlan& plan, std::span<const double> alphas,
                                        const TfDims& dims) {
  plan.validate();
  if (plan.n_watermarks != alphas.size()) throw InvalidArgument("make_tdm_masks: one slot owner per alpha");
  check_alphas(alphas);
  std::vector<RoutingMask> masks;
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    masks.push_back({std::vector<double>(dims.n_frames * dims.n_bins(), 0.0), dims, MaskLabel::kTdm});
  }
  for (std::size_t t = 0; t < dims.n_frames; ++t) {
    const std::size_t o = plan.owner(t, dims.sample_rate, dims.stft.hop);
    for (std::size_t k = 0; k < dims.n_bins(); ++k) masks[o].at(t, k) = alphas[o];
  }
  return masks;
}

MuxResult apply_tf_routing(const AudioBuffer& x, std::span<const Perturbation> perturbations,
                           std::span<const RoutingMask> masks, const StftConfig& cfg) {
  if (perturbations.size() != masks.size()) {
    throw InvalidArgument("apply_tf_routing: perturbation and mask counts differ");
  }
  Spectrogram mixed = stft(x, cfg);
  const TfDims dims = TfDims::of(mixed);
  for (std::size_t i = 0; i < masks.size(); ++i) {
    if (!(masks[i].dims == dims) || masks[i].grid.size() != dims.n_frames * dims.n_bins()) {
      throw InvalidArgument("apply_tf_routing: mask dimensions differ from the STFT grid");
    }
    if (perturbations[i].delta.size() != x.size()) {
      throw InvalidArgument("apply_tf_routing: perturbation length differs from host");
    }
    const Spectrogram d = stft(x.with_samples(perturbations[i].delta), cfg);
    auto out = mixed.grid();
    auto in = d.grid();
    const auto& w = masks[i].grid;
    for (std::size_t c = 0; c < out.size(); ++c) {
      if (w[c] != 0.0) out[c] += w[c] * in[c];
    }
  }
  return finish(x, istft(mixed).vec());
}

}  // namespace wavemux
