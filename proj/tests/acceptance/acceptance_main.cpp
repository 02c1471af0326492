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

// Acceptance suite. Prints one PASS/FAIL line per criterion and exits non-zero
// if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "wavemux/attacks.hpp"
#include "wavemux/audio.hpp"
#include "wavemux/backends.hpp"
#include "wavemux/bench.hpp"
#include "wavemux/fft.hpp"
#include "wavemux/metrics.hpp"
#include "wavemux/mux.hpp"
#include "wavemux/stft.hpp"

namespace wm = wavemux;

namespace {

constexpr std::size_t kUtterances = 50;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::vector<double> gaussian(std::size_t n, std::mt19937_64& gen, double sd) {
  std::normal_distribution<double> d(0.0, sd);
  std::vector<double> v(n);
  for (double& x : v) x = d(gen);
  return v;
}

double rel_err(const std::vector<double>& a, const std::vector<double>& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += (a[i] - b[i]) * (a[i] - b[i]);
    den += b[i] * b[i];
  }
  return std::sqrt(num / den);
}

const std::vector<wm::Utterance>& corpus() {
  static const std::vector<wm::Utterance> c = [] {
    wm::BenchConfig cfg = wm::default_bench_config();
    cfg.utterance_cap = kUtterances;
    return wm::load_corpus(cfg);
  }();
  return c;
}

Outcome stft_reconstruction() {
  std::mt19937_64 gen(101);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const std::size_t len = 1024 + gen() % 64000;
    const wm::AudioBuffer x(gaussian(len, gen, 0.1), 16000);
    const wm::AudioBuffer y = wm::istft(wm::stft(x));
    if (y.size() != len) return {false, "length changed for signal " + std::to_string(i)};
    worst = std::max(worst, rel_err(y.vec(), x.vec()));
  }
  return {worst < 1e-6, "max relative L2 error " + fmt("%.3g", worst) + " over 100 signals"};
}

Outcome clean_round_trip() {
  std::ostringstream out;
  bool pass = true;
  for (wm::BackendId id : {wm::BackendId::kSpreadSpectrum, wm::BackendId::kQim, wm::BackendId::kPhase}) {
    std::vector<double> pos, neg;
    double max_ber = 0.0, null_sum = 0.0;
    std::size_t null_n = 0;
    for (std::size_t i = 0; i < corpus().size(); ++i) {
      const wm::AudioBuffer& x = corpus()[i].audio;
      const wm::WatermarkSpec spec{id, wm::Payload::random(500 + i), {1000 + i, id}, 0.0};
      const wm::AudioBuffer y = wm::quantize_pcm16(wm::apply_perturbation(x, wm::embed(x, spec)));
      const wm::DetectionScore s = wm::detect(y, spec.key);
      pos.push_back(s.z);
      neg.push_back(wm::detect(x, spec.key).z);
      max_ber = std::max(max_ber, wm::bit_error_rate(spec.payload, s.bits));
      for (std::uint64_t k = 0; k < 8; ++k) {
        null_sum += wm::detect(y, {90000 + 8 * i + k, id}).z;
        ++null_n;
      }
    }
    const double auc = wm::roc_auc(pos, neg);
    const double null_mean = null_sum / static_cast<double>(null_n);
    const bool ok = auc == 1.0 && max_ber == 0.0 && std::abs(null_mean) <= 0.2;
    pass = pass && ok;
    out << wm::to_string(id) << ": AUC " << auc << ", max BER " << max_ber << ", wrong-key z mean "
        << fmt("%+.3f", null_mean) << "; ";
  }
  return {pass, out.str() + std::to_string(corpus().size()) + " utterances"};
}

Outcome routing_equivalence() {
  std::mt19937_64 gen(303);
  double worst = 0.0;
  for (int c = 0; c < 20; ++c) {
    const std::size_t len = 4000 + gen() % 60000;
    const std::size_t n = 1 + gen() % 3;
    const wm::AudioBuffer x(gaussian(len, gen, 0.05), 16000);
    std::vector<wm::Perturbation> d;
    std::vector<double> alphas;
    for (std::size_t i = 0; i < n; ++i) {
      d.push_back({gaussian(len, gen, 0.01), wm::BackendId::kSpreadSpectrum});
      alphas.push_back(0.25 + 0.5 * static_cast<double>(gen() % 100) / 100.0);
    }
    const auto masks = wm::make_naive_masks(alphas, wm::TfDims::for_signal(len, 16000));
    const wm::MuxResult routed = wm::apply_tf_routing(x, d, masks);
    const wm::MuxResult added = wm::mux_parallel(x, d, alphas);
    worst = std::max(worst, rel_err(routed.audio.vec(), added.audio.vec()));
  }
  return {worst < 1e-6, "max relative error " + fmt("%.3g", worst) + " over 20 cases"};
}

Outcome fdm_confinement() {
  const int fs = 16000;
  const wm::BandPlan plan = wm::BandPlan::default_for(2, fs);
  double worst = 0.0;
  for (std::size_t i = 0; i < 20; ++i) {
    const wm::AudioBuffer& x = corpus()[i].audio;
    const wm::TfDims dims = wm::TfDims::for_signal(x.size(), fs);
    std::vector<wm::Perturbation> d;
    for (std::uint64_t k = 0; k < 2; ++k) {
      d.push_back(wm::embed(x, {wm::BackendId::kSpreadSpectrum, wm::Payload::random(k), {2000 + 2 * i + k}, 0.0}));
    }
    for (std::size_t band = 0; band < 2; ++band) {
      std::vector<double> a{0.0, 0.0};
      a[band] = 1.0;
      const wm::AudioBuffer y = wm::apply_tf_routing(x, d, wm::make_fdm_masks(plan, a, dims)).audio;
      std::vector<double> diff(x.size());
      for (std::size_t n = 0; n < diff.size(); ++n) diff[n] = y[n] - x[n];
      const auto spec = wm::rfft(diff);
      const wm::Band b = plan.bands[band];
      double in = 0.0, out = 0.0;
      for (std::size_t k = 0; k < spec.size(); ++k) {
        const double f = static_cast<double>(k) * fs / static_cast<double>(diff.size());
        const bool inside = f >= b.lo_hz && (f < b.hi_hz || (b.hi_hz >= fs / 2.0 && f >= fs / 2.0));
        (inside ? in : out) += std::norm(spec[k]);
      }
      worst = std::max(worst, out / (in + out));
    }
  }
  return {worst <= 0.05, "max leakage " + fmt("%.4f", worst) + " over 20 utterances x 2 bands"};
}

double brute_auc(const std::vector<double>& pos, const std::vector<double>& neg) {
  double wins = 0.0;
  for (double p : pos) {
    for (double n : neg) wins += p > n ? 1.0 : p == n ? 0.5 : 0.0;
  }
  return wins / static_cast<double>(pos.size() * neg.size());
}

double brute_tpr(const std::vector<double>& pos, const std::vector<double>& neg, double fpr) {
  const auto k = static_cast<std::size_t>(std::floor(fpr * static_cast<double>(neg.size())));
  std::vector<double> candidates = neg;
  candidates.push_back(
      std::nextafter(*std::max_element(neg.begin(), neg.end()), std::numeric_limits<double>::infinity()));
  double best = std::numeric_limits<double>::infinity();
  for (double t : candidates) {
    std::size_t over = 0;
    for (double n : neg) over += n >= t ? 1 : 0;
    if (over <= k) best = std::min(best, t);
  }
  std::size_t hit = 0;
  for (double p : pos) hit += p >= best ? 1 : 0;
  return static_cast<double>(hit) / static_cast<double>(pos.size());
}

Outcome metrics_oracle() {
  std::mt19937_64 gen(505);
  std::size_t mismatches = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t np = 1 + gen() % 50, nn = 1 + gen() % 50;
    std::uniform_int_distribution<int> d(0, 1 + static_cast<int>(gen() % 30));
    std::vector<double> pos(np), neg(nn);
    for (double& v : pos) v = d(gen) + (trial % 2 ? 0.5 * d(gen) : 0.0);
    for (double& v : neg) v = d(gen);
    if (wm::roc_auc(pos, neg) != brute_auc(pos, neg)) ++mismatches;
    for (double fpr : {0.01, 0.05, 0.1, 0.5}) {
      if (wm::tpr_at_fpr(pos, neg, fpr) != brute_tpr(pos, neg, fpr)) ++mismatches;
    }
  }
  double worst_fpr = 0.0;
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 100 + gen() % 900;
    std::vector<double> neg(n);
    std::uniform_int_distribution<int> d(0, 1 + static_cast<int>(gen() % 200));
    for (double& v : neg) v = trial % 2 ? d(gen) : d(gen) * 0.01 + gaussian(1, gen, 1.0)[0];
    worst_fpr = std::max(worst_fpr, wm::fraction_at_or_above(neg, wm::calibrate_threshold(neg, 0.01)));
  }
  return {mismatches == 0 && worst_fpr <= 0.01,
          std::to_string(mismatches) + " oracle mismatches over 1000 sets; max calibrated FPR " +
              fmt("%.4f", worst_fpr) + " over 500 sets"};
}

// Constituent detectors of the default PA-TFM pair.
const std::vector<std::pair<wm::Mode, std::string>> kSingles{{wm::Mode::kSinglePhase, "phase"},
                                                             {wm::Mode::kSingleSs, "ss"}};

struct SweepCheck {
  std::string best;
  double worst_gap = -1.0;  // max over points and FPRs of (best single - fused)
  std::string curves;
};

SweepCheck check_sweep(const wm::SweepResult& sw) {
  SweepCheck c;
  double best_area = -1.0;
  std::ostringstream curves;
  for (const auto& [mode, det] : kSingles) {
    const wm::SweepSeries& s = sw.find(mode, det);
    double area = 0.0;
    curves << det << "=[";
    for (std::size_t i = 0; i < s.tpr.size(); ++i) {
      area += s.tpr[i][0];
      curves << (i ? " " : "") << s.tpr[i][0];
    }
    curves << "] ";
    if (area > best_area) {
      best_area = area;
      c.best = det;
    }
  }
  const wm::SweepSeries& fused = sw.find(wm::Mode::kPatfm, "fused");
  curves << "fused=[";
  for (std::size_t i = 0; i < fused.tpr.size(); ++i) {
    curves << (i ? " " : "") << fused.tpr[i][0];
    for (std::size_t f = 0; f < fused.tpr[i].size(); ++f) {
      double best = 0.0;
      for (const auto& [mode, det] : kSingles) best = std::max(best, sw.find(mode, det).tpr[i][f]);
      c.worst_gap = std::max(c.worst_gap, best - fused.tpr[i][f]);
    }
  }
  curves << "]";
  c.curves = curves.str();
  return c;
}

Outcome complementarity() {
  wm::BenchConfig cfg = wm::default_bench_config();
  cfg.utterance_cap = kUtterances;
  cfg.modes = {wm::Mode::kSinglePhase, wm::Mode::kSingleSs, wm::Mode::kPatfm};
  const std::vector<double> cutoffs{4000, 3000, 2000, 1500, 1000, 700, 500};
  const std::vector<double> shifts{0.5, 1, 2, 5, 10, 20};
  const SweepCheck lp =
      check_sweep(wm::strength_sweep(cfg, wm::AttackSpec::parse("lowpass"), cutoffs, corpus()));
  const SweepCheck ts =
      check_sweep(wm::strength_sweep(cfg, wm::AttackSpec::parse("time_shift"), shifts, corpus()));
  const bool pass = lp.best != ts.best && lp.worst_gap <= 0.05 && ts.worst_gap <= 0.05;
  return {pass, "lowpass argmax " + lp.best + ", time_shift argmax " + ts.best + ", max fused shortfall " +
                    fmt("%.3f", std::max(lp.worst_gap, ts.worst_gap)) + "; TPR@0.05 lowpass " + lp.curves +
                    "; time_shift " + ts.curves};
}

Outcome ordering() {
  wm::BenchConfig cfg = wm::default_bench_config();
  cfg.utterance_cap = kUtterances;
  const wm::EvalReport r = wm::run_benchmark(cfg, corpus());
  const double pa = r.summary(wm::Mode::kPatfm).macro_auc;
  std::ostringstream out;
  out << "macro AUC patfm " << fmt("%.4f", pa);
  const auto macro_tpr = [&](wm::Mode m) { return r.summary(m).macro_tpr.back(); };
  bool pass = std::isfinite(pa);
  for (wm::Mode m : {wm::Mode::kParallel, wm::Mode::kFdm, wm::Mode::kTdm, wm::Mode::kSeqAB, wm::Mode::kSeqBA}) {
    const double v = r.summary(m).macro_auc;
    out << ", " << wm::to_string(m) << " " << fmt("%.4f", v);
    pass = pass && pa >= v - 0.01;
  }
  out << "; macro TPR@" << r.target_fprs.back() << " patfm " << fmt("%.4f", macro_tpr(wm::Mode::kPatfm));
  for (wm::Mode m : {wm::Mode::kParallel, wm::Mode::kFdm, wm::Mode::kTdm, wm::Mode::kSeqAB, wm::Mode::kSeqBA}) {
    out << ", " << wm::to_string(m) << " " << fmt("%.4f", macro_tpr(m));
  }
  std::size_t failed = 0;
  for (const auto& c : r.cells) failed += c.failed ? 1 : 0;
  out << "; " << r.summary(wm::Mode::kPatfm).cells_ok << " attacks averaged, " << failed
      << " cells unavailable";
  return {pass, out.str()};
}

Outcome attack_calibration() {
  double worst = 0.0;
  for (std::size_t i = 0; i < 20; ++i) {
    for (double snr : {30.0, 20.0, 10.0, 5.0, 0.0}) {
      const wm::AudioBuffer& x = corpus()[i].audio;
      const wm::AttackSpec spec = wm::AttackSpec::parse("gaussian_noise:snr_db=" + fmt("%g", snr));
      const wm::AudioBuffer y = wm::attack_apply(x, spec, 7 + i);
      worst = std::max(worst, std::abs(wm::snr_db(x, y) - snr));
    }
  }
  const wm::AudioBuffer& x = corpus()[0].audio;
  auto apply = [&](const char* s) { return wm::attack_apply(x, wm::AttackSpec::parse(s), 3).vec(); };
  std::vector<std::string> broken;
  auto exact = [&](const char* s) {
    if (apply(s) != x.vec()) broken.push_back(s);
  };
  auto near = [&](const char* name, const std::vector<double>& y, double tol) {
    if (y.size() != x.size() || rel_err(y, x.vec()) >= tol) broken.push_back(name);
  };
  exact("none");
  exact("amplitude_scale:gain=1");
  exact("zero_mask:fraction=0");
  exact("crop_invert:fraction=0");
  exact("echo:gain=0");
  near("fft_mask:fraction=0", apply("fft_mask:fraction=0"), 1e-6);
  near("time_stretch:rate=1", apply("time_stretch:rate=1"), 1e-3);
  const std::vector<double> impulse{1.0};
  near("unit impulse rir", wm::rir_convolve(x, impulse).vec(), 1e-6);
  const wm::CodecCommand copy{"copy", "cp {in} {out}"};
  try {
    const auto y = wm::external_codec_attack(x, copy, {}).vec();
    double diff = 0.0;
    for (std::size_t n = 0; n < y.size(); ++n) diff = std::max(diff, std::abs(y[n] - x[n]));
    if (y.size() != x.size() || diff > 1.0 / 32768.0) broken.push_back("copy codec");
  } catch (const std::exception&) {
    broken.push_back("copy codec");
  }
  std::string detail = "max |SNR error| " + fmt("%.3f", worst) + " dB over 100 draws; ";
  if (broken.empty()) {
    detail += "9 identity degenerations hold";
  } else {
    detail += "broken:";
    for (const auto& b : broken) detail += " " + b;
  }
  return {worst <= 0.3 && broken.empty(), detail};
}

Outcome determinism() {
  wm::BenchConfig cfg = wm::default_bench_config();
  cfg.utterance_cap = kUtterances;
  std::erase_if(cfg.attacks, [](const wm::AttackSpec& a) { return a.kind == wm::AttackKind::kExternalCodec; });
  const std::string a = wm::report_to_json(wm::run_benchmark(cfg, corpus()));
  const std::string b = wm::report_to_json(wm::run_benchmark(cfg, corpus()));
  return {a == b, std::to_string(cfg.modes.size() * cfg.attacks.size()) + " cells, report " +
                      std::to_string(a.size()) + " bytes, " + (a == b ? "identical" : "differs")};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"stft-perfect-reconstruction", stft_reconstruction},
      {"clean-round-trip", clean_round_trip},
      {"naive-routing-equals-parallel", routing_equivalence},
      {"fdm-confinement", fdm_confinement},
      {"metrics-oracle", metrics_oracle},
      {"complementarity", complementarity},
      {"patfm-ordering", ordering},
      {"attack-calibration", attack_calibration},
      {"determinism", determinism},
  };
  int failures = 0;
  for (const auto& [name, run] : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << " (" << fmt("%.1f", secs) << " s)"
              << std::endl;
    failures += o.pass ? 0 : 1;
  }
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
