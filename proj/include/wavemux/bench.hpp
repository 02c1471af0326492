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


#ifndef WAVEMUX_BENCH_HPP_
#define WAVEMUX_BENCH_HPP_

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wavemux/attacks.hpp"
#include "wavemux/backends.hpp"
#include "wavemux/corpus.hpp"
#include "wavemux/mux.hpp"
#include "wavemux/patfm.hpp"

namespace wavemux {

enum class Mode { kSingleSs, kSingleQim, kSinglePhase, kParallel, kSeqAB, kSeqBA, kFdm, kTdm, kPatfm };

std::string to_string(Mode mode);
Mode mode_from_string(std::string_view name);
std::vector<Mode> all_modes();
// Modes carrying both configured watermarks A and B.
bool is_multiplexed(Mode mode);

enum class FusionMode { kUniform, kCalibrated, kFixed };

// Everything a benchmark run depends on. The text form is a flat list of
// `key = value` lines with dotted keys; see README for the grammar.
struct BenchConfig {
  std::filesystem::path dataset_dir;  // empty: synthetic corpus
  std::size_t utterance_cap = 50;
  double synth_seconds = 3.0;
  bool normalize = true;  // scale every utterance to level_dbfs
  double level_dbfs = kDefaultLevelDbfs;

  std::vector<Mode> modes;
  std::vector<AttackSpec> attacks;
  std::uint64_t seed = 1;
  std::vector<double> target_fprs{0.05, 0.01};
  std::filesystem::path output_dir = "bench_out";
  std::size_t jobs = 1;
  bool quantize = true;  // PCM16 after embedding and after each attack
  bool compute_stoi = true;

  BackendId wm_a = BackendId::kPhase;
  BackendId wm_b = BackendId::kSpreadSpectrum;
  double alpha_a = 1.0;
  double alpha_b = 1.0;
  std::size_t payload_bits = 16;
  BackendConfig backends;

  BandPlan fdm_bands;  // empty: BandPlan::default_for(2)
  double tdm_slot_ms = 60.0;
  PaTfmConfig patfm;

  FusionMode fusion = FusionMode::kUniform;
  std::vector<double> fusion_weights;  // for kFixed, [w_a, w_b]

  std::map<std::string, std::string> codec_commands;  // name -> template
  std::size_t max_procs = 4;
  std::chrono::seconds codec_timeout{120};

  AttackSpec sweep_attack{AttackKind::kGaussianNoise, {}};
  std::vector<double> sweep_strengths;

  void validate() const;
  // Every field, one `key = value` line each, in a fixed order.
  std::string canonical() const;
  // FNV-1a 64 of canonical(), as 16 hex digits.
  std::string hash() const;
};

// Desk-scale defaults: all eight modes and the non-neural attack battery
// (MP3 and Opus run through ffmpeg).
BenchConfig default_bench_config();
BenchConfig parse_bench_config(std::string_view text, BenchConfig base = default_bench_config());
BenchConfig load_bench_config(const std::filesystem::path& path);

// Synthetic or ingested utterances, level-normalized when configured.
std::vector<Utterance> load_corpus(const BenchConfig& cfg);

// Watermarks x in one mode. Single modes embed specs[0] scaled by alphas[0];
// multiplexed modes take the A and B specs in that order, with alphas scaling
// each perturbation (per stage for the sequential modes). Routing plans come
// from cfg. Not quantized.
MuxResult embed_mode(Mode mode, const AudioBuffer& x, std::span<const WatermarkSpec> specs,
                     std::span<const double> alphas, const BenchConfig& cfg);

struct DetectorMetrics {
  std::string detector;
  double auc = 0.0;
  std::vector<double> tpr;  // per target FPR
};

struct CellResult {
  Mode mode = Mode::kSingleSs;
  std::string attack;
  bool failed = false;
  std::string reason;
  std::size_t n_pos = 0;
  std::size_t n_neg = 0;
  double auc = 0.0;
  std::vector<double> tpr;  // per target FPR
  std::vector<DetectorMetrics> detectors;
};

struct ModeSummary {
  Mode mode = Mode::kSingleSs;
  double mean_snr_db = 0.0;
  double mean_stoi = 0.0;
  std::size_t clipped = 0;
  std::size_t cells_ok = 0;
  double macro_auc = 0.0;
  std::vector<double> macro_tpr;
  std::vector<double> fusion_weights;
};

struct EvalReport {
  int schema_version = 1;
  std::string config_hash;
  std::uint64_t seed = 0;
  std::size_t n_utterances = 0;
  std::vector<double> target_fprs;
  std::vector<Mode> modes;
  std::vector<std::string> attacks;
  std::vector<CellResult> cells;  // mode-major
  std::vector<ModeSummary> summaries;

  const CellResult& cell(Mode mode, const std::string& attack) const;
  const ModeSummary& summary(Mode mode) const;
};

// Report equality treating NaN as equal to NaN.
bool same_report(const EvalReport& a, const EvalReport& b);

// Watermarks every utterance in every mode, attacks both pools, scores them
// and aggregates. Macro averages skip failed cells and the `none` attack when
// other attacks are present. Progress and external diagnostics go to log.
EvalReport run_benchmark(const BenchConfig& cfg, std::ostream* log = nullptr);
EvalReport run_benchmark(const BenchConfig& cfg, std::span<const Utterance> corpus,
                         std::ostream* log = nullptr);

enum class ReportFormat { kCsv, kJson };

std::string report_to_json(const EvalReport& report);
EvalReport report_from_json(std::string_view text);

// kCsv writes table1.csv (attack rows, an AUC/TPR column pair per mode) and
// table2.csv (per-mode averages); kJson writes report.json. Returns paths.
std::vector<std::filesystem::path> emit_report(const EvalReport& report, ReportFormat format,
                                               const std::filesystem::path& out_dir);

struct SweepSeries {
  Mode mode = Mode::kSingleSs;
  std::string detector;  // backend name or "fused"
  std::vector<std::vector<double>> tpr;  // [point][fpr]
  std::vector<double> auc;               // [point]
};

struct SweepResult {
  AttackKind kind = AttackKind::kNone;
  std::string param;
  std::vector<std::string> labels;  // "none" first, then the strengths
  std::vector<double> target_fprs;
  std::vector<SweepSeries> series;

  const SweepSeries& find(Mode mode, const std::string& detector) const;
};

// Point 0 is the unattacked condition; point i > 0 sets the attack's
// strength parameter to strengths[i - 1].
SweepResult strength_sweep(const BenchConfig& cfg, const AttackSpec& base, std::span<const double> strengths,
                           std::span<const Utterance> corpus, std::ostream* log = nullptr);
std::filesystem::path emit_sweep(const SweepResult& sweep, const std::filesystem::path& out_dir);

struct CaseStudy {
  TfDims dims;
  // dB magnitude grids, [frame][bin], floored at kCaseFloorDb.
  std::vector<double> original, watermarked, difference, attacked, attacked_difference;
};
inline constexpr double kCaseFloorDb = -200.0;

CaseStudy case_study(const AudioBuffer& x, const AudioBuffer& watermarked, const AudioBuffer& attacked);
// Writes one text grid per panel (rows are frames) and returns the paths.
std::vector<std::filesystem::path> dump_case_study(const AudioBuffer& x, const AudioBuffer& watermarked,
                                                   const AudioBuffer& attacked,
                                                   const std::filesystem::path& out_dir);

}  // namespace wavemux

#endif  // WAVEMUX_BENCH_HPP_
