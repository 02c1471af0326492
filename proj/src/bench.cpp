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
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <numeric>
#include <ostream>
#include <thread>

#include <nlohmann/json.hpp>

#include "wavemux/bench.hpp"
#include "wavemux/errors.hpp"
#include "wavemux/metrics.hpp"
#include "wavemux/rng.hpp"

namespace wavemux {

namespace {

using Json = nlohmann::json;

std::uint64_t mix(std::uint64_t a, std::uint64_t b, std::uint64_t c = 0) {
  return splitmix64(splitmix64(splitmix64(a) ^ b) ^ c);
}

constexpr BackendId kBackends[] = {BackendId::kSpreadSpectrum, BackendId::kQim, BackendId::kPhase};

std::size_t backend_index(BackendId id) { return static_cast<std::size_t>(id); }

// One key per backend, shared by every utterance of a run.
WatermarkKey key_for(const BenchConfig& cfg, BackendId id) {
  return {mix(cfg.seed, 0x6b6579, backend_index(id)), id};
}

Payload payload_for(const BenchConfig& cfg, std::size_t utt, BackendId id) {
  return Payload::random(mix(cfg.seed, 0x7061796c6f6164 + utt, backend_index(id)), cfg.payload_bits);
}

std::vector<BackendId> detectors_for(const BenchConfig& cfg, Mode mode) {
  switch (mode) {
    case Mode::kSingleSs: return {BackendId::kSpreadSpectrum};
    case Mode::kSingleQim: return {BackendId::kQim};
    case Mode::kSinglePhase: return {BackendId::kPhase};
    default: return {cfg.wm_a, cfg.wm_b};
  }
}

std::string attack_label(const AttackSpec& a) {
  return a.kind == AttackKind::kExternalCodec ? a.name() : a.to_text();
}

std::vector<AttackSpec> resolve_attacks(const BenchConfig& cfg, std::vector<AttackSpec> attacks) {
  for (AttackSpec& a : attacks) {
    if (a.kind != AttackKind::kExternalCodec || a.params.count("command")) continue;
    const auto it = cfg.codec_commands.find(a.name());
    if (it == cfg.codec_commands.end()) throw InvalidArgument("no command for codec " + a.name());
    a.params["command"] = it->second;
  }
  return attacks;
}

struct Embedded {
  AudioBuffer audio;
  std::size_t clipped = 0;
};

Embedded watermark(const BenchConfig& cfg, Mode mode, const AudioBuffer& x, std::size_t utt) {
  auto spec_for = [&](BackendId id) { return WatermarkSpec{id, payload_for(cfg, utt, id), key_for(cfg, id), 0.0}; };
  std::vector<WatermarkSpec> specs;
  std::vector<double> alphas;
  if (is_multiplexed(mode)) {
    specs = {spec_for(cfg.wm_a), spec_for(cfg.wm_b)};
    alphas = {cfg.alpha_a, cfg.alpha_b};
  } else {
    specs = {spec_for(detectors_for(cfg, mode)[0])};
    alphas = {1.0};
  }
  MuxResult r = embed_mode(mode, x, specs, alphas, cfg);
  if (cfg.quantize) return {quantize_pcm16(r.audio), r.clipped};
  return {std::move(r.audio), r.clipped};
}

// Raw per-utterance outputs. z[mode][attack][detector]; neg[attack][backend].
struct UttResult {
  std::vector<double> snr, stoi;
  std::vector<std::size_t> clipped;
  std::vector<std::vector<std::vector<double>>> z;
  std::vector<std::vector<double>> clean_z;  // [mode][detector], for fusion calibration
  std::vector<std::array<double, 3>> neg;
  std::array<double, 3> clean_neg{};
  std::vector<std::vector<std::string>> error;  // [mode][attack], "" when fine
};

struct Evaluation {
  std::vector<AttackSpec> attacks;
  std::vector<UttResult> utts;
};

Evaluation evaluate(const BenchConfig& cfg, std::span<const Utterance> corpus, std::vector<AttackSpec> attacks,
                    bool quality, std::ostream* log) {
  if (corpus.size() < 2) throw InvalidArgument("benchmark needs at least two utterances");
  cfg.validate();
  set_external_process_cap(cfg.max_procs);
  Evaluation ev{resolve_attacks(cfg, std::move(attacks)), {}};
  const std::size_t n_modes = cfg.modes.size(), n_att = ev.attacks.size();
  ev.utts.resize(corpus.size());
  const ExternalOptions ext{{}, cfg.codec_timeout};
  std::array<bool, 3> need_neg{};
  for (Mode m : cfg.modes) {
    for (BackendId d : detectors_for(cfg, m)) need_neg[backend_index(d)] = true;
  }
  std::mutex log_mu;
  auto note = [&](const std::string& msg) {
    if (!log) return;
    std::lock_guard lock(log_mu);
    *log << msg << '\n';
  };

  auto run_one = [&](std::size_t i) {
    const AudioBuffer& x = corpus[i].audio;
    UttResult& u = ev.utts[i];
    u.snr.assign(n_modes, 0.0);
    u.stoi.assign(n_modes, 0.0);
    u.clipped.assign(n_modes, 0);
    u.z.assign(n_modes, std::vector<std::vector<double>>(n_att));
    u.clean_z.assign(n_modes, {});
    u.neg.assign(n_att, {0.0, 0.0, 0.0});
    u.error.assign(n_modes, std::vector<std::string>(n_att));
    auto attacked = [&](const AudioBuffer& y, std::size_t a) {
      AudioBuffer out = attack_apply(y, ev.attacks[a], mix(cfg.seed, 0x61747461636b + i, a), ext);
      return cfg.quantize ? quantize_pcm16(out) : out;
    };
    auto score = [&](const AudioBuffer& y, BackendId id) {
      return detect(y, key_for(cfg, id), cfg.payload_bits, cfg.backends).logit;
    };
    for (BackendId id : kBackends) {
      if (need_neg[backend_index(id)]) u.clean_neg[backend_index(id)] = score(x, id);
    }
    for (std::size_t a = 0; a < n_att; ++a) {
      try {
        const AudioBuffer y = attacked(x, a);
        for (BackendId id : kBackends) {
          if (need_neg[backend_index(id)]) u.neg[a][backend_index(id)] = score(y, id);
        }
      } catch (const ExternalError& e) {
        note(corpus[i].id + ": " + attack_label(ev.attacks[a]) + " failed: " + e.what() + "\n" + e.diagnostics());
        for (std::size_t m = 0; m < n_modes; ++m) u.error[m][a] = e.what();
      }
    }
    for (std::size_t m = 0; m < n_modes; ++m) {
      const Embedded wm = watermark(cfg, cfg.modes[m], x, i);
      u.clipped[m] = wm.clipped;
      if (quality) {
        u.snr[m] = snr_db(x, wm.audio);
        if (cfg.compute_stoi) u.stoi[m] = stoi(x, wm.audio);
      }
      const std::vector<BackendId> dets = detectors_for(cfg, cfg.modes[m]);
      if (cfg.fusion == FusionMode::kCalibrated) {
        for (BackendId d : dets) u.clean_z[m].push_back(score(wm.audio, d));
      }
      for (std::size_t a = 0; a < n_att; ++a) {
        if (!u.error[m][a].empty()) continue;
        try {
          const AudioBuffer y = attacked(wm.audio, a);
          for (BackendId d : dets) u.z[m][a].push_back(score(y, d));
        } catch (const ExternalError& e) {
          note(corpus[i].id + ": " + attack_label(ev.attacks[a]) + " failed: " + e.what() + "\n" + e.diagnostics());
          u.error[m][a] = e.what();
        }
      }
    }
    note("utterance " + std::to_string(i + 1) + "/" + std::to_string(corpus.size()) + " " + corpus[i].id);
  };

  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex err_mu;
  auto worker = [&] {
    for (std::size_t i = next++; i < corpus.size(); i = next++) {
      try {
        run_one(i);
      } catch (...) {
        std::lock_guard lock(err_mu);
        if (!first_error) first_error = std::current_exception();
        next = corpus.size();
      }
    }
  };
  const std::size_t n_threads = std::min(cfg.jobs, corpus.size());
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (std::thread& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
  return ev;
}

FusionWeights fusion_for(const BenchConfig& cfg, const Evaluation& ev, std::size_t m) {
  const std::vector<BackendId> dets = detectors_for(cfg, cfg.modes[m]);
  if (dets.size() == 1) return FusionWeights::uniform(1);
  if (cfg.fusion == FusionMode::kFixed) return FusionWeights(cfg.fusion_weights);
  if (cfg.fusion == FusionMode::kUniform) return FusionWeights::uniform(dets.size());
  std::vector<std::vector<double>> pos(dets.size()), neg(dets.size());
  for (const UttResult& u : ev.utts) {
    for (std::size_t d = 0; d < dets.size(); ++d) {
      pos[d].push_back(u.clean_z[m][d]);
      neg[d].push_back(u.clean_neg[backend_index(dets[d])]);
    }
  }
  return calibrate_fusion_weights(pos, neg);
}

DetectorMetrics detector_metrics(std::string name, std::span<const double> pos, std::span<const double> neg,
                                 std::span<const double> fprs) {
  DetectorMetrics out{std::move(name), roc_auc(pos, neg), {}};
  for (double f : fprs) out.tpr.push_back(tpr_at_fpr(pos, neg, f));
  return out;
}

// Cell (m, a): per-detector metrics plus the fused one, or the failure.
CellResult make_cell(const BenchConfig& cfg, const Evaluation& ev, std::size_t m, std::size_t a,
                     const FusionWeights& w) {
  CellResult c;
  c.mode = cfg.modes[m];
  c.attack = attack_label(ev.attacks[a]);
  for (const UttResult& u : ev.utts) {
    if (!u.error[m][a].empty()) {
      c.failed = true;
      c.reason = u.error[m][a];
      c.auc = std::nan("");
      c.tpr.assign(cfg.target_fprs.size(), std::nan(""));
      return c;
    }
  }
  const std::vector<BackendId> dets = detectors_for(cfg, c.mode);
  std::vector<double> fused_pos, fused_neg;
  std::vector<std::vector<double>> pos(dets.size()), neg(dets.size());
  for (const UttResult& u : ev.utts) {
    double fp = 0.0, fn = 0.0;
    for (std::size_t d = 0; d < dets.size(); ++d) {
      pos[d].push_back(u.z[m][a][d]);
      neg[d].push_back(u.neg[a][backend_index(dets[d])]);
      fp += w.values()[d] * pos[d].back();
      fn += w.values()[d] * neg[d].back();
    }
    fused_pos.push_back(fp);
    fused_neg.push_back(fn);
  }
  for (std::size_t d = 0; d < dets.size(); ++d) {
    c.detectors.push_back(detector_metrics(std::string(to_string(dets[d])), pos[d], neg[d], cfg.target_fprs));
  }
  if (dets.size() > 1) c.detectors.push_back(detector_metrics("fused", fused_pos, fused_neg, cfg.target_fprs));
  const DetectorMetrics& main = c.detectors.back();
  c.n_pos = fused_pos.size();
  c.n_neg = fused_neg.size();
  c.auc = main.auc;
  c.tpr = main.tpr;
  return c;
}

bool same_double(double a, double b) { return (std::isnan(a) && std::isnan(b)) || a == b; }

bool same_doubles(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), same_double);
}

Json num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

double unnum(const Json& j) {
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "nan") return std::nan("");
    if (s == "inf") return INFINITY;
    if (s == "-inf") return -INFINITY;
    throw InvalidArgument("report: bad number '" + s + "'");
  }
  return j.get<double>();
}

Json nums(const std::vector<double>& v) {
  Json out = Json::array();
  for (double d : v) out.push_back(num(d));
  return out;
}

std::vector<double> unnums(const Json& j) {
  std::vector<double> out;
  for (const Json& e : j) out.push_back(unnum(e));
  return out;
}

std::string cell_text(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

std::string fpr_text(double f) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", f);
  return buf;
}

void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw IoError("cannot write " + p.string());
  out << text;
  if (!out) throw IoError("write failed: " + p.string());
}

}  // namespace

MuxResult embed_mode(Mode mode, const AudioBuffer& x, std::span<const WatermarkSpec> specs,
                     std::span<const double> alphas, const BenchConfig& cfg) {
  const std::size_t need = is_multiplexed(mode) ? 2 : 1;
  if (specs.size() != need || alphas.size() != need) {
    throw InvalidArgument("mode " + to_string(mode) + " takes " + std::to_string(need) + " watermark(s)");
  }
  if (!is_multiplexed(mode) && specs[0].backend != detectors_for(cfg, mode)[0]) {
    throw InvalidArgument("mode " + to_string(mode) + " needs a " + std::string(to_string(detectors_for(cfg, mode)[0])) +
                          " watermark");
  }
  const BackendConfig& bc = cfg.backends;
  auto perts = [&] {
    std::vector<Perturbation> out;
    for (const WatermarkSpec& s : specs) out.push_back(embed(x, s, bc));
    return out;
  };
  const TfDims dims = TfDims::for_signal(x.size(), x.sample_rate(), bc.ss.stft);
  switch (mode) {
    case Mode::kSingleSs:
    case Mode::kSingleQim:
    case Mode::kSinglePhase:
    case Mode::kParallel: return mux_parallel(x, perts(), alphas);
    case Mode::kSeqAB: return mux_sequential(x, specs, bc, alphas);
    case Mode::kSeqBA: {
      const std::vector<WatermarkSpec> ba{specs[1], specs[0]};
      const std::vector<double> g{alphas[1], alphas[0]};
      return mux_sequential(x, ba, bc, g);
    }
    case Mode::kFdm: {
      const BandPlan plan = cfg.fdm_bands.bands.empty() ? BandPlan::default_for(2, x.sample_rate()) : cfg.fdm_bands;
      return apply_tf_routing(x, perts(), make_fdm_masks(plan, alphas, dims), bc.ss.stft);
    }
    case Mode::kTdm:
      return apply_tf_routing(x, perts(), make_tdm_masks(SlotPlan{cfg.tdm_slot_ms, 2}, alphas, dims), bc.ss.stft);
    case Mode::kPatfm: return pa_tfm_embed(x, specs, alphas, cfg.patfm, bc).mux;
  }
  throw InvalidArgument("unknown mode");
}

std::vector<Utterance> load_corpus(const BenchConfig& cfg) {
  std::vector<Utterance> corpus = cfg.dataset_dir.empty()
                                      ? synth_corpus(cfg.utterance_cap, cfg.seed, cfg.synth_seconds)
                                      : ingest_dataset(cfg.dataset_dir, cfg.utterance_cap);
  if (cfg.normalize) {
    for (Utterance& u : corpus) u.audio = normalize_level(u.audio, cfg.level_dbfs);
  }
  return corpus;
}

const CellResult& EvalReport::cell(Mode mode, const std::string& attack) const {
  for (const CellResult& c : cells) {
    if (c.mode == mode && c.attack == attack) return c;
  }
  throw InvalidArgument("report has no cell " + to_string(mode) + " / " + attack);
}

const ModeSummary& EvalReport::summary(Mode mode) const {
  for (const ModeSummary& s : summaries) {
    if (s.mode == mode) return s;
  }
  throw InvalidArgument("report has no mode " + to_string(mode));
}

bool same_report(const EvalReport& a, const EvalReport& b) {
  if (a.schema_version != b.schema_version || a.config_hash != b.config_hash || a.seed != b.seed ||
      a.n_utterances != b.n_utterances || !same_doubles(a.target_fprs, b.target_fprs) || a.modes != b.modes ||
      a.attacks != b.attacks || a.cells.size() != b.cells.size() || a.summaries.size() != b.summaries.size()) {
    return false;
  }
  for (std::size_t i = 0; i < a.cells.size(); ++i) {
    const CellResult &x = a.cells[i], &y = b.cells[i];
    if (x.mode != y.mode || x.attack != y.attack || x.failed != y.failed || x.reason != y.reason ||
        x.n_pos != y.n_pos || x.n_neg != y.n_neg || !same_double(x.auc, y.auc) || !same_doubles(x.tpr, y.tpr) ||
        x.detectors.size() != y.detectors.size()) {
      return false;
    }
    for (std::size_t d = 0; d < x.detectors.size(); ++d) {
      if (x.detectors[d].detector != y.detectors[d].detector || !same_double(x.detectors[d].auc, y.detectors[d].auc) ||
          !same_doubles(x.detectors[d].tpr, y.detectors[d].tpr)) {
        return false;
      }
    }
  }
  for (std::size_t i = 0; i < a.summaries.size(); ++i) {
    const ModeSummary &x = a.summaries[i], &y = b.summaries[i];
    if (x.mode != y.mode || !same_double(x.mean_snr_db, y.mean_snr_db) || !same_double(x.mean_stoi, y.mean_stoi) ||
        x.clipped != y.clipped || x.cells_ok != y.cells_ok || !same_double(x.macro_auc, y.macro_auc) ||
        !same_doubles(x.macro_tpr, y.macro_tpr) || !same_doubles(x.fusion_weights, y.fusion_weights)) {
      return false;
    }
  }
  return true;
}

EvalReport run_benchmark(const BenchConfig& cfg, std::ostream* log) {
  const std::vector<Utterance> corpus = load_corpus(cfg);
  return run_benchmark(cfg, corpus, log);
}

EvalReport run_benchmark(const BenchConfig& cfg, std::span<const Utterance> corpus, std::ostream* log) {
  const Evaluation ev = evaluate(cfg, corpus, cfg.attacks, true, log);
  EvalReport r;
  r.config_hash = cfg.hash();
  r.seed = cfg.seed;
  r.n_utterances = corpus.size();
  r.target_fprs = cfg.target_fprs;
  r.modes = cfg.modes;
  for (const AttackSpec& a : ev.attacks) r.attacks.push_back(attack_label(a));
  const bool only_none = std::all_of(ev.attacks.begin(), ev.attacks.end(),
                                     [](const AttackSpec& a) { return a.kind == AttackKind::kNone; });
  const double n = static_cast<double>(corpus.size());
  for (std::size_t m = 0; m < cfg.modes.size(); ++m) {
    const FusionWeights w = fusion_for(cfg, ev, m);
    ModeSummary s;
    s.mode = cfg.modes[m];
    s.fusion_weights.assign(w.values().begin(), w.values().end());
    s.macro_tpr.assign(cfg.target_fprs.size(), 0.0);
    for (const UttResult& u : ev.utts) {
      s.mean_snr_db += u.snr[m] / n;
      s.mean_stoi += u.stoi[m] / n;
      s.clipped += u.clipped[m];
    }
    if (!cfg.compute_stoi) s.mean_stoi = std::nan("");
    for (std::size_t a = 0; a < ev.attacks.size(); ++a) {
      CellResult c = make_cell(cfg, ev, m, a, w);
      if (!c.failed && (only_none || ev.attacks[a].kind != AttackKind::kNone)) {
        ++s.cells_ok;
        s.macro_auc += c.auc;
        for (std::size_t f = 0; f < c.tpr.size(); ++f) s.macro_tpr[f] += c.tpr[f];
      }
      r.cells.push_back(std::move(c));
    }
    if (s.cells_ok > 0) {
      s.macro_auc /= static_cast<double>(s.cells_ok);
      for (double& t : s.macro_tpr) t /= static_cast<double>(s.cells_ok);
    } else {
      s.macro_auc = std::nan("");
      for (double& t : s.macro_tpr) t = std::nan("");
    }
    r.summaries.push_back(std::move(s));
  }
  return r;
}

std::string report_to_json(const EvalReport& r) {
  Json j;
  j["schema_version"] = r.schema_version;
  j["config_hash"] = r.config_hash;
  j["seed"] = r.seed;
  j["n_utterances"] = r.n_utterances;
  j["target_fprs"] = nums(r.target_fprs);
  j["modes"] = Json::array();
  for (Mode m : r.modes) j["modes"].push_back(to_string(m));
  j["attacks"] = r.attacks;
  j["cells"] = Json::array();
  for (const CellResult& c : r.cells) {
    Json jc{{"mode", to_string(c.mode)}, {"attack", c.attack}, {"failed", c.failed}, {"reason", c.reason},
            {"n_pos", c.n_pos}, {"n_neg", c.n_neg}, {"auc", num(c.auc)}, {"tpr", nums(c.tpr)}};
    jc["detectors"] = Json::array();
    for (const DetectorMetrics& d : c.detectors) {
      jc["detectors"].push_back({{"detector", d.detector}, {"auc", num(d.auc)}, {"tpr", nums(d.tpr)}});
    }
    j["cells"].push_back(std::move(jc));
  }
  j["summaries"] = Json::array();
  for (const ModeSummary& s : r.summaries) {
    j["summaries"].push_back({{"mode", to_string(s.mode)},
                              {"mean_snr_db", num(s.mean_snr_db)},
                              {"mean_stoi", num(s.mean_stoi)},
                              {"clipped", s.clipped},
                              {"cells_ok", s.cells_ok},
                              {"macro_auc", num(s.macro_auc)},
                              {"macro_tpr", nums(s.macro_tpr)},
                              {"fusion_weights", nums(s.fusion_weights)}});
  }
  return j.dump(2) + "\n";
}

EvalReport report_from_json(std::string_view text) {
  try {
    const Json j = Json::parse(text);
    EvalReport r;
    r.schema_version = j.at("schema_version").get<int>();
    if (r.schema_version != 1) throw InvalidArgument("report: unsupported schema version");
    r.config_hash = j.at("config_hash").get<std::string>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.n_utterances = j.at("n_utterances").get<std::size_t>();
    r.target_fprs = unnums(j.at("target_fprs"));
    for (const Json& m : j.at("modes")) r.modes.push_back(mode_from_string(m.get<std::string>()));
    r.attacks = j.at("attacks").get<std::vector<std::string>>();
    for (const Json& jc : j.at("cells")) {
      CellResult c;
      c.mode = mode_from_string(jc.at("mode").get<std::string>());
      c.attack = jc.at("attack").get<std::string>();
      c.failed = jc.at("failed").get<bool>();
      c.reason = jc.at("reason").get<std::string>();
      c.n_pos = jc.at("n_pos").get<std::size_t>();
      c.n_neg = jc.at("n_neg").get<std::size_t>();
      c.auc = unnum(jc.at("auc"));
      c.tpr = unnums(jc.at("tpr"));
      for (const Json& jd : jc.at("detectors")) {
        c.detectors.push_back({jd.at("detector").get<std::string>(), unnum(jd.at("auc")), unnums(jd.at("tpr"))});
      }
      r.cells.push_back(std::move(c));
    }
    for (const Json& js : j.at("summaries")) {
      ModeSummary s;
      s.mode = mode_from_string(js.at("mode").get<std::string>());
      s.mean_snr_db = unnum(js.at("mean_snr_db"));
      s.mean_stoi = unnum(js.at("mean_stoi"));
      s.clipped = js.at("clipped").get<std::size_t>();
      s.cells_ok = js.at("cells_ok").get<std::size_t>();
      s.macro_auc = unnum(js.at("macro_auc"));
      s.macro_tpr = unnums(js.at("macro_tpr"));
      s.fusion_weights = unnums(js.at("fusion_weights"));
      r.summaries.push_back(std::move(s));
    }
    return r;
  } catch (const Json::exception& e) {
    throw InvalidArgument(std::string("report: ") + e.what());
  }
}

std::vector<std::filesystem::path> emit_report(const EvalReport& r, ReportFormat format,
                                               const std::filesystem::path& out_dir) {
  if (r.cells.empty() || r.modes.empty()) throw InvalidArgument("emit_report: empty report");
  std::filesystem::create_directories(out_dir);
  if (format == ReportFormat::kJson) {
    const auto p = out_dir / "report.json";
    write_file(p, report_to_json(r));
    return {p};
  }
  std::string t1 = "attack";
  for (Mode m : r.modes) {
    t1 += "," + to_string(m) + "_auc";
    for (double f : r.target_fprs) t1 += "," + to_string(m) + "_tpr@" + fpr_text(f);
  }
  t1 += "\n";
  for (const std::string& a : r.attacks) {
    t1 += a.find(',') == std::string::npos ? a : "\"" + a + "\"";
    for (Mode m : r.modes) {
      const CellResult& c = r.cell(m, a);
      t1 += "," + (c.failed ? std::string("failed") : cell_text(c.auc));
      for (double v : c.tpr) t1 += "," + (c.failed ? std::string("failed") : cell_text(v));
    }
    t1 += "\n";
  }
  std::string t2 = "mode,snr_db,pesq,stoi,clipped,cells_ok,macro_auc";
  for (double f : r.target_fprs) t2 += ",macro_tpr@" + fpr_text(f);
  t2 += "\n";
  for (const ModeSummary& s : r.summaries) {
    t2 += to_string(s.mode) + "," + cell_text(s.mean_snr_db) + ",," + cell_text(s.mean_stoi) + "," +
          std::to_string(s.clipped) + "," + std::to_string(s.cells_ok) + "," + cell_text(s.macro_auc);
    for (double v : s.macro_tpr) t2 += "," + cell_text(v);
    t2 += "\n";
  }
  const auto p1 = out_dir / "table1.csv", p2 = out_dir / "table2.csv";
  write_file(p1, t1);
  write_file(p2, t2);
  return {p1, p2};
}

const SweepSeries& SweepResult::find(Mode mode, const std::string& detector) const {
  for (const SweepSeries& s : series) {
    if (s.mode == mode && s.detector == detector) return s;
  }
  throw InvalidArgument("sweep has no series " + to_string(mode) + " / " + detector);
}

SweepResult strength_sweep(const BenchConfig& cfg, const AttackSpec& base, std::span<const double> strengths,
                           std::span<const Utterance> corpus, std::ostream* log) {
  const std::vector<AttackParam> params = attack_params(base.kind);
  if (params.empty()) throw InvalidArgument("sweep: attack " + to_string(base.kind) + " has no strength parameter");
  SweepResult out;
  out.kind = base.kind;
  out.param = params[0].name;
  out.target_fprs = cfg.target_fprs;
  out.labels.push_back("none");
  std::vector<AttackSpec> attacks{AttackSpec{AttackKind::kNone, {}}};
  for (double s : strengths) {
    AttackSpec a = base;
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", s);
    a.params[out.param] = buf;
    a.validate();
    attacks.push_back(a);
    std::snprintf(buf, sizeof buf, "%g", s);
    out.labels.push_back(buf);
  }
  const Evaluation ev = evaluate(cfg, corpus, attacks, false, log);
  for (std::size_t m = 0; m < cfg.modes.size(); ++m) {
    const FusionWeights w = fusion_for(cfg, ev, m);
    std::vector<SweepSeries> series;
    for (std::size_t a = 0; a < attacks.size(); ++a) {
      const CellResult c = make_cell(cfg, ev, m, a, w);
      if (series.empty()) {
        for (const DetectorMetrics& d : c.detectors) series.push_back({cfg.modes[m], d.detector, {}, {}});
      }
      for (std::size_t d = 0; d < c.detectors.size(); ++d) {
        series[d].tpr.push_back(c.detectors[d].tpr);
        series[d].auc.push_back(c.detectors[d].auc);
      }
    }
    for (SweepSeries& s : series) out.series.push_back(std::move(s));
  }
  return out;
}

std::filesystem::path emit_sweep(const SweepResult& sw, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  std::string text = "mode,detector," + sw.param + ",auc";
  for (double f : sw.target_fprs) text += ",tpr@" + fpr_text(f);
  text += "\n";
  for (const SweepSeries& s : sw.series) {
    for (std::size_t p = 0; p < sw.labels.size(); ++p) {
      text += to_string(s.mode) + "," + s.detector + "," + sw.labels[p] + "," + cell_text(s.auc[p]);
      for (double v : s.tpr[p]) text += "," + cell_text(v);
      text += "\n";
    }
  }
  const auto path = out_dir / ("sweep_" + to_string(sw.kind) + ".csv");
  write_file(path, text);
  return path;
}

CaseStudy case_study(const AudioBuffer& x, const AudioBuffer& watermarked, const AudioBuffer& attacked) {
  if (watermarked.size() != x.size() || attacked.size() != x.size()) {
    throw InvalidArgument("case_study: signals must have equal length");
  }
  const Spectrogram sx = stft(x), sw = stft(watermarked), sa = stft(attacked);
  CaseStudy cs;
  cs.dims = TfDims::of(sx);
  auto db = [](double mag) { return std::max(kCaseFloorDb, 20.0 * std::log10(std::max(mag, 1e-300))); };
  const std::size_t cells = sx.grid().size();
  for (auto* v : {&cs.original, &cs.watermarked, &cs.difference, &cs.attacked, &cs.attacked_difference}) {
    v->resize(cells);
  }
  for (std::size_t i = 0; i < cells; ++i) {
    cs.original[i] = db(std::abs(sx.grid()[i]));
    cs.watermarked[i] = db(std::abs(sw.grid()[i]));
    cs.difference[i] = db(std::abs(sw.grid()[i] - sx.grid()[i]));
    cs.attacked[i] = db(std::abs(sa.grid()[i]));
    cs.attacked_difference[i] = db(std::abs(sa.grid()[i] - sx.grid()[i]));
  }
  return cs;
}

std::vector<std::filesystem::path> dump_case_study(const AudioBuffer& x, const AudioBuffer& watermarked,
                                                   const AudioBuffer& attacked,
                                                   const std::filesystem::path& out_dir) {
  const CaseStudy cs = case_study(x, watermarked, attacked);
  std::filesystem::create_directories(out_dir);
  const std::pair<const char*, const std::vector<double>*> panels[] = {
      {"original", &cs.original},   {"watermarked", &cs.watermarked},
      {"difference", &cs.difference}, {"attacked", &cs.attacked},
      {"attacked_difference", &cs.attacked_difference}};
  std::vector<std::filesystem::path> paths;
  const std::size_t bins = cs.dims.n_bins();
  for (const auto& [name, grid] : panels) {
    std::string text;
    char buf[32];
    for (std::size_t t = 0; t < cs.dims.n_frames; ++t) {
      for (std::size_t k = 0; k < bins; ++k) {
        std::snprintf(buf, sizeof buf, k ? " %.3f" : "%.3f", (*grid)[t * bins + k]);
        text += buf;
      }
      text += "\n";
    }
    paths.push_back(out_dir / (std::string(name) + "_db.txt"));
    write_file(paths.back(), text);
  }
  return paths;
}

}  // namespace wavemux
