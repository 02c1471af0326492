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


// wavemux: command-line front end. Every subcommand prints exactly one JSON
// line on stdout; diagnostics go to stderr. Exit 0 on success, 2 on bad
// arguments, 1 when processing fails.

#include <cmath>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "wavemux/attacks.hpp"
#include "wavemux/audio.hpp"
#include "wavemux/backends.hpp"
#include "wavemux/bench.hpp"
#include "wavemux/corpus.hpp"
#include "wavemux/errors.hpp"
#include "wavemux/metrics.hpp"
#include "wavemux/patfm.hpp"

namespace wm = wavemux;
using Json = nlohmann::json;

namespace {

constexpr double kDetectFpr = 0.01;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

Json num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s + ",") {
    if (c == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else if (c != ' ') {
      cur += c;
    }
  }
  return out;
}

std::uint64_t parse_key(const std::string& s) {
  std::size_t used = 0;
  std::uint64_t v = 0;
  try {
    v = std::stoull(s, &used, 0);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size() || s[0] == '-') throw UsageError("bad key '" + s + "'");
  return v;
}

std::vector<wm::BackendId> parse_backends(const std::string& s) {
  std::vector<wm::BackendId> out;
  for (const std::string& name : split_list(s)) {
    try {
      out.push_back(wm::backend_from_string(name));
    } catch (const wm::InvalidArgument& e) {
      throw UsageError(e.what());
    }
  }
  if (out.empty()) throw UsageError("--backends is empty");
  return out;
}

std::vector<std::uint64_t> parse_keys(const std::string& s, std::size_t n) {
  std::vector<std::uint64_t> out;
  for (const std::string& k : split_list(s)) out.push_back(parse_key(k));
  if (out.size() != n) throw UsageError("need one key per backend");
  return out;
}

std::vector<double> parse_numbers(const std::string& s, const char* what) {
  std::vector<double> out;
  for (const std::string& item : split_list(s)) {
    std::size_t used = 0;
    try {
      out.push_back(std::stod(item, &used));
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size()) throw UsageError(std::string("bad number in ") + what + ": '" + item + "'");
  }
  return out;
}

wm::BenchConfig config_from(const std::string& path) {
  std::string p = path;
  if (p.empty()) {
    if (const char* env = std::getenv("WAVEMUX_CONFIG")) p = env;
  }
  return p.empty() ? wm::default_bench_config() : wm::load_bench_config(p);
}

// One payload per backend: explicit bits or derived from the key.
wm::Payload payload_for(const std::string& bits, std::uint64_t key, std::size_t n_bits) {
  return bits.empty() ? wm::Payload::random(key, n_bits) : wm::Payload::from_string(bits);
}

void emit(const Json& j) { std::cout << j.dump() << std::endl; }

struct EmbedArgs {
  std::string in, out, mode = "patfm", backends = "phase,ss", keys, alpha = "1", payload, config;
  std::size_t bits = 16;
  bool float32 = false;
};

void cmd_embed(const EmbedArgs& a) {
  const wm::Mode mode = [&] {
    try {
      return wm::mode_from_string(a.mode);
    } catch (const wm::InvalidArgument& e) {
      throw UsageError(e.what());
    }
  }();
  const std::vector<wm::BackendId> ids = parse_backends(a.backends);
  const std::vector<std::uint64_t> keys = parse_keys(a.keys, ids.size());
  std::vector<double> alphas = parse_numbers(a.alpha, "--alpha");
  if (alphas.size() == 1) alphas.assign(ids.size(), alphas[0]);
  if (alphas.size() != ids.size()) throw UsageError("need one alpha or one per backend");
  const wm::BenchConfig cfg = config_from(a.config);
  const wm::AudioBuffer x = wm::load_wav(a.in);
  std::vector<wm::WatermarkSpec> specs;
  Json payloads = Json::array();
  for (std::size_t i = 0; i < ids.size(); ++i) {
    specs.push_back({ids[i], payload_for(a.payload, keys[i], a.bits), {keys[i], ids[i]}, 0.0});
    payloads.push_back(specs.back().payload.to_string());
  }
  const wm::MuxResult r = wm::embed_mode(mode, x, specs, alphas, cfg);
  const wm::WavEncoding enc = a.float32 ? wm::WavEncoding::kFloat32 : wm::WavEncoding::kPcm16;
  const wm::AudioBuffer written = a.float32 ? r.audio : wm::quantize_pcm16(r.audio);
  wm::save_wav(written, a.out, enc);
  emit({{"command", "embed"}, {"out", a.out}, {"mode", wm::to_string(mode)},
        {"snr_db", num(wm::snr_db(x, written))}, {"clipped", r.clipped}, {"payloads", payloads}});
}

struct DetectArgs {
  std::string in, backends = "phase,ss", keys, weights, config;
  std::size_t bits = 16;
};

void cmd_detect(const DetectArgs& a) {
  const std::vector<wm::BackendId> ids = parse_backends(a.backends);
  const std::vector<std::uint64_t> keys = parse_keys(a.keys, ids.size());
  std::optional<wm::FusionWeights> w;
  try {
    w = a.weights.empty() ? wm::FusionWeights::uniform(ids.size())
                          : wm::FusionWeights(parse_numbers(a.weights, "--fusion-weights"));
  } catch (const wm::InvalidArgument& e) {
    throw UsageError(e.what());
  }
  if (w->size() != ids.size()) throw UsageError("need one fusion weight per backend");
  const wm::BenchConfig cfg = config_from(a.config);
  const wm::AudioBuffer y = wm::load_wav(a.in);
  std::vector<wm::DetectionScore> scores;
  Json dets = Json::array();
  for (std::size_t i = 0; i < ids.size(); ++i) {
    scores.push_back(wm::detect(y, {keys[i], ids[i]}, a.bits, cfg.backends));
    std::string bits;
    for (auto b : scores.back().bits) bits += b ? '1' : '0';
    dets.push_back({{"backend", std::string(wm::to_string(ids[i]))}, {"z", num(scores.back().z)},
                    {"logit", num(scores.back().logit)}, {"bits", bits}});
  }
  const wm::DetectionScore fused = wm::fuse_scores(scores, *w);
  // Under the null every logit is standard normal, so the fused score has
  // standard deviation ||w||_2.
  const double threshold = 2.3263478740408408 * w->norm();
  emit({{"command", "detect"}, {"detectors", dets}, {"fused_logit", num(fused.logit)},
        {"threshold", threshold}, {"fpr", kDetectFpr}, {"detected", fused.logit > threshold}});
}

wm::AttackSpec attack_from(const std::string& kind, const std::string& params, const std::string& command) {
  try {
    wm::AttackSpec spec = wm::AttackSpec::parse(params.empty() ? kind : kind + ":" + params);
    if (!command.empty()) spec.params["command"] = command;
    spec.validate();
    return spec;
  } catch (const wm::InvalidArgument& e) {
    throw UsageError(e.what());
  }
}

struct AttackArgs {
  std::string in, out, kind, params, command;
  std::uint64_t seed = 0;
  int timeout_s = 120;
};

void cmd_attack(const AttackArgs& a) {
  const wm::AttackSpec spec = attack_from(a.kind, a.params, a.command);
  const wm::AudioBuffer x = wm::load_wav(a.in);
  const wm::AudioBuffer y = wm::attack_apply(x, spec, a.seed, {{}, std::chrono::seconds(a.timeout_s)});
  wm::save_wav(y, a.out);
  Json j{{"command", "attack"}, {"out", a.out}, {"attack", spec.to_text()}, {"seed", a.seed}};
  if (y.size() == x.size()) j["snr_db"] = num(wm::snr_db(x, wm::quantize_pcm16(y)));
  emit(j);
}

struct BenchArgs {
  std::string config, out_dir, format = "both";
  std::size_t jobs = 0;
};

void cmd_bench(const BenchArgs& a) {
  wm::BenchConfig cfg = config_from(a.config);
  if (a.jobs > 0) cfg.jobs = a.jobs;
  if (!a.out_dir.empty()) cfg.output_dir = a.out_dir;
  try {
    cfg.validate();
  } catch (const wm::InvalidArgument& e) {
    throw UsageError(e.what());
  }
  const wm::EvalReport r = wm::run_benchmark(cfg, &std::cerr);
  Json files = Json::array();
  if (a.format == "csv" || a.format == "both") {
    for (const auto& p : wm::emit_report(r, wm::ReportFormat::kCsv, cfg.output_dir)) files.push_back(p.string());
  }
  if (a.format == "json" || a.format == "both") {
    for (const auto& p : wm::emit_report(r, wm::ReportFormat::kJson, cfg.output_dir)) files.push_back(p.string());
  }
  Json macro = Json::object();
  for (const wm::ModeSummary& s : r.summaries) macro[wm::to_string(s.mode)] = num(s.macro_auc);
  emit({{"command", "bench"}, {"config_hash", r.config_hash}, {"files", files}, {"macro_auc", macro}});
}

struct SweepArgs {
  std::string config, attack, strengths, out_dir;
  std::size_t jobs = 0;
};

void cmd_sweep(const SweepArgs& a) {
  wm::BenchConfig cfg = config_from(a.config);
  if (a.jobs > 0) cfg.jobs = a.jobs;
  if (!a.out_dir.empty()) cfg.output_dir = a.out_dir;
  wm::AttackSpec base = cfg.sweep_attack;
  if (!a.attack.empty()) {
    try {
      base = wm::AttackSpec::parse(a.attack);
    } catch (const wm::InvalidArgument& e) {
      throw UsageError(e.what());
    }
  }
  const std::vector<double> strengths = a.strengths.empty() ? cfg.sweep_strengths
                                                            : parse_numbers(a.strengths, "--strengths");
  if (strengths.empty()) throw UsageError("no sweep strengths");
  if (base.kind == wm::AttackKind::kExternalCodec || wm::attack_params(base.kind).empty()) {
    throw UsageError("attack " + wm::to_string(base.kind) + " has no strength axis");
  }
  try {
    cfg.validate();
  } catch (const wm::InvalidArgument& e) {
    throw UsageError(e.what());
  }
  const std::vector<wm::Utterance> corpus = wm::load_corpus(cfg);
  const wm::SweepResult sw = wm::strength_sweep(cfg, base, strengths, corpus, &std::cerr);
  const auto path = wm::emit_sweep(sw, cfg.output_dir);
  emit({{"command", "sweep"}, {"attack", wm::to_string(sw.kind)}, {"param", sw.param}, {"file", path.string()}});
}

struct CaseArgs {
  std::string in, watermarked, attacked, attack = "none", out_dir = "case_study";
  std::uint64_t seed = 0;
};

void cmd_case(const CaseArgs& a) {
  const wm::AttackSpec spec = attack_from(a.attack, "", "");
  const wm::AudioBuffer x = wm::load_wav(a.in);
  const wm::AudioBuffer w = wm::load_wav(a.watermarked);
  const wm::AudioBuffer y = a.attacked.empty() ? wm::attack_apply(w, spec, a.seed) : wm::load_wav(a.attacked);
  Json files = Json::array();
  for (const auto& p : wm::dump_case_study(x, w, y, a.out_dir)) files.push_back(p.string());
  emit({{"command", "case"}, {"files", files}});
}

struct SynthArgs {
  std::string out_dir;
  std::size_t n = 50;
  std::uint64_t seed = 1;
  double seconds = 3.0;
  double level_dbfs = wm::kDefaultLevelDbfs;
};

void cmd_synth(const SynthArgs& a) {
  if (a.n == 0) throw UsageError("--n must be positive");
  std::filesystem::create_directories(a.out_dir);
  for (const wm::Utterance& u : wm::synth_corpus(a.n, a.seed, a.seconds)) {
    wm::save_wav(wm::normalize_level(u.audio, a.level_dbfs), std::filesystem::path(a.out_dir) / (u.id + ".wav"));
  }
  emit({{"command", "synth"}, {"dir", a.out_dir}, {"files", a.n}});
}

int fail(int code, const std::string& msg) {
  std::cerr << "wavemux: " << msg << "\n";
  emit({{"error", msg}, {"exit_code", code}});
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-watermark embedding, detection and robustness benchmarking for 16 kHz speech"};
  app.require_subcommand(1);

  EmbedArgs ea;
  auto* embed = app.add_subcommand("embed", "Watermark a WAV file");
  embed->add_option("--in", ea.in, "Input WAV")->required();
  embed->add_option("--out", ea.out, "Output WAV")->required();
  embed->add_option("--mode", ea.mode, "single_ss|single_qim|single_phase|parallel|seq_AB|seq_BA|fdm|tdm|patfm")
      ->capture_default_str();
  embed->add_option("--backends", ea.backends, "Comma-separated backends (ss, qim, phase)")->capture_default_str();
  embed->add_option("--keys", ea.keys, "Comma-separated integer keys, one per backend")->required();
  embed->add_option("--alpha", ea.alpha, "One gain, or one per backend")->capture_default_str();
  embed->add_option("--payload", ea.payload, "Payload bits such as 0110...; default derived from each key");
  embed->add_option("--bits", ea.bits, "Payload length when derived from the key")->capture_default_str();
  embed->add_option("--config", ea.config, "Config file (default $WAVEMUX_CONFIG)");
  embed->add_flag("--float32", ea.float32, "Write 32-bit float instead of PCM16");

  DetectArgs da;
  auto* det = app.add_subcommand("detect", "Score a WAV file with one or more keyed detectors");
  det->add_option("--in", da.in, "Input WAV")->required();
  det->add_option("--backends", da.backends, "Comma-separated backends")->capture_default_str();
  det->add_option("--keys", da.keys, "Comma-separated keys, one per backend")->required();
  det->add_option("--fusion-weights", da.weights, "Comma-separated non-negative weights (default uniform)");
  det->add_option("--bits", da.bits, "Payload length")->capture_default_str();
  det->add_option("--config", da.config, "Config file (default $WAVEMUX_CONFIG)");

  AttackArgs aa;
  auto* att = app.add_subcommand("attack", "Apply one attack to a WAV file");
  att->add_option("--in", aa.in, "Input WAV")->required();
  att->add_option("--out", aa.out, "Output WAV")->required();
  att->add_option("--kind", aa.kind, "Attack kind, e.g. gaussian_noise")->required();
  att->add_option("--params", aa.params, "k=v,k=v");
  att->add_option("--command", aa.command, "Shell template with {in} and {out} for external_codec");
  att->add_option("--seed", aa.seed, "Attack seed")->capture_default_str();
  att->add_option("--timeout", aa.timeout_s, "External codec timeout in seconds")->capture_default_str();

  BenchArgs ba;
  auto* bench = app.add_subcommand("bench", "Run the mode x attack benchmark and write reports");
  bench->add_option("--config", ba.config, "Config file (default $WAVEMUX_CONFIG, else built-in defaults)");
  bench->add_option("--jobs", ba.jobs, "Worker threads (overrides run.jobs)");
  bench->add_option("--out-dir", ba.out_dir, "Output directory (overrides run.output_dir)");
  bench->add_option("--format", ba.format, "csv|json|both")
      ->check(CLI::IsMember({"csv", "json", "both"}))
      ->capture_default_str();

  SweepArgs sa;
  auto* sweep = app.add_subcommand("sweep", "TPR curves over one attack's strength axis");
  sweep->add_option("--config", sa.config, "Config file (default $WAVEMUX_CONFIG)");
  sweep->add_option("--attack", sa.attack, "Attack kind with optional fixed params (default sweep.attack)");
  sweep->add_option("--strengths", sa.strengths, "Comma-separated strengths (default sweep.strengths)");
  sweep->add_option("--jobs", sa.jobs, "Worker threads");
  sweep->add_option("--out-dir", sa.out_dir, "Output directory");

  CaseArgs ca;
  auto* cs = app.add_subcommand("case", "Dump dB spectrogram grids for a case study");
  cs->add_option("--in", ca.in, "Clean WAV")->required();
  cs->add_option("--watermarked", ca.watermarked, "Watermarked WAV")->required();
  cs->add_option("--attacked", ca.attacked, "Attacked WAV; default applies --attack to the watermarked file");
  cs->add_option("--attack", ca.attack, "Attack spec kind:k=v,...")->capture_default_str();
  cs->add_option("--seed", ca.seed, "Attack seed")->capture_default_str();
  cs->add_option("--out-dir", ca.out_dir, "Output directory")->capture_default_str();

  SynthArgs ya;
  auto* syn = app.add_subcommand("synth", "Write a synthetic speech-like corpus");
  syn->add_option("--out-dir", ya.out_dir, "Output directory")->required();
  syn->add_option("--n", ya.n, "Number of utterances")->capture_default_str();
  syn->add_option("--seed", ya.seed, "Corpus seed")->capture_default_str();
  syn->add_option("--seconds", ya.seconds, "Utterance length")->capture_default_str();
  syn->add_option("--level-dbfs", ya.level_dbfs, "RMS level")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "wavemux: " << e.what() << "\n";
    const CLI::App* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
    std::cerr << sub->help();
    emit({{"error", e.what()}, {"exit_code", 2}});
    return 2;
  }

  try {
    if (*embed) cmd_embed(ea);
    else if (*det) cmd_detect(da);
    else if (*att) cmd_attack(aa);
    else if (*bench) cmd_bench(ba);
    else if (*sweep) cmd_sweep(sa);
    else if (*cs) cmd_case(ca);
    else if (*syn) cmd_synth(ya);
  } catch (const UsageError& e) {
    return fail(2, e.what());
  } catch (const wm::InvalidArgument& e) {
    return fail(2, e.what());
  } catch (const wm::ExternalError& e) {
    std::cerr << e.diagnostics() << "\n";
    return fail(1, e.what());
  } catch (const std::exception& e) {
    return fail(1, e.what());
  }
  return 0;
}
