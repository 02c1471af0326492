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
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "wavemux/bench.hpp"
#include "wavemux/errors.hpp"

namespace wavemux {

namespace {

constexpr std::pair<Mode, const char*> kModeNames[] = {
    {Mode::kSingleSs, "single_ss"}, {Mode::kSingleQim, "single_qim"}, {Mode::kSinglePhase, "single_phase"},
    {Mode::kParallel, "parallel"},  {Mode::kSeqAB, "seq_AB"},         {Mode::kSeqBA, "seq_BA"},
    {Mode::kFdm, "fdm"},            {Mode::kTdm, "tdm"},              {Mode::kPatfm, "patfm"},
};

std::string trim(std::string_view s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  if (trim(s).empty()) return out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != v.size()) throw InvalidArgument(key + ": not a number: '" + v + "'");
  return out;
}

std::uint64_t parse_uint(const std::string& key, const std::string& v) {
  if (v.empty() || !std::all_of(v.begin(), v.end(), [](unsigned char c) { return std::isdigit(c); })) {
    throw InvalidArgument(key + ": not a non-negative integer: '" + v + "'");
  }
  try {
    return std::stoull(v);
  } catch (const std::exception&) {
    throw InvalidArgument(key + ": integer out of range: '" + v + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw InvalidArgument(key + ": not a boolean: '" + v + "'");
}

std::string join_doubles(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + fmt(v[i]);
  return out;
}

std::vector<double> parse_doubles(const std::string& key, const std::string& v) {
  std::vector<double> out;
  for (const std::string& item : split(v, ',')) out.push_back(parse_double(key, item));
  return out;
}

std::string bands_text(const BandPlan& p) {
  std::string out;
  for (std::size_t i = 0; i < p.bands.size(); ++i) {
    out += (i ? ", " : "") + fmt(p.bands[i].lo_hz) + "-" + fmt(p.bands[i].hi_hz);
  }
  return out;
}

BandPlan parse_bands(const std::string& key, const std::string& v) {
  BandPlan p;
  for (const std::string& item : split(v, ',')) {
    const std::size_t dash = item.find('-', 1);
    if (dash == std::string::npos) throw InvalidArgument(key + ": band '" + item + "' is not lo-hi");
    p.bands.push_back({parse_double(key, trim(item.substr(0, dash))), parse_double(key, trim(item.substr(dash + 1)))});
  }
  return p;
}

std::string source_text(MaskSource s) {
  switch (s) {
    case MaskSource::kCombined: return "combined";
    case MaskSource::kFlatness: return "flatness";
    case MaskSource::kLocalSnr: return "local_snr";
  }
  return "combined";
}

std::string fusion_text(FusionMode m) {
  switch (m) {
    case FusionMode::kUniform: return "uniform";
    case FusionMode::kCalibrated: return "calibrated";
    case FusionMode::kFixed: return "fixed";
  }
  return "uniform";
}

// Binds one config key to a field: a printer for canonical() and a parser.
struct Field {
  std::string key;
  std::function<std::string(const BenchConfig&)> get;
  std::function<void(BenchConfig&, const std::string&)> set;
};

std::vector<Field> fields() {
  std::vector<Field> f;
  auto dbl = [&](std::string key, std::function<double&(BenchConfig&)> ref) {
    f.push_back({key, [ref](const BenchConfig& c) { return fmt(ref(const_cast<BenchConfig&>(c))); },
                 [ref, key](BenchConfig& c, const std::string& v) { ref(c) = parse_double(key, v); }});
  };
  auto uint = [&](std::string key, std::function<std::size_t&(BenchConfig&)> ref) {
    f.push_back({key, [ref](const BenchConfig& c) { return std::to_string(ref(const_cast<BenchConfig&>(c))); },
                 [ref, key](BenchConfig& c, const std::string& v) { ref(c) = parse_uint(key, v); }});
  };
  auto flag = [&](std::string key, std::function<bool&(BenchConfig&)> ref) {
    f.push_back({key, [ref](const BenchConfig& c) { return ref(const_cast<BenchConfig&>(c)) ? "true" : "false"; },
                 [ref, key](BenchConfig& c, const std::string& v) { ref(c) = parse_bool(key, v); }});
  };
  auto backend = [&](std::string key, std::function<BackendId&(BenchConfig&)> ref) {
    f.push_back({key, [ref](const BenchConfig& c) { return std::string(to_string(ref(const_cast<BenchConfig&>(c)))); },
                 [ref](BenchConfig& c, const std::string& v) { ref(c) = backend_from_string(v); }});
  };

  f.push_back({"dataset.dir", [](const BenchConfig& c) { return c.dataset_dir.string(); },
               [](BenchConfig& c, const std::string& v) { c.dataset_dir = v; }});
  uint("dataset.cap", [](BenchConfig& c) -> std::size_t& { return c.utterance_cap; });
  dbl("dataset.synth_seconds", [](BenchConfig& c) -> double& { return c.synth_seconds; });
  flag("dataset.normalize", [](BenchConfig& c) -> bool& { return c.normalize; });
  dbl("dataset.level_dbfs", [](BenchConfig& c) -> double& { return c.level_dbfs; });

  f.push_back({"run.modes",
               [](const BenchConfig& c) {
                 std::string out;
                 for (std::size_t i = 0; i < c.modes.size(); ++i) out += (i ? ", " : "") + to_string(c.modes[i]);
                 return out;
               },
               [](BenchConfig& c, const std::string& v) {
                 c.modes.clear();
                 for (const std::string& m : split(v, ',')) c.modes.push_back(mode_from_string(m));
               }});
  f.push_back({"run.attacks",
               [](const BenchConfig& c) {
                 std::string out;
                 for (std::size_t i = 0; i < c.attacks.size(); ++i) out += (i ? "; " : "") + c.attacks[i].to_text();
                 return out;
               },
               [](BenchConfig& c, const std::string& v) {
                 c.attacks.clear();
                 for (const std::string& a : split(v, ';')) c.attacks.push_back(AttackSpec::parse(a));
               }});
  f.push_back({"run.seed", [](const BenchConfig& c) { return std::to_string(c.seed); },
               [](BenchConfig& c, const std::string& v) { c.seed = parse_uint("run.seed", v); }});
  f.push_back({"run.target_fprs", [](const BenchConfig& c) { return join_doubles(c.target_fprs); },
               [](BenchConfig& c, const std::string& v) { c.target_fprs = parse_doubles("run.target_fprs", v); }});
  f.push_back({"run.output_dir", [](const BenchConfig& c) { return c.output_dir.string(); },
               [](BenchConfig& c, const std::string& v) { c.output_dir = v; }});
  uint("run.jobs", [](BenchConfig& c) -> std::size_t& { return c.jobs; });
  flag("run.quantize", [](BenchConfig& c) -> bool& { return c.quantize; });
  flag("run.stoi", [](BenchConfig& c) -> bool& { return c.compute_stoi; });

  backend("watermark.a", [](BenchConfig& c) -> BackendId& { return c.wm_a; });
  backend("watermark.b", [](BenchConfig& c) -> BackendId& { return c.wm_b; });
  dbl("watermark.alpha_a", [](BenchConfig& c) -> double& { return c.alpha_a; });
  dbl("watermark.alpha_b", [](BenchConfig& c) -> double& { return c.alpha_b; });
  uint("watermark.payload_bits", [](BenchConfig& c) -> std::size_t& { return c.payload_bits; });

  uint("stft.frame_len", [](BenchConfig& c) -> std::size_t& { return c.backends.ss.stft.frame_len; });
  uint("stft.hop", [](BenchConfig& c) -> std::size_t& { return c.backends.ss.stft.hop; });

  dbl("ss.alpha", [](BenchConfig& c) -> double& { return c.backends.ss.alpha; });
  dbl("ss.band_lo_hz", [](BenchConfig& c) -> double& { return c.backends.ss.band_lo_hz; });
  dbl("ss.band_hi_hz", [](BenchConfig& c) -> double& { return c.backends.ss.band_hi_hz; });
  uint("ss.block_len", [](BenchConfig& c) -> std::size_t& { return c.backends.ss.block_len; });
  uint("ss.max_lag", [](BenchConfig& c) -> std::size_t& { return c.backends.ss.max_lag; });
  uint("ss.whiten_smooth_bins", [](BenchConfig& c) -> std::size_t& { return c.backends.ss.whiten_smooth_bins; });
  dbl("ss.whiten_floor_db", [](BenchConfig& c) -> double& { return c.backends.ss.whiten_floor_db; });

  dbl("qim.step", [](BenchConfig& c) -> double& { return c.backends.qim.step; });
  dbl("qim.band_lo_hz", [](BenchConfig& c) -> double& { return c.backends.qim.band_lo_hz; });
  dbl("qim.band_hi_hz", [](BenchConfig& c) -> double& { return c.backends.qim.band_hi_hz; });
  uint("qim.n_bins", [](BenchConfig& c) -> std::size_t& { return c.backends.qim.n_bins; });
  uint("qim.bin_spacing", [](BenchConfig& c) -> std::size_t& { return c.backends.qim.bin_spacing; });
  uint("qim.frame_stride", [](BenchConfig& c) -> std::size_t& { return c.backends.qim.frame_stride; });
  uint("qim.iterations", [](BenchConfig& c) -> std::size_t& { return c.backends.qim.iterations; });

  dbl("phase.theta", [](BenchConfig& c) -> double& { return c.backends.phase.theta; });
  dbl("phase.band_lo_hz", [](BenchConfig& c) -> double& { return c.backends.phase.band_lo_hz; });
  dbl("phase.band_hi_hz", [](BenchConfig& c) -> double& { return c.backends.phase.band_hi_hz; });
  uint("phase.n_bins", [](BenchConfig& c) -> std::size_t& { return c.backends.phase.n_bins; });
  uint("phase.bin_spacing", [](BenchConfig& c) -> std::size_t& { return c.backends.phase.bin_spacing; });
  uint("phase.frame_stride", [](BenchConfig& c) -> std::size_t& { return c.backends.phase.frame_stride; });
  uint("phase.iterations", [](BenchConfig& c) -> std::size_t& { return c.backends.phase.iterations; });

  f.push_back({"fdm.bands", [](const BenchConfig& c) { return bands_text(c.fdm_bands); },
               [](BenchConfig& c, const std::string& v) { c.fdm_bands = parse_bands("fdm.bands", v); }});
  dbl("tdm.slot_ms", [](BenchConfig& c) -> double& { return c.tdm_slot_ms; });

  f.push_back({"patfm.bands", [](const BenchConfig& c) { return bands_text(c.patfm.bands); },
               [](BenchConfig& c, const std::string& v) { c.patfm.bands = parse_bands("patfm.bands", v); }});
  dbl("patfm.slot_ms", [](BenchConfig& c) -> double& { return c.patfm.slot_len_ms; });
  f.push_back({"patfm.source", [](const BenchConfig& c) { return source_text(c.patfm.source); },
               [](BenchConfig& c, const std::string& v) {
                 if (v == "combined") c.patfm.source = MaskSource::kCombined;
                 else if (v == "flatness") c.patfm.source = MaskSource::kFlatness;
                 else if (v == "local_snr") c.patfm.source = MaskSource::kLocalSnr;
                 else throw InvalidArgument("patfm.source: expected combined, flatness or local_snr");
               }});
  dbl("patfm.gain_floor", [](BenchConfig& c) -> double& { return c.patfm.gain.floor; });
  dbl("patfm.gain_slope", [](BenchConfig& c) -> double& { return c.patfm.gain.slope; });
  flag("patfm.affinity", [](BenchConfig& c) -> bool& { return c.patfm.backend_affinity; });

  f.push_back({"fusion.mode", [](const BenchConfig& c) { return fusion_text(c.fusion); },
               [](BenchConfig& c, const std::string& v) {
                 if (v == "uniform") c.fusion = FusionMode::kUniform;
                 else if (v == "calibrated") c.fusion = FusionMode::kCalibrated;
                 else if (v == "fixed") c.fusion = FusionMode::kFixed;
                 else throw InvalidArgument("fusion.mode: expected uniform, calibrated or fixed");
               }});
  f.push_back({"fusion.weights", [](const BenchConfig& c) { return join_doubles(c.fusion_weights); },
               [](BenchConfig& c, const std::string& v) { c.fusion_weights = parse_doubles("fusion.weights", v); }});

  uint("codec.max_procs", [](BenchConfig& c) -> std::size_t& { return c.max_procs; });
  f.push_back({"codec.timeout_s", [](const BenchConfig& c) { return std::to_string(c.codec_timeout.count()); },
               [](BenchConfig& c, const std::string& v) {
                 c.codec_timeout = std::chrono::seconds(parse_uint("codec.timeout_s", v));
               }});

  f.push_back({"sweep.attack", [](const BenchConfig& c) { return c.sweep_attack.to_text(); },
               [](BenchConfig& c, const std::string& v) { c.sweep_attack = AttackSpec::parse(v); }});
  f.push_back({"sweep.strengths", [](const BenchConfig& c) { return join_doubles(c.sweep_strengths); },
               [](BenchConfig& c, const std::string& v) { c.sweep_strengths = parse_doubles("sweep.strengths", v); }});
  return f;
}

// One STFT geometry is shared by all backends.
void sync_stft(BenchConfig& c) {
  c.backends.qim.stft = c.backends.ss.stft;
  c.backends.phase.stft = c.backends.ss.stft;
}

}  // namespace

std::string to_string(Mode mode) {
  for (const auto& [m, n] : kModeNames) {
    if (m == mode) return n;
  }
  return "unknown";
}

Mode mode_from_string(std::string_view name) {
  for (const auto& [m, n] : kModeNames) {
    if (name == n) return m;
  }
  throw InvalidArgument("unknown mode '" + std::string(name) + "'");
}

std::vector<Mode> all_modes() {
  std::vector<Mode> out;
  for (const auto& [m, n] : kModeNames) out.push_back(m);
  return out;
}

bool is_multiplexed(Mode mode) {
  return mode != Mode::kSingleSs && mode != Mode::kSingleQim && mode != Mode::kSinglePhase;
}

void BenchConfig::validate() const {
  if (modes.empty()) throw InvalidArgument("config: no modes");
  if (attacks.empty()) throw InvalidArgument("config: no attacks");
  if (utterance_cap < 2) throw InvalidArgument("config: dataset.cap must be >= 2");
  if (!(synth_seconds > 0.0)) throw InvalidArgument("config: dataset.synth_seconds must be > 0");
  if (target_fprs.empty()) throw InvalidArgument("config: no target FPRs");
  for (double f : target_fprs) {
    if (!(f > 0.0 && f < 1.0)) throw InvalidArgument("config: target FPRs must be in (0, 1)");
  }
  if (jobs == 0) throw InvalidArgument("config: run.jobs must be >= 1");
  if (wm_a == wm_b) throw InvalidArgument("config: watermarks A and B must use different backends");
  if (!(alpha_a >= 0.0) || !(alpha_b >= 0.0)) throw InvalidArgument("config: alphas must be >= 0");
  if (payload_bits == 0 || payload_bits > 64) throw InvalidArgument("config: payload_bits must be 1..64");
  backends.ss.stft.validate();
  if (!(backends.ss.alpha > 0.0)) throw InvalidArgument("config: ss.alpha must be > 0");
  if (!(backends.qim.step > 0.0)) throw InvalidArgument("config: qim.step must be > 0");
  phase_lattice_spacing(backends.phase.theta);
  if (fusion == FusionMode::kFixed) FusionWeights w(fusion_weights);
  if (fusion == FusionMode::kFixed && fusion_weights.size() != 2) {
    throw InvalidArgument("config: fixed fusion needs two weights");
  }
  SlotPlan{tdm_slot_ms, 2}.validate();
  if (!fdm_bands.bands.empty()) fdm_bands.validate(kDefaultSampleRate);
  for (const AttackSpec& a : attacks) {
    if (a.kind == AttackKind::kExternalCodec) {
      const std::string name = a.name();
      if (!a.params.count("command") && !codec_commands.count(name)) {
        throw InvalidArgument("config: no codec." + name + " command for attack " + a.to_text());
      }
      continue;
    }
    a.validate();
  }
  for (const auto& [name, cmd] : codec_commands) CodecCommand{name, cmd}.validate();
  if (max_procs == 0) throw InvalidArgument("config: codec.max_procs must be >= 1");
}

std::string BenchConfig::canonical() const {
  std::string out;
  for (const Field& f : fields()) out += f.key + " = " + f.get(*this) + "\n";
  for (const auto& [name, cmd] : codec_commands) out += "codec." + name + " = " + cmd + "\n";
  return out;
}

std::string BenchConfig::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canonical()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

BenchConfig default_bench_config() {
  BenchConfig c;
  c.modes = {Mode::kSinglePhase, Mode::kSingleSs, Mode::kParallel, Mode::kSeqAB,
             Mode::kSeqBA,       Mode::kFdm,      Mode::kTdm,      Mode::kPatfm};
  for (const char* a : {"gaussian_noise:snr_db=20", "uniform_noise:snr_db=20", "zero_mask:fraction=0.1",
                        "fft_mask:fraction=0.1", "echo:delay_ms=100,gain=0.3", "external_codec:name=mp3",
                        "external_codec:name=opus", "rir:rt60_ms=200"}) {
    c.attacks.push_back(AttackSpec::parse(a));
  }
  c.codec_commands["mp3"] =
      "ffmpeg -nostdin -hide_banner -loglevel error -y -i {in} -c:a libmp3lame -b:a 64k {work}/c.mp3 && "
      "ffmpeg -nostdin -hide_banner -loglevel error -y -i {work}/c.mp3 -ar 16000 -ac 1 -c:a pcm_s16le {out}";
  c.codec_commands["opus"] =
      "ffmpeg -nostdin -hide_banner -loglevel error -y -i {in} -c:a libopus -b:a 24k {work}/c.opus && "
      "ffmpeg -nostdin -hide_banner -loglevel error -y -i {work}/c.opus -ar 16000 -ac 1 -c:a pcm_s16le {out}";
  c.sweep_attack = AttackSpec::parse("gaussian_noise");
  c.sweep_strengths = {30.0, 20.0, 10.0, 5.0, 0.0};
  return c;
}

BenchConfig parse_bench_config(std::string_view text, BenchConfig base) {
  const std::vector<Field> table = fields();
  std::set<std::string> seen;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string s = trim(line);
    if (s.empty() || s[0] == '#') continue;
    const std::size_t eq = s.find('=');
    if (eq == std::string::npos) {
      throw InvalidArgument("config line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = trim(s.substr(0, eq));
    std::string value = trim(s.substr(eq + 1));
    // Trailing comments need whitespace before '#'.
    for (std::size_t p = value.find('#'); p != std::string::npos; p = value.find('#', p + 1)) {
      if (p > 0 && std::isspace(static_cast<unsigned char>(value[p - 1]))) {
        value = trim(value.substr(0, p));
        break;
      }
    }
    if (!seen.insert(key).second) {
      throw InvalidArgument("config line " + std::to_string(line_no) + ": duplicate key " + key);
    }
    try {
      if (key.rfind("codec.", 0) == 0 && key != "codec.max_procs" && key != "codec.timeout_s") {
        const std::string name = key.substr(6);
        if (name.empty()) throw InvalidArgument("empty codec name");
        if (value.empty()) {
          base.codec_commands.erase(name);
        } else {
          base.codec_commands[name] = value;
        }
        continue;
      }
      bool found = false;
      for (const Field& f : table) {
        if (f.key == key) {
          f.set(base, value);
          found = true;
          break;
        }
      }
      if (!found) throw InvalidArgument("unknown key " + key);
    } catch (const InvalidArgument& e) {
      throw InvalidArgument("config line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  sync_stft(base);
  base.validate();
  return base;
}

BenchConfig load_bench_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_bench_config(ss.str());
}

}  // namespace wavemux
