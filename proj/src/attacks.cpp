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


#include "wavemux/attacks.hpp"

#include <stdlib.h>

#include <algorithm>
#include <cmath>
#include <condition_variable>
#include <limits>
#include <mutex>
#include <numbers>

#include "subprocess.hpp"
#include "wavemux/errors.hpp"
#include "wavemux/fft.hpp"
#include "wavemux/rng.hpp"
#include "wavemux/stft.hpp"

namespace wavemux {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct KindName {
  AttackKind kind;
  const char* name;
};

constexpr KindName kKindNames[] = {
    {AttackKind::kNone, "none"},
    {AttackKind::kGaussianNoise, "gaussian_noise"},
    {AttackKind::kUniformNoise, "uniform_noise"},
    {AttackKind::kAmplitudeScale, "amplitude_scale"},
    {AttackKind::kZeroMask, "zero_mask"},
    {AttackKind::kTimeShift, "time_shift"},
    {AttackKind::kLowpass, "lowpass"},
    {AttackKind::kBandpass, "bandpass"},
    {AttackKind::kSmoothing, "smoothing"},
    {AttackKind::kTimeStretch, "time_stretch"},
    {AttackKind::kEcho, "echo"},
    {AttackKind::kCropInvert, "crop_invert"},
    {AttackKind::kFftMask, "fft_mask"},
    {AttackKind::kRir, "rir"},
    {AttackKind::kExternalCodec, "external_codec"},
};

std::vector<double> noise_vector(std::size_t n, bool gaussian, std::uint64_t seed) {
  CounterRng rng(seed, rng_stream::kAttack);
  std::vector<double> out(n);
  for (double& v : out) v = gaussian ? rng.normal() : 2.0 * rng.uniform() - 1.0;
  return out;
}

struct Biquad {
  double b0, b1, b2, a1, a2;

  void run(std::vector<double>& x) const {
    double s1 = 0.0, s2 = 0.0;
    for (double& v : x) {
      const double in = v;
      const double out = b0 * in + s1;
      s1 = b1 * in - a1 * out + s2;
      s2 = b2 * in - a2 * out;
      v = out;
    }
  }
};

// Section Q values of a 4th-order Butterworth prototype.
constexpr double kButterQ[2] = {0.54119610014619698, 1.3065629648763766};

Biquad rbj(bool high, double fc, int fs, double q) {
  const double w0 = 2.0 * std::numbers::pi * fc / fs;
  const double c = std::cos(w0), alpha = std::sin(w0) / (2.0 * q);
  const double a0 = 1.0 + alpha;
  const double b0 = high ? (1.0 + c) / 2.0 : (1.0 - c) / 2.0;
  const double b1 = high ? -(1.0 + c) : 1.0 - c;
  return {b0 / a0, b1 / a0, b0 / a0, -2.0 * c / a0, (1.0 - alpha) / a0};
}

void check_cutoff(double hz, int fs, const char* what) {
  if (!(hz > 0.0 && hz < fs / 2.0)) {
    throw InvalidArgument(std::string(what) + " must lie strictly between 0 and Nyquist");
  }
}

AudioBuffer filtfilt(const AudioBuffer& x, const std::vector<Biquad>& sections) {
  std::vector<double> y = x.vec();
  for (const Biquad& b : sections) b.run(y);
  std::reverse(y.begin(), y.end());
  for (const Biquad& b : sections) b.run(y);
  std::reverse(y.begin(), y.end());
  return x.with_samples(std::move(y));
}

class ProcessSlots {
 public:
  void set_cap(std::size_t cap) {
    std::lock_guard lock(mu_);
    cap_ = std::max<std::size_t>(1, cap);
    cv_.notify_all();
  }
  void acquire() {
    std::unique_lock lock(mu_);
    cv_.wait(lock, [&] { return running_ < cap_; });
    ++running_;
  }
  void release() {
    std::lock_guard lock(mu_);
    --running_;
    cv_.notify_one();
  }

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  std::size_t cap_ = 4;
  std::size_t running_ = 0;
};

ProcessSlots& process_slots() {
  static ProcessSlots slots;
  return slots;
}

std::string replace_all(std::string s, const std::string& from, const std::string& to) {
  for (std::size_t pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size())) {
    s.replace(pos, from.size(), to);
  }
  return s;
}

std::filesystem::path make_temp_dir(const std::filesystem::path& base) {
  const std::filesystem::path root = base.empty() ? std::filesystem::temp_directory_path() : base;
  std::filesystem::create_directories(root);
  std::string templ = (root / "wavemux-XXXXXX").string();
  if (mkdtemp(templ.data()) == nullptr) throw IoError("cannot create temp dir under " + root.string());
  return templ;
}

}  // namespace

std::string to_string(AttackKind kind) {
  for (const auto& kn : kKindNames) {
    if (kn.kind == kind) return kn.name;
  }
  return "unknown";
}

AttackKind attack_kind_from_string(std::string_view name) {
  for (const auto& kn : kKindNames) {
    if (name == kn.name) return kn.kind;
  }
  throw InvalidArgument("unknown attack kind '" + std::string(name) + "'");
}

std::vector<AttackKind> all_attack_kinds() {
  std::vector<AttackKind> out;
  for (const auto& kn : kKindNames) out.push_back(kn.kind);
  return out;
}

std::vector<AttackParam> attack_params(AttackKind kind) {
  switch (kind) {
    case AttackKind::kNone: return {};
    case AttackKind::kGaussianNoise:
    case AttackKind::kUniformNoise: return {{"snr_db", 20.0}};
    case AttackKind::kAmplitudeScale: return {{"gain", 0.5}};
    case AttackKind::kZeroMask: return {{"fraction", 0.1}};
    case AttackKind::kTimeShift: return {{"shift_ms", kNaN}, {"max_shift_ms", 10.0}};
    case AttackKind::kLowpass: return {{"cutoff_hz", 3400.0}};
    case AttackKind::kBandpass: return {{"hi_hz", 3400.0}, {"lo_hz", 300.0}};
    case AttackKind::kSmoothing: return {{"taps", 5.0}};
    case AttackKind::kTimeStretch: return {{"rate", 0.9}};
    case AttackKind::kEcho: return {{"gain", 0.3}, {"delay_ms", 100.0}};
    case AttackKind::kCropInvert: return {{"fraction", 0.1}};
    case AttackKind::kFftMask: return {{"fraction", 0.1}};
    case AttackKind::kRir: return {{"rt60_ms", 200.0}};
    case AttackKind::kExternalCodec: return {};
  }
  return {};
}

std::string AttackSpec::name() const {
  if (kind == AttackKind::kExternalCodec) {
    const auto it = params.find("name");
    return it != params.end() ? it->second : "external_codec";
  }
  return to_string(kind);
}

double AttackSpec::num(const std::string& key) const {
  for (const AttackParam& p : attack_params(kind)) {
    if (p.name != key) continue;
    const auto it = params.find(key);
    if (it == params.end()) return p.default_value;
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(it->second, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != it->second.size() || it->second.empty()) {
      throw InvalidArgument(to_string(kind) + ": parameter " + key + " is not a number: '" + it->second + "'");
    }
    return v;
  }
  throw InvalidArgument(to_string(kind) + " has no parameter '" + key + "'");
}

void AttackSpec::validate() const {
  const auto known = attack_params(kind);
  for (const auto& [key, value] : params) {
    const bool numeric = std::any_of(known.begin(), known.end(), [&](const AttackParam& p) { return p.name == key; });
    const bool text = kind == AttackKind::kExternalCodec && (key == "command" || key == "name");
    if (!numeric && !text) throw InvalidArgument(to_string(kind) + " has no parameter '" + key + "'");
    if (numeric) num(key);
  }
  auto require = [&](bool ok, const char* what) {
    if (!ok) throw InvalidArgument(to_string(kind) + ": " + what);
  };
  switch (kind) {
    case AttackKind::kNone: break;
    case AttackKind::kGaussianNoise:
    case AttackKind::kUniformNoise: require(!std::isnan(num("snr_db")), "snr_db must be a number"); break;
    case AttackKind::kAmplitudeScale: require(num("gain") >= 0.0 && std::isfinite(num("gain")), "gain must be >= 0"); break;
    case AttackKind::kZeroMask:
    case AttackKind::kCropInvert:
    case AttackKind::kFftMask: require(num("fraction") >= 0.0 && num("fraction") <= 1.0, "fraction must be in [0, 1]"); break;
    case AttackKind::kTimeShift: {
      const double s = num("shift_ms"), m = num("max_shift_ms");
      require(std::isnan(s) || std::isfinite(s), "shift_ms must be finite");
      require(m >= 0.0 && std::isfinite(m), "max_shift_ms must be >= 0");
      break;
    }
    case AttackKind::kLowpass: require(num("cutoff_hz") > 0.0, "cutoff_hz must be > 0"); break;
    case AttackKind::kBandpass: require(num("lo_hz") > 0.0 && num("lo_hz") < num("hi_hz"), "need 0 < lo_hz < hi_hz"); break;
    case AttackKind::kSmoothing: {
      const double t = num("taps");
      require(t >= 1.0 && t <= 1025.0 && t == std::floor(t), "taps must be an integer in [1, 1025]");
      break;
    }
    case AttackKind::kTimeStretch: require(num("rate") >= 0.8 && num("rate") <= 1.25, "rate must be in [0.8, 1.25]"); break;
    case AttackKind::kEcho:
      require(num("delay_ms") >= 0.0 && std::isfinite(num("delay_ms")), "delay_ms must be >= 0");
      require(num("gain") >= 0.0 && std::isfinite(num("gain")), "gain must be >= 0");
      break;
    case AttackKind::kRir: require(num("rt60_ms") > 0.0 && std::isfinite(num("rt60_ms")), "rt60_ms must be > 0"); break;
    case AttackKind::kExternalCodec: {
      const auto it = params.find("command");
      require(it != params.end(), "needs a command template");
      CodecCommand{name(), it->second}.validate();
      break;
    }
  }
}

AttackSpec AttackSpec::parse(std::string_view text) {
  AttackSpec spec;
  const std::size_t colon = text.find(':');
  spec.kind = attack_kind_from_string(text.substr(0, colon));
  if (colon != std::string_view::npos) {
    std::string_view rest = text.substr(colon + 1);
    while (!rest.empty()) {
      const std::size_t comma = rest.find(',');
      const std::string_view item = rest.substr(0, comma);
      const std::size_t eq = item.find('=');
      if (eq == std::string_view::npos || eq == 0) {
        throw InvalidArgument("attack parameter '" + std::string(item) + "' is not key=value");
      }
      spec.params[std::string(item.substr(0, eq))] = std::string(item.substr(eq + 1));
      if (comma == std::string_view::npos) break;
      rest = rest.substr(comma + 1);
    }
  }
  return spec;
}

std::string AttackSpec::to_text() const {
  std::string out = to_string(kind);
  char sep = ':';
  for (const auto& [k, v] : params) {
    if (k == "command") continue;
    out += sep + k + "=" + v;
    sep = ',';
  }
  return out;
}

void CodecCommand::validate() const {
  if (command.find("{in}") == std::string::npos || command.find("{out}") == std::string::npos) {
    throw InvalidArgument("codec command '" + name + "' must contain {in} and {out}");
  }
}

AttackSpec CodecCommand::as_attack() const {
  return {AttackKind::kExternalCodec, {{"name", name}, {"command", command}}};
}

void set_external_process_cap(std::size_t cap) { process_slots().set_cap(cap); }

std::vector<double> refit_length(std::vector<double> y, std::size_t n) {
  y.resize(n, 0.0);
  return y;
}

AudioBuffer add_noise(const AudioBuffer& x, double snr_db, bool gaussian, std::uint64_t seed) {
  if (std::isnan(snr_db)) throw InvalidArgument("noise: snr_db is NaN");
  if (std::isinf(snr_db) && snr_db > 0) return x;
  const double ex = energy(x.samples());
  if (ex == 0.0) throw InvalidArgument("noise at a target SNR needs a non-silent signal");
  std::vector<double> n = noise_vector(x.size(), gaussian, seed);
  const double en = energy(n);
  const double scale = std::sqrt(ex / (en * std::pow(10.0, snr_db / 10.0)));
  std::vector<double> y = x.vec();
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += scale * n[i];
  return x.with_samples(std::move(y));
}

AudioBuffer amplitude_scale(const AudioBuffer& x, double gain) {
  if (!(gain >= 0.0) || !std::isfinite(gain)) throw InvalidArgument("amplitude_scale: gain must be >= 0");
  if (gain == 1.0) return x;
  std::vector<double> y = x.vec();
  for (double& v : y) v *= gain;
  return x.with_samples(std::move(y));
}

AudioBuffer zero_mask(const AudioBuffer& x, double fraction, std::uint64_t seed) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) throw InvalidArgument("zero_mask: fraction must be in [0, 1]");
  const std::size_t n = x.size();
  const auto count = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n)));
  CounterRng rng(seed, rng_stream::kAttack);
  const std::size_t start = rng.below(n - count + 1);
  std::vector<double> y = x.vec();
  std::fill(y.begin() + static_cast<std::ptrdiff_t>(start),
            y.begin() + static_cast<std::ptrdiff_t>(start + count), 0.0);
  return x.with_samples(std::move(y));
}

AudioBuffer time_shift(const AudioBuffer& x, std::int64_t shift) {
  const auto n = static_cast<std::int64_t>(x.size());
  std::vector<double> y(x.size(), 0.0);
  for (std::int64_t i = 0; i < n; ++i) {
    const std::int64_t src = i - shift;
    if (src >= 0 && src < n) y[static_cast<std::size_t>(i)] = x[static_cast<std::size_t>(src)];
  }
  return x.with_samples(std::move(y));
}

AudioBuffer lowpass(const AudioBuffer& x, double cutoff_hz) {
  check_cutoff(cutoff_hz, x.sample_rate(), "lowpass cutoff");
  return filtfilt(x, {rbj(false, cutoff_hz, x.sample_rate(), kButterQ[0]),
                      rbj(false, cutoff_hz, x.sample_rate(), kButterQ[1])});
}

AudioBuffer bandpass(const AudioBuffer& x, double lo_hz, double hi_hz) {
  check_cutoff(lo_hz, x.sample_rate(), "bandpass lower edge");
  check_cutoff(hi_hz, x.sample_rate(), "bandpass upper edge");
  if (!(lo_hz < hi_hz)) throw InvalidArgument("bandpass: lower edge must be below upper edge");
  const int fs = x.sample_rate();
  return filtfilt(x, {rbj(true, lo_hz, fs, kButterQ[0]), rbj(true, lo_hz, fs, kButterQ[1]),
                      rbj(false, hi_hz, fs, kButterQ[0]), rbj(false, hi_hz, fs, kButterQ[1])});
}

AudioBuffer smoothing(const AudioBuffer& x, std::size_t taps) {
  if (taps == 0) throw InvalidArgument("smoothing: taps must be >= 1");
  if (taps == 1) return x;
  const auto n = static_cast<std::ptrdiff_t>(x.size());
  const auto half = static_cast<std::ptrdiff_t>((taps - 1) / 2);
  std::vector<double> y(x.size(), 0.0);
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::ptrdiff_t j = i - half; j < i - half + static_cast<std::ptrdiff_t>(taps); ++j) {
      if (j >= 0 && j < n) s += x[static_cast<std::size_t>(j)];
    }
    y[static_cast<std::size_t>(i)] = s / static_cast<double>(taps);
  }
  return x.with_samples(std::move(y));
}

AudioBuffer time_stretch(const AudioBuffer& x, double rate) {
  if (!(rate >= 0.8 && rate <= 1.25)) throw InvalidArgument("time_stretch: rate must be in [0.8, 1.25]");
  const StftConfig cfg;
  const Spectrogram d = stft(x, cfg);
  const std::size_t n_bins = d.n_bins(), n_in = d.n_frames();
  const auto out_len = static_cast<std::size_t>(std::llround(static_cast<double>(x.size()) / rate));
  if (out_len < cfg.frame_len) throw InvalidArgument("time_stretch: signal too short");
  const std::size_t n_out = cfg.frames_for(out_len);

  std::vector<double> advance(n_bins), acc(n_bins);
  for (std::size_t k = 0; k < n_bins; ++k) {
    advance[k] = 2.0 * std::numbers::pi * static_cast<double>(cfg.hop) * static_cast<double>(k) /
                 static_cast<double>(cfg.frame_len);
    acc[k] = std::arg(d.at(0, k));
  }
  auto frame_at = [&](std::size_t t, std::size_t k) { return t < n_in ? d.at(t, k) : Complex(0.0, 0.0); };

  std::vector<Complex> grid(n_out * n_bins);
  for (std::size_t j = 0; j < n_out; ++j) {
    const double step = static_cast<double>(j) * rate;
    const auto t = static_cast<std::size_t>(std::floor(step));
    const double frac = step - static_cast<double>(t);
    for (std::size_t k = 0; k < n_bins; ++k) {
      const Complex left = frame_at(t, k), right = frame_at(t + 1, k);
      const double mag = (1.0 - frac) * std::abs(left) + frac * std::abs(right);
      grid[j * n_bins + k] = std::polar(mag, acc[k]);
      double dphase = std::arg(right) - std::arg(left) - advance[k];
      dphase -= 2.0 * std::numbers::pi * std::round(dphase / (2.0 * std::numbers::pi));
      acc[k] += advance[k] + dphase;
    }
  }
  const AudioBuffer y = istft(Spectrogram(std::move(grid), n_out, cfg, x.sample_rate(), out_len));
  return x.with_samples(refit_length(y.vec(), x.size()));
}

AudioBuffer echo(const AudioBuffer& x, double delay_ms, double gain) {
  if (!(delay_ms >= 0.0) || !std::isfinite(delay_ms)) throw InvalidArgument("echo: delay must be >= 0");
  if (!(gain >= 0.0) || !std::isfinite(gain)) throw InvalidArgument("echo: gain must be >= 0");
  if (gain == 0.0) return x;
  const auto d = static_cast<std::size_t>(std::llround(delay_ms * x.sample_rate() / 1000.0));
  std::vector<double> y = x.vec();
  for (std::size_t i = d; i < y.size(); ++i) y[i] += gain * x[i - d];
  return x.with_samples(std::move(y));
}

AudioBuffer crop_invert(const AudioBuffer& x, double fraction, std::uint64_t seed) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) throw InvalidArgument("crop_invert: fraction must be in [0, 1]");
  const std::size_t n = x.size();
  const auto len = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n)));
  if (len == 0) return x;
  CounterRng rng(seed, rng_stream::kAttack);
  const std::size_t cut = rng.below(n - len + 1);
  std::vector<double> y;
  y.reserve(n);
  y.insert(y.end(), x.vec().begin(), x.vec().begin() + static_cast<std::ptrdiff_t>(cut));
  y.insert(y.end(), x.vec().begin() + static_cast<std::ptrdiff_t>(cut + len), x.vec().end());
  y.resize(n, 0.0);
  const std::size_t flip = rng.below(n - len + 1);
  for (std::size_t i = flip; i < flip + len; ++i) y[i] = -y[i];
  return x.with_samples(std::move(y));
}

AudioBuffer fft_mask(const AudioBuffer& x, double fraction, std::uint64_t seed) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) throw InvalidArgument("fft_mask: fraction must be in [0, 1]");
  Spectrogram spec = stft(x);
  auto grid = spec.grid();
  const std::size_t cells = grid.size();
  const auto count = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(cells)));
  std::vector<std::size_t> idx(cells);
  for (std::size_t i = 0; i < cells; ++i) idx[i] = i;
  CounterRng rng(seed, rng_stream::kAttack);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = i + rng.below(cells - i);
    std::swap(idx[i], idx[j]);
    grid[idx[i]] = Complex(0.0, 0.0);
  }
  return istft(spec);
}

std::vector<double> synth_rir(double rt60_ms, int sample_rate, std::uint64_t seed) {
  if (!(rt60_ms > 0.0) || !std::isfinite(rt60_ms)) throw InvalidArgument("rir: rt60 must be > 0");
  const auto len = static_cast<std::size_t>(std::ceil(rt60_ms * sample_rate / 1000.0)) + 1;
  const double tau = rt60_ms * sample_rate / 1000.0 / std::log(1000.0);
  CounterRng rng(seed, rng_stream::kRir);
  std::vector<double> h(len);
  h[0] = 1.0;
  for (std::size_t n = 1; n < len; ++n) h[n] = 0.1 * rng.normal() * std::exp(-static_cast<double>(n) / tau);
  return h;
}

AudioBuffer rir_convolve(const AudioBuffer& x, std::span<const double> h) {
  if (h.empty()) throw InvalidArgument("rir: empty impulse response");
  std::vector<double> y = h.size() == 1 ? x.vec() : fft_convolve(x.samples(), h);
  if (h.size() == 1) {
    for (double& v : y) v *= h[0];
  }
  y.resize(x.size());
  double px = 0.0, py = 0.0;
  for (double v : x.samples()) px = std::max(px, std::abs(v));
  for (double v : y) py = std::max(py, std::abs(v));
  if (py > 0.0 && px != py) {
    const double s = px / py;
    for (double& v : y) v *= s;
  }
  return x.with_samples(std::move(y));
}

AudioBuffer external_codec_attack(const AudioBuffer& x, const CodecCommand& cmd, const ExternalOptions& ext) {
  cmd.validate();
  const std::filesystem::path dir = make_temp_dir(ext.workdir);
  struct Cleanup {
    std::filesystem::path p;
    ~Cleanup() {
      std::error_code ec;
      std::filesystem::remove_all(p, ec);
    }
  } cleanup{dir};
  const std::filesystem::path in = dir / "in.wav", out = dir / "out.wav";
  save_wav(x, in);
  std::string line = replace_all(cmd.command, "{in}", detail::shell_quote(in.string()));
  line = replace_all(line, "{out}", detail::shell_quote(out.string()));
  line = replace_all(line, "{work}", detail::shell_quote(dir.string()));

  process_slots().acquire();
  detail::ShellResult res;
  try {
    res = detail::run_shell(line, std::chrono::duration_cast<std::chrono::milliseconds>(ext.timeout));
  } catch (...) {
    process_slots().release();
    throw;
  }
  process_slots().release();

  if (res.timed_out) throw ExternalError("codec '" + cmd.name + "' timed out", res.output);
  if (res.exit_code != 0) {
    throw ExternalError("codec '" + cmd.name + "' exited with status " + std::to_string(res.exit_code),
                        res.output);
  }
  AudioBuffer y = [&] {
    try {
      return load_wav(out);
    } catch (const Error& e) {
      throw ExternalError("codec '" + cmd.name + "' produced unusable output: " + e.what(), res.output);
    }
  }();
  if (y.sample_rate() != x.sample_rate()) {
    throw ExternalError("codec '" + cmd.name + "' changed the sample rate to " + std::to_string(y.sample_rate()),
                        res.output);
  }
  return x.with_samples(refit_length(y.vec(), x.size()));
}

AudioBuffer attack_apply(const AudioBuffer& x, const AttackSpec& spec, std::uint64_t seed,
                         const ExternalOptions& ext) {
  spec.validate();
  switch (spec.kind) {
    case AttackKind::kNone: return x;
    case AttackKind::kGaussianNoise: return add_noise(x, spec.num("snr_db"), true, seed);
    case AttackKind::kUniformNoise: return add_noise(x, spec.num("snr_db"), false, seed);
    case AttackKind::kAmplitudeScale: return amplitude_scale(x, spec.num("gain"));
    case AttackKind::kZeroMask: return zero_mask(x, spec.num("fraction"), seed);
    case AttackKind::kTimeShift: {
      const double fixed = spec.num("shift_ms");
      const double fs = x.sample_rate();
      if (!std::isnan(fixed)) return time_shift(x, std::llround(fixed * fs / 1000.0));
      const auto max = std::llround(spec.num("max_shift_ms") * fs / 1000.0);
      CounterRng rng(seed, rng_stream::kAttack);
      const auto span = static_cast<std::uint64_t>(2 * max + 1);
      return time_shift(x, static_cast<std::int64_t>(rng.below(span)) - max);
    }
    case AttackKind::kLowpass: return lowpass(x, spec.num("cutoff_hz"));
    case AttackKind::kBandpass: return bandpass(x, spec.num("lo_hz"), spec.num("hi_hz"));
    case AttackKind::kSmoothing: return smoothing(x, static_cast<std::size_t>(spec.num("taps")));
    case AttackKind::kTimeStretch: return time_stretch(x, spec.num("rate"));
    case AttackKind::kEcho: return echo(x, spec.num("delay_ms"), spec.num("gain"));
    case AttackKind::kCropInvert: return crop_invert(x, spec.num("fraction"), seed);
    case AttackKind::kFftMask: return fft_mask(x, spec.num("fraction"), seed);
    case AttackKind::kRir: return rir_convolve(x, synth_rir(spec.num("rt60_ms"), x.sample_rate(), seed));
    case AttackKind::kExternalCodec:
      return external_codec_attack(x, {spec.name(), spec.params.at("command")}, ext);
  }
  throw InvalidArgument("unhandled attack kind");
}

}  // namespace wavemux
