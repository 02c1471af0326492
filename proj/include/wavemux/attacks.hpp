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


#ifndef WAVEMUX_ATTACKS_HPP_
#define WAVEMUX_ATTACKS_HPP_

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wavemux/audio.hpp"

namespace wavemux {

enum class AttackKind {
  kNone,
  kGaussianNoise,
  kUniformNoise,
  kAmplitudeScale,
  kZeroMask,
  kTimeShift,
  kLowpass,
  kBandpass,
  kSmoothing,
  kTimeStretch,
  kEcho,
  kCropInvert,
  kFftMask,
  kRir,
  kExternalCodec,
};

std::string to_string(AttackKind kind);
AttackKind attack_kind_from_string(std::string_view name);
std::vector<AttackKind> all_attack_kinds();

// Parameter accepted by a kind; the first one listed is its strength axis.
struct AttackParam {
  std::string name;
  double default_value;
};
std::vector<AttackParam> attack_params(AttackKind kind);

// kind plus named parameters. Numeric parameters not given take their
// defaults. external_codec takes the string parameters `command` (a template
// with {in} and {out}, optionally {work}) and `name`.
struct AttackSpec {
  AttackKind kind = AttackKind::kNone;
  std::map<std::string, std::string> params;

  // Label such as "echo" or the codec name.
  std::string name() const;
  double num(const std::string& key) const;
  void validate() const;

  // "kind" or "kind:key=value,key=value".
  static AttackSpec parse(std::string_view text);
  std::string to_text() const;
  friend bool operator==(const AttackSpec&, const AttackSpec&) = default;
};

struct CodecCommand {
  std::string name;
  std::string command;  // shell template with {in}, {out} and optionally {work}

  void validate() const;
  AttackSpec as_attack() const;
};

struct ExternalOptions {
  std::filesystem::path workdir;  // empty means the system temp directory
  std::chrono::seconds timeout{120};
};

// Caps concurrently running external commands across all threads.
void set_external_process_cap(std::size_t cap);

// Deterministic in (x, spec, seed) for every kind except external_codec.
// Output always has the input's length.
AudioBuffer attack_apply(const AudioBuffer& x, const AttackSpec& spec, std::uint64_t seed,
                         const ExternalOptions& ext = {});

AudioBuffer add_noise(const AudioBuffer& x, double snr_db, bool gaussian, std::uint64_t seed);
AudioBuffer amplitude_scale(const AudioBuffer& x, double gain);
AudioBuffer zero_mask(const AudioBuffer& x, double fraction, std::uint64_t seed);
// Positive shifts delay the signal; vacated samples are zero.
AudioBuffer time_shift(const AudioBuffer& x, std::int64_t shift_samples);
// Zero-phase 4th-order Butterworth sections run forward and backward.
AudioBuffer lowpass(const AudioBuffer& x, double cutoff_hz);
AudioBuffer bandpass(const AudioBuffer& x, double lo_hz, double hi_hz);
// Centered moving average.
AudioBuffer smoothing(const AudioBuffer& x, std::size_t taps);
// Phase vocoder; rate > 1 shortens. Re-fit to the input length.
AudioBuffer time_stretch(const AudioBuffer& x, double rate);
AudioBuffer echo(const AudioBuffer& x, double delay_ms, double gain);
// Removes one seeded segment (closing the gap, zero tail) and flips the
// polarity of another, each floor(fraction * N) samples long.
AudioBuffer crop_invert(const AudioBuffer& x, double fraction, std::uint64_t seed);
// Zeroes floor(fraction * cells) seeded STFT cells.
AudioBuffer fft_mask(const AudioBuffer& x, double fraction, std::uint64_t seed);

// Unit direct tap followed by seeded noise decaying by 60 dB over rt60.
std::vector<double> synth_rir(double rt60_ms, int sample_rate, std::uint64_t seed);
// x convolved with h, truncated to len(x), rescaled to the input peak.
AudioBuffer rir_convolve(const AudioBuffer& x, std::span<const double> h);

AudioBuffer external_codec_attack(const AudioBuffer& x, const CodecCommand& cmd,
                                  const ExternalOptions& ext = {});

// Zero-pads or truncates to n samples.
std::vector<double> refit_length(std::vector<double> y, std::size_t n);

}  // namespace wavemux

#endif  // WAVEMUX_ATTACKS_HPP_
