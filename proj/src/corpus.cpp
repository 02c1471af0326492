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


#include "wavemux/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>

#include "wavemux/errors.hpp"
#include "wavemux/rng.hpp"

namespace wavemux {

namespace {

// Two-pole resonator with unit gain at its center frequency.
struct Resonator {
  double b0 = 0.0, a1 = 0.0, a2 = 0.0, y1 = 0.0, y2 = 0.0;

  void tune(double hz, double bw_hz, int fs) {
    const double r = std::exp(-std::numbers::pi * bw_hz / fs);
    const double th = 2.0 * std::numbers::pi * hz / fs;
    a1 = -2.0 * r * std::cos(th);
    a2 = r * r;
    b0 = (1.0 - r) * std::sqrt(1.0 - 2.0 * r * std::cos(2.0 * th) + r * r);
  }
  double step(double x) {
    const double y = b0 * x - a1 * y1 - a2 * y2;
    y2 = y1;
    y1 = y;
    return y;
  }
};

struct Vowel {
  double f1, f2, f3;
};

constexpr Vowel kVowels[] = {{730, 1090, 2440}, {270, 2290, 3010}, {530, 1840, 2480},
                             {570, 840, 2410},  {300, 870, 2240},  {660, 1720, 2410},
                             {440, 1020, 2240}, {390, 1990, 2550}};

}  // namespace

AudioBuffer normalize_level(const AudioBuffer& x, double level_dbfs) {
  const double rms = std::sqrt(energy(x.samples()) / static_cast<double>(x.size()));
  if (rms == 0.0) return x;
  const double g = std::pow(10.0, level_dbfs / 20.0) / rms;
  std::vector<double> y = x.vec();
  for (double& v : y) v *= g;
  return x.with_samples(std::move(y));
}

std::vector<Utterance> ingest_dataset(const std::filesystem::path& dir, std::size_t cap, int sample_rate) {
  if (!std::filesystem::is_directory(dir)) throw IoError("dataset dir not found: " + dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    std::string ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".wav") files.push_back(entry.path());
  }
  if (files.empty()) throw IoError("no WAV files in " + dir.string());
  std::sort(files.begin(), files.end(),
            [](const auto& a, const auto& b) { return a.filename().string() < b.filename().string(); });
  if (files.size() > cap) files.resize(cap);
  std::vector<Utterance> out;
  for (const auto& f : files) {
    AudioBuffer a = load_wav(f);
    if (a.sample_rate() != sample_rate) {
      throw IoError(f.string() + ": sample rate " + std::to_string(a.sample_rate()) + " Hz, expected " +
                    std::to_string(sample_rate));
    }
    out.push_back({f.stem().string(), std::move(a)});
  }
  return out;
}

AudioBuffer synth_utterance(std::uint64_t seed, double seconds, int sample_rate) {
  if (!(seconds > 0.0)) throw InvalidArgument("synth_utterance: duration must be > 0");
  const auto n = static_cast<std::size_t>(std::llround(seconds * sample_rate));
  const double fs = sample_rate;
  CounterRng rng(seed, rng_stream::kCorpus);
  std::vector<double> y(n, 0.0);

  const double base_f0 = 95.0 + 120.0 * rng.uniform();
  Resonator r1, r2, r3, fric;
  double phase = 0.0, lp1 = 0.0, lp2 = 0.0, prev = 0.0;
  std::size_t pos = 0;
  while (pos < n) {
    const double u = rng.uniform();
    if (u < 0.15) {  // pause
      pos += static_cast<std::size_t>((0.08 + 0.2 * rng.uniform()) * fs);
      continue;
    }
    if (u < 0.35) {  // fricative
      const auto len = static_cast<std::size_t>((0.05 + 0.08 * rng.uniform()) * fs);
      fric.tune(3500.0 + 3000.0 * rng.uniform(), 1500.0 + 1000.0 * rng.uniform(), sample_rate);
      const double amp = 0.04 + 0.06 * rng.uniform();
      for (std::size_t i = 0; i < len && pos + i < n; ++i) {
        const double env = std::sin(std::numbers::pi * static_cast<double>(i) / static_cast<double>(len));
        y[pos + i] += amp * env * fric.step(rng.normal());
      }
      pos += len;
      continue;
    }
    // voiced syllable gliding between two vowels
    const auto len = static_cast<std::size_t>((0.12 + 0.2 * rng.uniform()) * fs);
    const Vowel& va = kVowels[rng.below(std::size(kVowels))];
    const Vowel& vb = kVowels[rng.below(std::size(kVowels))];
    const double f0_start = base_f0 * (0.85 + 0.3 * rng.uniform());
    const double f0_end = f0_start * (0.8 + 0.35 * rng.uniform());
    const double amp = 0.6 + 0.4 * rng.uniform();
    for (std::size_t i = 0; i < len && pos + i < n; ++i) {
      const double a = static_cast<double>(i) / static_cast<double>(len);
      if (i % 32 == 0) {
        r1.tune(va.f1 + a * (vb.f1 - va.f1), 80.0, sample_rate);
        r2.tune(va.f2 + a * (vb.f2 - va.f2), 110.0, sample_rate);
        r3.tune(va.f3 + a * (vb.f3 - va.f3), 160.0, sample_rate);
      }
      const double f0 = f0_start + a * (f0_end - f0_start);
      phase += f0 / fs;
      double src = 0.0;
      if (phase >= 1.0) {
        phase -= 1.0;
        src = 1.0;
      }
      // glottal roll-off (two leaky integrators), lip radiation (difference)
      lp1 = 0.9 * lp1 + src + 0.01 * rng.normal();
      lp2 = 0.9 * lp2 + lp1;
      const double exc = lp2 - prev;
      prev = lp2;
      const double env = std::pow(std::sin(std::numbers::pi * a), 0.6);
      y[pos + i] += amp * env * (r1.step(exc) + 0.8 * r2.step(exc) + 0.6 * r3.step(exc));
    }
    pos += len;
  }
  // faint noise floor so no frame is digitally silent
  double peak_rms = std::sqrt(energy(y) / static_cast<double>(n));
  if (peak_rms == 0.0) peak_rms = 1.0;
  for (double& v : y) v += peak_rms * 1e-3 * rng.normal();
  return normalize_level(AudioBuffer(std::move(y), sample_rate), kDefaultLevelDbfs);
}

std::vector<Utterance> synth_corpus(std::size_t n, std::uint64_t seed, double seconds, int sample_rate) {
  std::vector<Utterance> out;
  for (std::size_t i = 0; i < n; ++i) {
    char id[32];
    std::snprintf(id, sizeof id, "synth_%04zu", i);
    out.push_back({id, synth_utterance(splitmix64(seed ^ splitmix64(i + 1)), seconds, sample_rate)});
  }
  return out;
}

}  // namespace wavemux
