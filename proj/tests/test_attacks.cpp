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
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <thread>

#include <gtest/gtest.h>

#include "test_util.hpp"
#include "wavemux/attacks.hpp"
#include "wavemux/errors.hpp"
#include "wavemux/fft.hpp"
#include "wavemux/metrics.hpp"
#include "wavemux/stft.hpp"

namespace wavemux {
namespace {

using testing::noise;
using testing::rel_err;
using testing::speech;
using testing::TempDir;

AudioBuffer tone(double hz, std::size_t n, double amp = 0.3) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = amp * std::sin(2.0 * std::numbers::pi * hz * i / 16000.0);
  return AudioBuffer(std::move(v));
}

double rms(const AudioBuffer& x, std::size_t from = 0, std::size_t to = 0) {
  if (to == 0) to = x.size();
  double s = 0.0;
  for (std::size_t i = from; i < to; ++i) s += x[i] * x[i];
  return std::sqrt(s / static_cast<double>(to - from));
}

double peak_hz(const AudioBuffer& x) {
  const auto spec = rfft(x.samples());
  std::size_t best = 1;
  for (std::size_t k = 1; k < spec.size(); ++k) {
    if (std::abs(spec[k]) > std::abs(spec[best])) best = k;
  }
  // parabolic interpolation on log magnitude
  const double a = std::log(std::abs(spec[best - 1])), b = std::log(std::abs(spec[best])),
               c = std::log(std::abs(spec[best + 1]));
  const double off = 0.5 * (a - c) / (a - 2.0 * b + c);
  return (static_cast<double>(best) + off) * 16000.0 / static_cast<double>(x.size());
}

bool have(const char* tool) {
  return std::system((std::string("command -v ") + tool + " >/dev/null 2>&1").c_str()) == 0;
}

TEST(AttackSpec, ParseAndText) {
  const AttackSpec s = AttackSpec::parse("echo:delay_ms=50,gain=0.2");
  EXPECT_EQ(s.kind, AttackKind::kEcho);
  EXPECT_EQ(s.num("delay_ms"), 50.0);
  EXPECT_EQ(s.num("gain"), 0.2);
  EXPECT_EQ(AttackSpec::parse(s.to_text()), s);
  EXPECT_EQ(AttackSpec::parse("lowpass").num("cutoff_hz"), 3400.0);
  EXPECT_EQ(AttackSpec::parse("rir").name(), "rir");
  EXPECT_THROW(AttackSpec::parse("nonsense"), InvalidArgument);
  EXPECT_THROW(AttackSpec::parse("echo:gain"), InvalidArgument);
  for (AttackKind k : all_attack_kinds()) {
    EXPECT_EQ(attack_kind_from_string(to_string(k)), k);
  }
}

TEST(AttackSpec, Validation) {
  EXPECT_THROW(AttackSpec::parse("echo:volume=2").validate(), InvalidArgument);
  EXPECT_THROW(AttackSpec::parse("zero_mask:fraction=1.5").validate(), InvalidArgument);
  EXPECT_THROW(AttackSpec::parse("amplitude_scale:gain=-1").validate(), InvalidArgument);
  EXPECT_THROW(AttackSpec::parse("echo:gain=abc").validate(), InvalidArgument);
  EXPECT_THROW(AttackSpec::parse("time_stretch:rate=0.5").validate(), InvalidArgument);
  EXPECT_THROW(AttackSpec::parse("rir:rt60_ms=0").validate(), InvalidArgument);
  EXPECT_THROW(AttackSpec::parse("external_codec:name=x").validate(), InvalidArgument);
  EXPECT_NO_THROW(AttackSpec::parse("gaussian_noise:snr_db=-5").validate());
  const CodecCommand bad{"bad", "cp {in} /tmp/x"};
  EXPECT_THROW(bad.validate(), InvalidArgument);
}

TEST(Noise, RealizesRequestedSnr) {
  const AudioBuffer x = speech(1);
  for (double target : {30.0, 20.0, 10.0, 5.0, 0.0, -5.0}) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      for (bool gauss : {true, false}) {
        const AudioBuffer y = add_noise(x, target, gauss, seed);
        EXPECT_NEAR(snr_db(x, y), target, 0.3) << target << " " << gauss;
      }
    }
  }
  EXPECT_THROW(add_noise(AudioBuffer(std::vector<double>(1000, 0.0)), 20.0, true, 1), InvalidArgument);
}

TEST(Noise, GaussianAndUniformDiffer) {
  const AudioBuffer x = speech(2);
  const AudioBuffer g = add_noise(x, 10.0, true, 3), u = add_noise(x, 10.0, false, 3);
  std::vector<double> dg(x.size()), du(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    dg[i] = g[i] - x[i];
    du[i] = u[i] - x[i];
  }
  // uniform noise is bounded by sqrt(3) sd, gaussian is not
  const double sd = std::sqrt(std::inner_product(du.begin(), du.end(), du.begin(), 0.0) / du.size());
  double max_u = 0.0, max_g = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    max_u = std::max(max_u, std::abs(du[i]));
    max_g = std::max(max_g, std::abs(dg[i]));
  }
  EXPECT_LE(max_u, std::sqrt(3.0) * sd * 1.02);
  EXPECT_GT(max_g, 3.0 * sd);
}

TEST(Identity, DegenerateParametersGiveTheInput) {
  const AudioBuffer x = speech(3);
  EXPECT_EQ(attack_apply(x, AttackSpec::parse("amplitude_scale:gain=1"), 1).vec(), x.vec());
  EXPECT_EQ(attack_apply(x, AttackSpec::parse("zero_mask:fraction=0"), 1).vec(), x.vec());
  EXPECT_EQ(attack_apply(x, AttackSpec::parse("crop_invert:fraction=0"), 1).vec(), x.vec());
  EXPECT_EQ(attack_apply(x, AttackSpec::parse("echo:gain=0"), 1).vec(), x.vec());
  EXPECT_EQ(attack_apply(x, AttackSpec::parse("time_shift:shift_ms=0"), 1).vec(), x.vec());
  EXPECT_EQ(attack_apply(x, AttackSpec::parse("smoothing:taps=1"), 1).vec(), x.vec());
  EXPECT_EQ(attack_apply(x, AttackSpec::parse("none"), 1).vec(), x.vec());
  EXPECT_LT(rel_err(attack_apply(x, AttackSpec::parse("fft_mask:fraction=0"), 1).vec(), x.vec()), 1e-6);
  EXPECT_LT(rel_err(attack_apply(x, AttackSpec::parse("time_stretch:rate=1"), 1).vec(), x.vec()), 1e-3);
  const std::vector<double> impulse{1.0};
  EXPECT_LT(rel_err(rir_convolve(x, impulse).vec(), x.vec()), 1e-6);
  const std::vector<double> padded_impulse{1.0, 0.0, 0.0, 0.0};
  EXPECT_LT(rel_err(rir_convolve(x, padded_impulse).vec(), x.vec()), 1e-6);
}

TEST(ZeroMask, ContiguousRegionOfExactLength) {
  const AudioBuffer x = noise(16003, 4, 0.1);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const AudioBuffer y = zero_mask(x, 0.1, seed);
    std::vector<std::size_t> zeroed;
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (y[i] != x[i]) {
        EXPECT_EQ(y[i], 0.0);
        zeroed.push_back(i);
      }
    }
    ASSERT_EQ(zeroed.size(), 1600u);
    EXPECT_EQ(zeroed.back() - zeroed.front() + 1, 1600u);
  }
}

TEST(Echo, ImpulseResponseAndEnergyBounds) {
  std::vector<double> imp(4000, 0.0);
  imp[0] = 1.0;
  const AudioBuffer y = echo(AudioBuffer(imp), 100.0, 0.3);
  const std::size_t d = 1600;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double expect = i == 0 ? 1.0 : i == d ? 0.3 : 0.0;
    EXPECT_EQ(y[i], expect) << i;
  }
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const AudioBuffer x = noise(8000, seed, 0.1);
    const double g = 0.1 + 0.018 * static_cast<double>(seed);
    const AudioBuffer e = echo(x, 1.0 + seed, g);
    const double ratio = energy(e.samples()) / energy(x.samples());
    EXPECT_GE(ratio, (1.0 - g) * (1.0 - g));
    EXPECT_LE(ratio, (1.0 + g) * (1.0 + g));
  }
  EXPECT_THROW(echo(y, -1.0, 0.3), InvalidArgument);
}

TEST(FftMask, FullMaskSilencesAndPartialMaskRemovesItsShare) {
  const AudioBuffer x = noise(32000, 5, 0.1);
  const AudioBuffer silent = fft_mask(x, 1.0, 1);
  for (double v : silent.samples()) EXPECT_EQ(v, 0.0);
  // Output sample n is x - (wa ea + wb eb) / S with S = wa^2 + wb^2, where e
  // is the masked share of a frame's windowed segment. Averaging over masks
  // and white x: E[x e] = f w, E[e^2] = f (1 - f) mean(w^2) + f^2 w^2 and
  // E[ea eb] = f^2 wa wb. Expected loss: 2f - f^2 - f (1 - f) mean(w^2) mean(1 / S).
  const std::vector<double> w = hann_window(1024);
  double w2 = 0.0, inv_s = 0.0;
  for (std::size_t i = 0; i < 512; ++i) {
    w2 += (w[i] * w[i] + w[i + 512] * w[i + 512]) / 1024.0;
    inv_s += 1.0 / (w[i] * w[i] + w[i + 512] * w[i + 512]) / 512.0;
  }
  for (double frac : {0.1, 0.3, 0.5}) {
    double loss = 0.0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      loss += 1.0 - energy(fft_mask(x, frac, seed).samples()) / energy(x.samples());
    }
    loss /= 10.0;
    const double expect = 2.0 * frac - frac * frac - frac * (1.0 - frac) * w2 * inv_s;
    EXPECT_NEAR(loss, expect, 0.1 * expect) << frac;
  }
}

TEST(TimeStretch, RangeAndPitch) {
  const AudioBuffer x = tone(440.0, 32000);
  EXPECT_THROW(time_stretch(x, 0.5), InvalidArgument);
  EXPECT_THROW(time_stretch(x, 1.3), InvalidArgument);
  for (double rate : {0.8, 0.9, 1.1, 1.2, 1.25}) {
    const AudioBuffer y = time_stretch(x, rate);
    ASSERT_EQ(y.size(), x.size());
    EXPECT_NEAR(peak_hz(AudioBuffer(std::vector<double>(y.vec().begin(), y.vec().begin() + 16000))), 440.0,
                4.4)
        << rate;
  }
  // a stretched click train changes its duration
  const AudioBuffer s = speech(6);
  const AudioBuffer fast = time_stretch(s, 1.25);
  EXPECT_LT(rms(fast, s.size() - 3000), 0.05 * rms(s));
}

TEST(Filters, LowpassAndBandpass) {
  const std::size_t n = 16000;
  const AudioBuffer low = tone(1000.0, n), high = tone(6000.0, n), deep = tone(80.0, n);
  const std::size_t a = 2000, b = 14000;  // away from the edges
  EXPECT_NEAR(rms(lowpass(low, 3400.0), a, b) / rms(low, a, b), 1.0, 0.02);
  EXPECT_LT(rms(lowpass(high, 3400.0), a, b) / rms(high, a, b), 0.01);
  EXPECT_NEAR(rms(bandpass(low, 300.0, 3400.0), a, b) / rms(low, a, b), 1.0, 0.02);
  EXPECT_LT(rms(bandpass(high, 300.0, 3400.0), a, b) / rms(high, a, b), 0.01);
  EXPECT_LT(rms(bandpass(deep, 300.0, 3400.0), a, b) / rms(deep, a, b), 0.05);
  // zero phase: the passband tone is not delayed
  const AudioBuffer f = lowpass(low, 3400.0);
  double err = 0.0;
  for (std::size_t i = a; i < b; ++i) err = std::max(err, std::abs(f[i] - low[i]));
  EXPECT_LT(err, 0.02);
  EXPECT_THROW(lowpass(low, 9000.0), InvalidArgument);
  EXPECT_THROW(bandpass(low, 3000.0, 1000.0), InvalidArgument);
}

TEST(Smoothing, MovingAverage) {
  std::vector<double> v(11, 0.0);
  v[5] = 1.0;
  const AudioBuffer y = smoothing(AudioBuffer(v), 5);
  for (std::size_t i = 0; i < 11; ++i) EXPECT_DOUBLE_EQ(y[i], (i >= 3 && i <= 7) ? 0.2 : 0.0) << i;
  EXPECT_THROW(smoothing(AudioBuffer(v), 0), InvalidArgument);
}

TEST(TimeShift, DelaysAndAdvances) {
  const AudioBuffer x = noise(1000, 7);
  const AudioBuffer d = time_shift(x, 10), a = time_shift(x, -10);
  for (std::size_t i = 0; i < 10; ++i) EXPECT_EQ(d[i], 0.0);
  for (std::size_t i = 10; i < 1000; ++i) EXPECT_EQ(d[i], x[i - 10]);
  for (std::size_t i = 0; i < 990; ++i) EXPECT_EQ(a[i], x[i + 10]);
  // random shifts stay within the bound
  const AttackSpec spec = AttackSpec::parse("time_shift:max_shift_ms=2");
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const AudioBuffer y = attack_apply(x, spec, seed);
    bool found = false;
    for (std::int64_t s = -32; s <= 32 && !found; ++s) found = time_shift(x, s).vec() == y.vec();
    EXPECT_TRUE(found) << seed;
  }
}

TEST(CropInvert, CutsAndFlips) {
  const AudioBuffer x = noise(10000, 8);
  const AudioBuffer y = crop_invert(x, 0.1, 3);
  EXPECT_EQ(y.size(), x.size());
  for (std::size_t i = 9000; i < 10000; ++i) EXPECT_EQ(y[i], 0.0);
  std::size_t flipped = 0;
  for (std::size_t i = 0; i < 9000; ++i) flipped += (y[i] != 0.0 && std::find(x.vec().begin(), x.vec().end(), -y[i]) != x.vec().end() && std::find(x.vec().begin(), x.vec().end(), y[i]) == x.vec().end()) ? 1 : 0;
  EXPECT_EQ(flipped, 1000u);
}

TEST(Rir, DecayAndNormalization) {
  auto drr = [](const std::vector<double>& h) {
    const std::size_t direct = 40;  // 2.5 ms
    double d = 0.0, r = 0.0;
    for (std::size_t i = 0; i < h.size(); ++i) (i < direct ? d : r) += h[i] * h[i];
    return 10.0 * std::log10(d / r);
  };
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    EXPECT_GT(drr(synth_rir(100.0, 16000, seed)), drr(synth_rir(300.0, 16000, seed)));
  }
  const AudioBuffer x = speech(9);
  const AudioBuffer y = rir_convolve(x, synth_rir(200.0, 16000, 1));
  double px = 0.0, py = 0.0;
  for (double v : x.samples()) px = std::max(px, std::abs(v));
  for (double v : y.samples()) py = std::max(py, std::abs(v));
  EXPECT_NEAR(py, px, 1e-6);
  EXPECT_EQ(y.size(), x.size());
  EXPECT_GT(rel_err(y.vec(), x.vec()), 0.05);
}

TEST(Attacks, SeedDeterminismAndLength) {
  const AudioBuffer x = speech(10, 2.0);
  for (AttackKind k : all_attack_kinds()) {
    if (k == AttackKind::kExternalCodec) continue;
    const AttackSpec spec{k, {}};
    const AudioBuffer a = attack_apply(x, spec, 42), b = attack_apply(x, spec, 42);
    EXPECT_EQ(a.vec(), b.vec()) << to_string(k);
    EXPECT_EQ(a.size(), x.size()) << to_string(k);
    EXPECT_EQ(a.sample_rate(), x.sample_rate());
  }
  EXPECT_NE(attack_apply(x, AttackSpec::parse("gaussian_noise"), 1).vec(),
            attack_apply(x, AttackSpec::parse("gaussian_noise"), 2).vec());
}

TEST(ExternalCodec, CopyCommandIsIdentity) {
  const AudioBuffer x = speech(11, 1.0);
  const CodecCommand cp{"copy", "cp {in} {out}"};
  const AudioBuffer y = external_codec_attack(x, cp);
  ASSERT_EQ(y.size(), x.size());
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(y[i], x[i], 1.0 / 32768.0);
  const AudioBuffer z = attack_apply(x, cp.as_attack(), 0);
  EXPECT_EQ(z.vec(), y.vec());
}

TEST(ExternalCodec, AdapterStyleScriptWithWorkDir) {
  // Mimics an adapter invoked as `adapter {in} {out} --codec c`: checks its
  // arguments and writes through the work dir.
  TempDir dir;
  const auto script = dir / "adapter.sh";
  {
    std::ofstream f(script);
    f << "#!/bin/sh\n"
         "[ -f \"$1\" ] || exit 3\n"
         "[ \"$3\" = --codec ] || exit 3\n"
         "echo manifest codec=$4 >&2\n"
         "cp \"$1\" \"$5/tmp.wav\" && mv \"$5/tmp.wav\" \"$2\"\n";
  }
  std::filesystem::permissions(script, std::filesystem::perms::owner_all);
  const AudioBuffer x = speech(12, 1.0);
  const CodecCommand ok{"fake", script.string() + " {in} {out} --codec fake {work}"};
  const AudioBuffer y = external_codec_attack(x, ok);
  ASSERT_EQ(y.size(), x.size());
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(y[i], x[i], 1.0 / 32768.0);

  const CodecCommand bad_args{"fake", script.string() + " {in} {out} --oops fake {work}"};
  try {
    external_codec_attack(x, bad_args);
    FAIL() << "expected ExternalError";
  } catch (const ExternalError& e) {
    EXPECT_NE(std::string(e.what()).find("status 3"), std::string::npos) << e.what();
  }
}

TEST(ExternalCodec, OutputLengthIsRefit) {
  EXPECT_EQ(refit_length({1.0, 2.0, 3.0}, 2), (std::vector<double>{1.0, 2.0}));
  EXPECT_EQ(refit_length({1.0}, 3), (std::vector<double>{1.0, 0.0, 0.0}));
  if (!have("python3")) GTEST_SKIP() << "python3 not installed";
  const AudioBuffer x = speech(17, 1.0);
  // keeps the first 4000 frames
  const CodecCommand cut{"cut",
                         "python3 -c 'import sys, wave; r = wave.open(sys.argv[1]); w = wave.open(sys.argv[2], \"wb\"); "
                         "w.setparams(r.getparams()); w.writeframes(r.readframes(4000)); w.close()' {in} {out}"};
  const AudioBuffer y = external_codec_attack(x, cut);
  ASSERT_EQ(y.size(), x.size());
  for (std::size_t i = 0; i < 4000; ++i) EXPECT_NEAR(y[i], x[i], 1.0 / 32768.0);
  for (std::size_t i = 4000; i < y.size(); ++i) EXPECT_EQ(y[i], 0.0);
}

TEST(ExternalCodec, FailuresAreStructured) {
  const AudioBuffer x = speech(13, 1.0);
  try {
    external_codec_attack(x, {"fail", "echo broken >&2; exit 1 # {in} {out}"});
    FAIL() << "expected ExternalError";
  } catch (const ExternalError& e) {
    EXPECT_NE(e.diagnostics().find("broken"), std::string::npos);
  }
  EXPECT_THROW(external_codec_attack(x, {"noout", "true {in} {out}"}), ExternalError);
  EXPECT_THROW(external_codec_attack(x, {"junk", "echo junk > {out} # {in}"}), ExternalError);
  EXPECT_THROW(external_codec_attack(x, {"missing", "/nonexistent/codec {in} {out}"}), ExternalError);
  EXPECT_THROW(external_codec_attack(x, {"noplace", "cp a b"}), InvalidArgument);
}

TEST(ExternalCodec, TimeoutKillsTheCommand) {
  const AudioBuffer x = speech(14, 1.0);
  ExternalOptions opt;
  opt.timeout = std::chrono::seconds(1);
  const auto t0 = std::chrono::steady_clock::now();
  EXPECT_THROW(external_codec_attack(x, {"slow", "sleep 10; cp {in} {out}"}, opt), ExternalError);
  EXPECT_LT(std::chrono::steady_clock::now() - t0, std::chrono::seconds(5));
}

TEST(ExternalCodec, ProcessCapSerializesRuns) {
  const AudioBuffer x = speech(15, 1.0);
  set_external_process_cap(1);
  const CodecCommand slow{"slow", "sleep 0.4; cp {in} {out}"};
  const auto t0 = std::chrono::steady_clock::now();
  std::thread a([&] { external_codec_attack(x, slow); });
  std::thread b([&] { external_codec_attack(x, slow); });
  a.join();
  b.join();
  EXPECT_GE(std::chrono::steady_clock::now() - t0, std::chrono::milliseconds(790));
  set_external_process_cap(4);
}

TEST(ExternalCodec, Mp3RoundTrip) {
  if (!have("ffmpeg")) GTEST_SKIP() << "ffmpeg not installed";
  const AudioBuffer x = add_noise(speech(16), 30.0, true, 1);
  const CodecCommand mp3{"mp3",
                         "ffmpeg -nostdin -loglevel error -y -i {in} -codec:a libmp3lame -b:a 64k {work}/a.mp3 && "
                         "ffmpeg -nostdin -loglevel error -y -i {work}/a.mp3 -ar 16000 -ac 1 -c:a pcm_s16le {out}"};
  const AudioBuffer y = external_codec_attack(x, mp3);
  // codec delay is not compensated, so compare energy rather than sample error
  EXPECT_TRUE(std::isfinite(snr_db(x, y)));
  auto high = [](const AudioBuffer& s) {
    const auto spec = rfft(s.samples());
    double e = 0.0;
    for (std::size_t k = spec.size() * 7 / 8; k < spec.size(); ++k) e += std::norm(spec[k]);
    return e;
  };
  EXPECT_LT(high(y), 0.5 * high(x));
}

}  // namespace
}  // namespace wavemux
