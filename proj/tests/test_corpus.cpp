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

#include <cmath>

#include <gtest/gtest.h>

#include "test_util.hpp"
#include "wavemux/corpus.hpp"
#include "wavemux/errors.hpp"

namespace wavemux {
namespace {

using testing::noise;
using testing::TempDir;

double rms_dbfs(const AudioBuffer& x) {
  return 10.0 * std::log10(energy(x.samples()) / static_cast<double>(x.size()));
}

TEST(Ingest, LexicographicOrderAndCap) {
  TempDir dir;
  save_wav(noise(1600, 1), dir / "b.wav");
  save_wav(noise(1600, 2), dir / "a.WAV");
  save_wav(noise(1600, 3), dir / "c.wav");
  save_wav(noise(1600, 4), dir / "notes.txt");
  const auto two = ingest_dataset(dir.path(), 2);
  ASSERT_EQ(two.size(), 2u);
  EXPECT_EQ(two[0].id, "a");
  EXPECT_EQ(two[1].id, "b");
  const auto all = ingest_dataset(dir.path(), 10);
  ASSERT_EQ(all.size(), 3u);
  EXPECT_EQ(all[2].id, "c");
  const auto again = ingest_dataset(dir.path(), 10);
  for (std::size_t i = 0; i < all.size(); ++i) {
    EXPECT_EQ(all[i].id, again[i].id);
    EXPECT_EQ(all[i].audio.vec(), again[i].audio.vec());
  }
}

TEST(Ingest, WrongRateNamesTheFile) {
  TempDir dir;
  save_wav(noise(1600, 1), dir / "ok.wav");
  save_wav(AudioBuffer(testing::gaussian(800, 2), 8000), dir / "slow.wav");
  try {
    ingest_dataset(dir.path(), 10);
    FAIL() << "expected an error";
  } catch (const IoError& e) {
    EXPECT_NE(std::string(e.what()).find("slow.wav"), std::string::npos) << e.what();
  }
}

TEST(Ingest, EmptyOrMissingDir) {
  TempDir dir;
  EXPECT_THROW(ingest_dataset(dir.path(), 10), IoError);
  EXPECT_THROW(ingest_dataset(dir / "nope", 10), IoError);
}

TEST(Synth, DeterministicAndDistinct) {
  const AudioBuffer a = synth_utterance(3, 2.0), b = synth_utterance(3, 2.0), c = synth_utterance(4, 2.0);
  EXPECT_EQ(a.vec(), b.vec());
  EXPECT_NE(a.vec(), c.vec());
  EXPECT_EQ(a.size(), 32000u);
  EXPECT_EQ(a.sample_rate(), 16000);
  EXPECT_NEAR(rms_dbfs(a), kDefaultLevelDbfs, 0.5);
  for (double v : a.samples()) EXPECT_LE(std::abs(v), 1.0);
  const auto corpus = synth_corpus(3, 9, 1.0);
  ASSERT_EQ(corpus.size(), 3u);
  EXPECT_NE(corpus[0].id, corpus[1].id);
  EXPECT_NE(corpus[0].audio.vec(), corpus[1].audio.vec());
  EXPECT_THROW(synth_utterance(1, 0.0), InvalidArgument);
}

TEST(Synth, SpeechLikeEnvelope) {
  // pauses and syllables: frame energies spread over a wide range
  const AudioBuffer x = synth_utterance(5, 3.0);
  std::vector<double> db;
  for (std::size_t i = 0; i + 320 <= x.size(); i += 320) {
    double e = 0.0;
    for (std::size_t j = i; j < i + 320; ++j) e += x[j] * x[j];
    db.push_back(10.0 * std::log10(e / 320.0 + 1e-20));
  }
  std::sort(db.begin(), db.end());
  EXPECT_GT(db[db.size() * 9 / 10] - db[db.size() / 10], 10.0);
}

TEST(Level, NormalizeHitsTarget) {
  const AudioBuffer x = noise(16000, 6, 0.3);
  EXPECT_NEAR(rms_dbfs(normalize_level(x, -30.0)), -30.0, 1e-9);
  const AudioBuffer silent(std::vector<double>(100, 0.0));
  EXPECT_EQ(normalize_level(silent, -20.0).vec(), silent.vec());
}

}  // namespace
}  // namespace wavemux
