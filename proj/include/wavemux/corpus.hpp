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


#ifndef WAVEMUX_CORPUS_HPP_
#define WAVEMUX_CORPUS_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "wavemux/audio.hpp"

namespace wavemux {

struct Utterance {
  std::string id;
  AudioBuffer audio;
};

// RMS of a -26 dBFS speech level.
inline constexpr double kDefaultLevelDbfs = -26.0;

// Scales x to the given RMS level in dBFS. Silent input is returned as is.
AudioBuffer normalize_level(const AudioBuffer& x, double level_dbfs);

// WAV files (*.wav, case-insensitive) directly in dir, lexicographic by file
// name, at most cap of them. Every file must be mono at sample_rate.
std::vector<Utterance> ingest_dataset(const std::filesystem::path& dir, std::size_t cap,
                                      int sample_rate = kDefaultSampleRate);

// Speech-like signal: syllables of a glottal pulse train through moving
// formant resonators, fricative noise bursts and short pauses over a faint
// noise floor, at -26 dBFS RMS.
AudioBuffer synth_utterance(std::uint64_t seed, double seconds, int sample_rate = kDefaultSampleRate);

std::vector<Utterance> synth_corpus(std::size_t n, std::uint64_t seed, double seconds,
                                    int sample_rate = kDefaultSampleRate);

}  // namespace wavemux

#endif  // WAVEMUX_CORPUS_HPP_
