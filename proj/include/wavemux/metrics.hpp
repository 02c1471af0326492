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


#ifndef WAVEMUX_METRICS_HPP_
#define WAVEMUX_METRICS_HPP_

#include <cstddef>
#include <span>
#include <vector>

#include "wavemux/audio.hpp"

namespace wavemux {

// 10 log10(|ref|^2 / |ref - test|^2); +infinity when the signals are equal.
double snr_db(const AudioBuffer& ref, const AudioBuffer& test);

// Short-time objective intelligibility of `test` against the clean `ref`,
// clamped to [0, 1]. Both are resampled to 10 kHz and frames more than 40 dB
// below the loudest reference frame are dropped first; at least 30 frames
// (384 ms) must remain.
double stoi(const AudioBuffer& ref, const AudioBuffer& test);

// Polyphase resampling by up/down with a Kaiser-windowed (beta 5) sinc
// lowpass of half-length 10 * max(up, down), zero-phase aligned.
std::vector<double> resample_poly(std::span<const double> x, std::size_t up, std::size_t down);

// Mann-Whitney U / (|pos| |neg|), ties counting one half.
double roc_auc(std::span<const double> pos, std::span<const double> neg);

// Threshold convention shared by tpr_at_fpr and calibrate_threshold: with
// k = floor(fpr * |neg|), the threshold is the smallest negative score v for
// which #{neg >= v} <= k. If no negative qualifies (k = 0, or ties at the top
// exceed k), it is the next double above the largest negative. A score s is
// called positive when s >= threshold.
double threshold_at_fpr(std::span<const double> neg, double fpr);

// Fraction of pos at or above threshold_at_fpr(neg, fpr). Requires 0 < fpr < 1.
double tpr_at_fpr(std::span<const double> pos, std::span<const double> neg, double fpr);

// threshold_at_fpr, additionally requiring |neg| >= 1 / target_fpr.
double calibrate_threshold(std::span<const double> neg, double target_fpr);

// Fraction of scores at or above the threshold.
double fraction_at_or_above(std::span<const double> scores, double threshold);

}  // namespace wavemux

#endif  // WAVEMUX_METRICS_HPP_
