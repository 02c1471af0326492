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

#ifndef WAVEMUX_SRC_CELL_PROJECTION_HPP_
#define WAVEMUX_SRC_CELL_PROJECTION_HPP_

#include <cstddef>
#include <vector>

#include "wavemux/audio.hpp"
#include "wavemux/stft.hpp"

namespace wavemux::detail {

// Alternates between forcing selected STFT cells onto their targets and
// re-synthesizing, until the re-analyzed cells are within `tol` of the
// targets (as reported by `project`) or `iterations` runs out. `project`
// receives the analysis of the current signal, overwrites the selected cells
// and returns the largest deviation it saw before writing. Returns the
// accumulated time-domain change relative to x.
template <typename Project>
std::vector<double> project_cells(const AudioBuffer& x, const StftConfig& cfg,
                                  std::size_t iterations, double tol, Project&& project) {
  AudioBuffer y = x;
  for (std::size_t it = 0; it < iterations; ++it) {
    Spectrogram spec = stft(y, cfg);
    if (project(spec) <= tol) break;
    y = istft(spec);
  }
  std::vector<double> delta(x.size());
  for (std::size_t i = 0; i < delta.size(); ++i) delta[i] = y[i] - x[i];
  return delta;
}

}  // namespace wavemux::detail

#endif  // WAVEMUX_SRC_CELL_PROJECTION_HPP_
