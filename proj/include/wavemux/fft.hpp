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

#ifndef WAVEMUX_FFT_HPP_
#define WAVEMUX_FFT_HPP_

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace wavemux {

using Complex = std::complex<double>;

// Real-input DFT of any length n. `out` must hold n / 2 + 1 bins.
// Unnormalized: out[k] = sum_n in[n] exp(-2 pi i k n / N).
void rfft(std::span<const double> in, std::span<Complex> out);

// Inverse of rfft including the 1/N factor. `in` holds n / 2 + 1 bins.
void irfft(std::span<const Complex> in, std::span<double> out);

std::vector<Complex> rfft(std::span<const double> in);
std::vector<double> irfft(std::span<const Complex> in, std::size_t n);

// Linear convolution via FFT; result has a.size() + b.size() - 1 samples.
std::vector<double> fft_convolve(std::span<const double> a, std::span<const double> b);

std::size_t next_pow2(std::size_t n);

}  // namespace wavemux

#endif  // WAVEMUX_FFT_HPP_
