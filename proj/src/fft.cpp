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

#include "wavemux/fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cstring>
#include <map>
#include <mutex>
#include <utility>

#include "wavemux/errors.hpp"

namespace wavemux {

namespace {

// FFTW planning is not thread-safe; execution with the new-array interface
// is. Plans are created once per (size, direction) under a lock and buffers
// come from fftw_malloc so that alignment matches the plan.
struct Plans {
  std::mutex mu;
  std::map<std::pair<std::size_t, bool>, fftw_plan> plans;

  fftw_plan get(std::size_t n, bool forward) {
    std::lock_guard lock(mu);
    auto it = plans.find({n, forward});
    if (it != plans.end()) return it->second;
    double* r = fftw_alloc_real(n);
    fftw_complex* c = fftw_alloc_complex(n / 2 + 1);
    const int ni = static_cast<int>(n);
    fftw_plan p = forward ? fftw_plan_dft_r2c_1d(ni, r, c, FFTW_ESTIMATE)
                          : fftw_plan_dft_c2r_1d(ni, c, r, FFTW_ESTIMATE);
    fftw_free(r);
    fftw_free(c);
    plans.emplace(std::make_pair(n, forward), p);
    return p;
  }
};

Plans& plans() {
  static Plans* p = new Plans();
  return *p;
}

struct Scratch {
  std::size_t n = 0;
  double* real = nullptr;
  fftw_complex* spec = nullptr;

  void ensure(std::size_t size) {
    if (size == n) return;
    release();
    n = size;
    real = fftw_alloc_real(n);
    spec = fftw_alloc_complex(n / 2 + 1);
  }
  void release() {
    if (real) fftw_free(real);
    if (spec) fftw_free(spec);
    real = nullptr;
    spec = nullptr;
  }
  ~Scratch() { release(); }
};

Scratch& scratch() {
  thread_local Scratch s;
  return s;
}

}  // namespace

void rfft(std::span<const double> in, std::span<Complex> out) {
  const std::size_t n = in.size();
  if (n == 0 || out.size() != n / 2 + 1) throw InvalidArgument("rfft: size mismatch");
  Scratch& s = scratch();
  s.ensure(n);
  std::copy(in.begin(), in.end(), s.real);
  fftw_execute_dft_r2c(plans().get(n, true), s.real, s.spec);
  std::memcpy(static_cast<void*>(out.data()), s.spec, out.size() * sizeof(Complex));
}

void irfft(std::span<const Complex> in, std::span<double> out) {
  const std::size_t n = out.size();
  if (n == 0 || in.size() != n / 2 + 1) throw InvalidArgument("irfft: size mismatch");
  Scratch& s = scratch();
  s.ensure(n);
  std::memcpy(s.spec, in.data(), in.size() * sizeof(Complex));
  // c2r ignores the imaginary parts of DC and Nyquist; it also destroys its input.
  fftw_execute_dft_c2r(plans().get(n, false), s.spec, s.real);
  const double scale = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = s.real[i] * scale;
}

std::vector<Complex> rfft(std::span<const double> in) {
  std::vector<Complex> out(in.size() / 2 + 1);
  rfft(in, out);
  return out;
}

std::vector<double> irfft(std::span<const Complex> in, std::size_t n) {
  std::vector<double> out(n);
  irfft(in, out);
  return out;
}

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

std::vector<double> fft_convolve(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw InvalidArgument("fft_convolve: empty input");
  const std::size_t out_len = a.size() + b.size() - 1;
  const std::size_t n = next_pow2(out_len);
  std::vector<double> pa(n, 0.0), pb(n, 0.0);
  std::copy(a.begin(), a.end(), pa.begin());
  std::copy(b.begin(), b.end(), pb.begin());
  auto fa = rfft(pa);
  const auto fb = rfft(pb);
  for (std::size_t k = 0; k < fa.size(); ++k) fa[k] *= fb[k];
  auto y = irfft(fa, n);
  y.resize(out_len);
  return y;
}

}  // namespace wavemux
