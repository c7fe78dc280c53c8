// Copyright 2026 The mraug Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <fftw3.h>

#include <cmath>
#include <cstring>
#include <map>
#include <memory>
#include <mutex>
#include <tuple>

#include "mraug/grid.hpp"

// Centered orthonormal 2D DFT. DC sits at (height/2, width/2) on both sides of
// the transform and both directions carry 1/sqrt(height*width), so fft2c is
// unitary and ifft2c is its exact inverse.

namespace mraug {

namespace detail {

struct FftwFree {
  void operator()(fftw_complex* p) const { fftw_free(p); }
};
using FftwBuffer = std::unique_ptr<fftw_complex[], FftwFree>;

inline FftwBuffer fftw_buffer(std::size_t n) {
  auto* p = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * (n == 0 ? 1 : n)));
  if (p == nullptr) throw std::bad_alloc();
  return FftwBuffer(p);
}

// FFTW planning is not thread-safe; execution of an existing plan on fresh
// (equally aligned) buffers is. Plans are created once per (shape, sign) and
// never mutated afterwards.
class PlanCache {
 public:
  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  fftw_plan get(std::size_t h, std::size_t w, int sign) {
    std::lock_guard lock(mutex_);
    auto key = std::make_tuple(h, w, sign);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    auto scratch = fftw_buffer(h * w);
    fftw_plan plan = fftw_plan_dft_2d(static_cast<int>(h), static_cast<int>(w), scratch.get(),
                                      scratch.get(), sign, FFTW_ESTIMATE);
    plans_.emplace(key, plan);
    return plan;
  }

 private:
  std::mutex mutex_;
  std::map<std::tuple<std::size_t, std::size_t, int>, fftw_plan> plans_;
};

inline PlanCache& plan_cache() {
  static PlanCache cache;
  return cache;
}

// Element at index i moves to (i + shift) mod n.
inline ComplexGrid circular_shift(const ComplexGrid& g, std::size_t row_shift,
                                  std::size_t col_shift) {
  const std::size_t h = g.height();
  const std::size_t w = g.width();
  ComplexGrid out(g.shape());
  for (std::size_t r = 0; r < h; ++r) {
    const std::size_t rr = (r + row_shift) % h;
    for (std::size_t c = 0; c < w; ++c) {
      out(rr, (c + col_shift) % w) = g(r, c);
    }
  }
  return out;
}

inline ComplexGrid transform(const ComplexGrid& in, int sign) {
  const std::size_t h = in.height();
  const std::size_t w = in.width();
  if (in.empty()) return in;
  fftw_plan plan = plan_cache().get(h, w, sign);
  auto buf = fftw_buffer(h * w);
  std::memcpy(buf.get(), in.values().data(), sizeof(fftw_complex) * h * w);
  fftw_execute_dft(plan, buf.get(), buf.get());
  const double norm = 1.0 / std::sqrt(static_cast<double>(h * w));
  ComplexGrid out(in.shape());
  for (std::size_t i = 0; i < h * w; ++i) {
    out[i] = cplx(buf[i][0] * norm, buf[i][1] * norm);
  }
  return out;
}

}  // namespace detail

/// DC moves from index 0 to index n/2 (floor) on each axis.
inline ComplexGrid fftshift(const ComplexGrid& g) {
  return detail::circular_shift(g, g.height() / 2, g.width() / 2);
}

/// Exact inverse of fftshift, including odd lengths.
inline ComplexGrid ifftshift(const ComplexGrid& g) {
  return detail::circular_shift(g, (g.height() + 1) / 2, (g.width() + 1) / 2);
}

inline ComplexGrid fft2c(const ComplexGrid& img) {
  return fftshift(detail::transform(ifftshift(img), FFTW_FORWARD));
}

inline ComplexGrid ifft2c(const ComplexGrid& k) {
  return fftshift(detail::transform(ifftshift(k), FFTW_BACKWARD));
}

inline CoilStack fft2c(const CoilStack& s) {
  std::vector<ComplexGrid> out;
  out.reserve(s.coils());
  for (const auto& g : s) out.push_back(fft2c(g));
  return CoilStack(std::move(out));
}

inline CoilStack ifft2c(const CoilStack& s) {
  std::vector<ComplexGrid> out;
  out.reserve(s.coils());
  for (const auto& g : s) out.push_back(ifft2c(g));
  return CoilStack(std::move(out));
}

}  // namespace mraug
