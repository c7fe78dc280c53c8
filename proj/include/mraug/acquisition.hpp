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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "mraug/fourier.hpp"
#include "mraug/grid.hpp"
#include "mraug/random.hpp"

// Measurement physics: coil modulation, complex Gaussian noise, Cartesian
// column masks, the masked Fourier operator and its adjoint, and the
// root-sum-of-squares magnitude combination.

namespace mraug {

/// Complex coil sensitivities S_i, expected to satisfy sum_j conj(S_j) S_j = 1.
class SensitivityMaps {
 public:
  SensitivityMaps() = default;
  explicit SensitivityMaps(std::vector<ComplexGrid> maps) : maps_(std::move(maps)) {
    if (maps_.empty()) throw DomainError("sensitivity maps: need at least one coil");
    for (const auto& m : maps_) detail::require_same_shape(m.shape(), shape(), "sensitivity maps");
  }

  std::size_t coils() const { return maps_.size(); }
  GridShape shape() const { return maps_.front().shape(); }
  const ComplexGrid& operator[](std::size_t i) const { return maps_[i]; }
  const std::vector<ComplexGrid>& maps() const { return maps_; }

  /// Largest pixelwise deviation of sum_j |S_j|^2 from one.
  double normalization_error() const {
    double worst = 0.0;
    for (std::size_t p = 0; p < shape().size(); ++p) {
      double acc = 0.0;
      for (const auto& m : maps_) acc += std::norm(m[p]);
      worst = std::max(worst, std::abs(acc - 1.0));
    }
    return worst;
  }

  SensitivityMaps cropped(GridShape out) const {
    std::vector<ComplexGrid> c;
    c.reserve(maps_.size());
    for (const auto& m : maps_) c.push_back(center_crop(m, out));
    return SensitivityMaps(std::move(c));
  }

 private:
  std::vector<ComplexGrid> maps_;
};

struct NoiseModel {
  double sigma = 0.0;  ///< per-component standard deviation
};

/// Binary selector over k-space columns (the phase-encoding direction).
struct UndersamplingMask {
  std::vector<std::uint8_t> selected;
  unsigned acceleration = 1;
  double center_fraction = 0.0;
  std::size_t center_lines = 0;
  std::uint64_t seed = 0;  ///< seed the random lines were drawn from, 0 for fixed masks

  std::size_t width() const { return selected.size(); }
  std::size_t selected_count() const {
    return static_cast<std::size_t>(std::count(selected.begin(), selected.end(), 1));
  }
  bool operator[](std::size_t col) const { return selected[col] != 0; }
  friend bool operator==(const UndersamplingMask&, const UndersamplingMask&) = default;
};

/// Round-half-up of width * center_fraction.
inline std::size_t center_line_count(std::size_t width, double center_fraction) {
  return static_cast<std::size_t>(std::floor(static_cast<double>(width) * center_fraction + 0.5));
}

/// First column of the always-sampled block, which straddles the DC column.
inline std::size_t center_block_start(std::size_t width, std::size_t center_lines) {
  return (width - center_lines + 1) / 2;
}

/// Probability with which each non-center column is drawn so that the
/// expected number of selected columns is width / R.
inline double line_probability(std::size_t width, unsigned acceleration, std::size_t center_lines) {
  if (center_lines >= width) return 0.0;
  const double budget = static_cast<double>(width) / acceleration;
  return (budget - static_cast<double>(center_lines)) / static_cast<double>(width - center_lines);
}

inline UndersamplingMask make_full_mask(std::size_t width) {
  UndersamplingMask m;
  m.selected.assign(width, 1);
  m.acceleration = 1;
  m.center_fraction = 1.0;
  m.center_lines = width;
  return m;
}

inline UndersamplingMask make_random_mask(std::size_t width, unsigned acceleration,
                                          double center_fraction, Rng& rng) {
  if (width == 0) throw DomainError("mask width must be positive");
  if (acceleration < 1) throw DomainError("acceleration must be >= 1");
  if (!(center_fraction > 0.0 && center_fraction < 1.0)) {
    throw DomainError("center_fraction must lie in (0, 1)");
  }
  const std::size_t n_center = center_line_count(width, center_fraction);
  if (static_cast<double>(n_center) * acceleration > static_cast<double>(width)) {
    throw DomainError("infeasible mask: " + std::to_string(n_center) +
                      " center lines exceed the budget width/R = " +
                      std::to_string(static_cast<double>(width) / acceleration));
  }
  UndersamplingMask m;
  m.acceleration = acceleration;
  m.center_fraction = center_fraction;
  m.center_lines = n_center;
  m.selected.assign(width, 0);
  const std::size_t start = center_block_start(width, n_center);
  for (std::size_t c = start; c < start + n_center; ++c) m.selected[c] = 1;
  const double p_line = line_probability(width, acceleration, n_center);
  for (std::size_t c = 0; c < width; ++c) {
    if (m.selected[c]) continue;
    if (uniform01(rng) < p_line) m.selected[c] = 1;
  }
  return m;
}

/// Random mask from an explicit seed; the seed is recorded in the mask.
inline UndersamplingMask make_random_mask(std::size_t width, unsigned acceleration,
                                          double center_fraction, std::uint64_t seed) {
  Rng rng(seed);
  auto m = make_random_mask(width, acceleration, center_fraction, rng);
  m.seed = seed;
  return m;
}

/// Fixed validation mask shared by every slice of one volume.
inline std::uint64_t volume_mask_seed(std::uint64_t seed, std::uint64_t volume) {
  return derive_seed({seed, static_cast<std::uint64_t>(Stream::kVolumeMask), volume});
}

inline UndersamplingMask make_volume_mask(std::size_t width, unsigned acceleration,
                                          double center_fraction, std::uint64_t seed,
                                          std::uint64_t volume) {
  return make_random_mask(width, acceleration, center_fraction, volume_mask_seed(seed, volume));
}

inline CoilStack apply_sensitivities(const ComplexGrid& object, const SensitivityMaps& maps) {
  detail::require_same_shape(object.shape(), maps.shape(), "apply_sensitivities");
  std::vector<ComplexGrid> coils;
  coils.reserve(maps.coils());
  for (const auto& s : maps.maps()) {
    ComplexGrid c(object.shape());
    for (std::size_t p = 0; p < c.size(); ++p) c[p] = s[p] * object[p];
    coils.push_back(std::move(c));
  }
  return CoilStack(std::move(coils));
}

/// sum_j conj(S_j) x_j, the object estimate under normalized maps.
inline ComplexGrid coil_combine(const CoilStack& coils, const SensitivityMaps& maps) {
  if (coils.coils() != maps.coils()) throw ShapeError("coil_combine: coil count mismatch");
  detail::require_same_shape(coils.shape(), maps.shape(), "coil_combine");
  ComplexGrid out(coils.shape());
  for (std::size_t i = 0; i < coils.coils(); ++i) {
    for (std::size_t p = 0; p < out.size(); ++p) out[p] += std::conj(maps[i][p]) * coils[i][p];
  }
  return out;
}

/// Adds independent N(0, sigma^2) to the real and imaginary part of every
/// sample, coil by coil, in row-major order.
inline CoilStack add_noise(const CoilStack& coils, NoiseModel noise, Rng& rng) {
  if (noise.sigma < 0.0) throw DomainError("noise sigma must be non-negative");
  if (noise.sigma == 0.0) return coils;
  std::normal_distribution<double> normal(0.0, noise.sigma);
  CoilStack out = coils;
  for (auto& g : out) {
    for (auto& v : g) {
      const double re = normal(rng);
      const double im = normal(rng);
      v += cplx(re, im);
    }
  }
  return out;
}

inline ComplexGrid apply_mask(const ComplexGrid& k, const UndersamplingMask& m) {
  if (k.width() != m.width()) {
    throw ShapeError("apply_mask: k-space width " + std::to_string(k.width()) +
                     " vs mask width " + std::to_string(m.width()));
  }
  ComplexGrid out = k;
  for (std::size_t r = 0; r < k.height(); ++r) {
    for (std::size_t c = 0; c < k.width(); ++c) {
      if (!m[c]) out(r, c) = cplx{};
    }
  }
  return out;
}

inline CoilStack apply_mask(const CoilStack& k, const UndersamplingMask& m) {
  std::vector<ComplexGrid> out;
  out.reserve(k.coils());
  for (const auto& g : k) out.push_back(apply_mask(g, m));
  return CoilStack(std::move(out));
}

/// A(x): coil-wise centered FFT followed by the column mask.
inline CoilStack forward(const CoilStack& x, const UndersamplingMask& m) {
  std::vector<ComplexGrid> out;
  out.reserve(x.coils());
  for (const auto& g : x) out.push_back(apply_mask(fft2c(g), m));
  return CoilStack(std::move(out));
}

/// A^H(k): mask then coil-wise inverse centered FFT.
inline CoilStack adjoint(const CoilStack& k, const UndersamplingMask& m) {
  std::vector<ComplexGrid> out;
  out.reserve(k.coils());
  for (const auto& g : k) out.push_back(ifft2c(apply_mask(g, m)));
  return CoilStack(std::move(out));
}

inline RealGrid rss(const CoilStack& coils) {
  if (coils.coils() == 0) throw DomainError("rss: empty coil stack");
  RealGrid out(coils.shape());
  for (const auto& g : coils) {
    for (std::size_t p = 0; p < out.size(); ++p) out[p] += std::norm(g[p]);
  }
  for (auto& v : out) v = std::sqrt(v);
  return out;
}

}  // namespace mraug
