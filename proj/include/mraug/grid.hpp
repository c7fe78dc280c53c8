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

#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace mraug {

using cplx = std::complex<double>;

/// Raised when operand dimensions do not agree.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a scalar parameter lies outside its admissible domain.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct GridShape {
  std::size_t height = 0;
  std::size_t width = 0;

  constexpr std::size_t size() const { return height * width; }
  constexpr bool square() const { return height == width; }
  friend constexpr bool operator==(GridShape, GridShape) = default;
};

inline std::string to_string(GridShape s) {
  return std::to_string(s.height) + "x" + std::to_string(s.width);
}

/// Row-major 2D array. Complex samples are stored as std::complex, which is
/// layout-compatible with interleaved (re, im) pairs.
template <typename T>
class Grid {
 public:
  using value_type = T;

  Grid() = default;
  Grid(std::size_t height, std::size_t width, T fill = T{})
      : height_(height), width_(width), data_(height * width, fill) {}
  Grid(GridShape shape, T fill = T{}) : Grid(shape.height, shape.width, fill) {}
  Grid(std::size_t height, std::size_t width, std::vector<T> data)
      : height_(height), width_(width), data_(std::move(data)) {
    if (data_.size() != height_ * width_) {
      throw ShapeError("grid data length " + std::to_string(data_.size()) +
                       " does not match " + std::to_string(height_) + "x" +
                       std::to_string(width_));
    }
  }

  std::size_t height() const { return height_; }
  std::size_t width() const { return width_; }
  std::size_t size() const { return data_.size(); }
  GridShape shape() const { return {height_, width_}; }
  bool empty() const { return data_.empty(); }

  T& operator()(std::size_t row, std::size_t col) { return data_[row * width_ + col]; }
  const T& operator()(std::size_t row, std::size_t col) const {
    return data_[row * width_ + col];
  }
  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  std::span<T> values() { return data_; }
  std::span<const T> values() const { return data_; }
  std::vector<T>& storage() { return data_; }
  const std::vector<T>& storage() const { return data_; }

  auto begin() { return data_.begin(); }
  auto end() { return data_.end(); }
  auto begin() const { return data_.begin(); }
  auto end() const { return data_.end(); }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::vector<T> data_;
};

using ComplexGrid = Grid<cplx>;
using RealGrid = Grid<double>;

/// Per-coil grids sharing one shape. Coil order is significant.
class CoilStack {
 public:
  CoilStack() = default;
  explicit CoilStack(std::vector<ComplexGrid> coils) : coils_(std::move(coils)) {
    for (const auto& g : coils_) {
      if (g.shape() != coils_.front().shape()) {
        throw ShapeError("coil grids differ in shape: " + to_string(g.shape()) + " vs " +
                         to_string(coils_.front().shape()));
      }
    }
  }
  CoilStack(std::size_t coils, GridShape shape) : coils_(coils, ComplexGrid(shape)) {}

  std::size_t coils() const { return coils_.size(); }
  GridShape shape() const { return coils_.empty() ? GridShape{} : coils_.front().shape(); }

  ComplexGrid& operator[](std::size_t i) { return coils_[i]; }
  const ComplexGrid& operator[](std::size_t i) const { return coils_[i]; }

  auto begin() { return coils_.begin(); }
  auto end() { return coils_.end(); }
  auto begin() const { return coils_.begin(); }
  auto end() const { return coils_.end(); }

  const std::vector<ComplexGrid>& grids() const { return coils_; }

  friend bool operator==(const CoilStack&, const CoilStack&) = default;

 private:
  std::vector<ComplexGrid> coils_;
};

namespace detail {

inline void require_same_shape(GridShape a, GridShape b, const char* what) {
  if (a != b) {
    throw ShapeError(std::string(what) + ": shape mismatch " + to_string(a) + " vs " +
                     to_string(b));
  }
}

inline double norm_sq(double v) { return v * v; }
inline double norm_sq(const cplx& v) { return std::norm(v); }

}  // namespace detail

/// Centered out_h x out_w window. The start offset on each axis is
/// floor((in - out) / 2), so an odd margin loses its extra line at the
/// bottom/right.
template <typename T>
Grid<T> center_crop(const Grid<T>& g, std::size_t out_h, std::size_t out_w) {
  if (out_h == 0 || out_w == 0) {
    throw ShapeError("center_crop: target size must be positive");
  }
  if (out_h > g.height() || out_w > g.width()) {
    throw ShapeError("center_crop: target " + std::to_string(out_h) + "x" +
                     std::to_string(out_w) + " exceeds input " + to_string(g.shape()));
  }
  const std::size_t r0 = (g.height() - out_h) / 2;
  const std::size_t c0 = (g.width() - out_w) / 2;
  Grid<T> out(out_h, out_w);
  for (std::size_t r = 0; r < out_h; ++r) {
    for (std::size_t c = 0; c < out_w; ++c) {
      out(r, c) = g(r0 + r, c0 + c);
    }
  }
  return out;
}

template <typename T>
Grid<T> center_crop(const Grid<T>& g, GridShape out) {
  return center_crop(g, out.height, out.width);
}

inline CoilStack center_crop(const CoilStack& s, GridShape out) {
  std::vector<ComplexGrid> coils;
  coils.reserve(s.coils());
  for (const auto& g : s) coils.push_back(center_crop(g, out));
  return CoilStack(std::move(coils));
}

template <typename T>
double l2_norm_sq(const Grid<T>& g) {
  double acc = 0.0;
  for (const auto& v : g) acc += detail::norm_sq(v);
  return acc;
}

template <typename T>
double l2_norm(const Grid<T>& g) {
  return std::sqrt(l2_norm_sq(g));
}

inline double l2_norm(const CoilStack& s) {
  double acc = 0.0;
  for (const auto& g : s) acc += l2_norm_sq(g);
  return std::sqrt(acc);
}

template <typename T>
Grid<T> add(const Grid<T>& a, const Grid<T>& b) {
  detail::require_same_shape(a.shape(), b.shape(), "add");
  Grid<T> out(a.shape());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
  return out;
}

template <typename T>
Grid<T> subtract(const Grid<T>& a, const Grid<T>& b) {
  detail::require_same_shape(a.shape(), b.shape(), "subtract");
  Grid<T> out(a.shape());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

template <typename T, typename S>
Grid<T> scale(const Grid<T>& g, S factor) {
  Grid<T> out(g.shape());
  for (std::size_t i = 0; i < g.size(); ++i) out[i] = g[i] * static_cast<T>(factor);
  return out;
}

inline RealGrid elementwise_abs(const ComplexGrid& g) {
  RealGrid out(g.shape());
  for (std::size_t i = 0; i < g.size(); ++i) out[i] = std::abs(g[i]);
  return out;
}

inline RealGrid elementwise_abs(const RealGrid& g) {
  RealGrid out(g.shape());
  for (std::size_t i = 0; i < g.size(); ++i) out[i] = std::abs(g[i]);
  return out;
}

inline ComplexGrid to_complex(const RealGrid& g) {
  ComplexGrid out(g.shape());
  for (std::size_t i = 0; i < g.size(); ++i) out[i] = cplx(g[i], 0.0);
  return out;
}

inline CoilStack add(const CoilStack& a, const CoilStack& b) {
  if (a.coils() != b.coils()) throw ShapeError("add: coil count mismatch");
  std::vector<ComplexGrid> out;
  out.reserve(a.coils());
  for (std::size_t i = 0; i < a.coils(); ++i) out.push_back(add(a[i], b[i]));
  return CoilStack(std::move(out));
}

inline CoilStack subtract(const CoilStack& a, const CoilStack& b) {
  if (a.coils() != b.coils()) throw ShapeError("subtract: coil count mismatch");
  std::vector<ComplexGrid> out;
  out.reserve(a.coils());
  for (std::size_t i = 0; i < a.coils(); ++i) out.push_back(subtract(a[i], b[i]));
  return CoilStack(std::move(out));
}

inline CoilStack scale(const CoilStack& s, cplx factor) {
  std::vector<ComplexGrid> out;
  out.reserve(s.coils());
  for (const auto& g : s) out.push_back(scale(g, factor));
  return CoilStack(std::move(out));
}

/// <a, b> = sum conj(a) * b
inline cplx inner(const ComplexGrid& a, const ComplexGrid& b) {
  detail::require_same_shape(a.shape(), b.shape(), "inner");
  cplx acc{};
  for (std::size_t i = 0; i < a.size(); ++i) acc += std::conj(a[i]) * b[i];
  return acc;
}

inline cplx inner(const CoilStack& a, const CoilStack& b) {
  if (a.coils() != b.coils()) throw ShapeError("inner: coil count mismatch");
  cplx acc{};
  for (std::size_t i = 0; i < a.coils(); ++i) acc += inner(a[i], b[i]);
  return acc;
}

template <typename T>
bool all_finite(const Grid<T>& g) {
  for (const auto& v : g) {
    if constexpr (std::is_same_v<T, cplx>) {
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
    } else {
      if (!std::isfinite(v)) return false;
    }
  }
  return true;
}

inline bool all_finite(const CoilStack& s) {
  for (const auto& g : s) {
    if (!all_finite(g)) return false;
  }
  return true;
}

}  // namespace mraug
