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
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "mraug/grid.hpp"

// Augmentation transforms applied identically to the real and imaginary
// parts of every coil image.
//
// Pixel coordinates are (x = column, y = row), with y pointing down. All
// geometric transforms act about the image center ((w-1)/2, (h-1)/2). A
// positive rotation angle turns the image counterclockwise as displayed,
// which agrees with Rot90{1}.

namespace mraug {

struct HFlip {
  friend bool operator==(HFlip, HFlip) = default;
};
struct VFlip {
  friend bool operator==(VFlip, VFlip) = default;
};
/// Counterclockwise rotation by k * 90 degrees.
struct Rot90 {
  int k = 0;
  friend bool operator==(Rot90, Rot90) = default;
};
struct Rotate {
  double degrees = 0.0;
  friend bool operator==(Rotate, Rotate) = default;
};
/// Shift by (dx * width, dy * height) pixels.
struct Translate {
  double dx = 0.0;
  double dy = 0.0;
  friend bool operator==(Translate, Translate) = default;
};
/// s > 1 zooms in.
struct ScaleIso {
  double s = 1.0;
  friend bool operator==(ScaleIso, ScaleIso) = default;
};
struct ScaleAniso {
  double sx = 1.0;
  double sy = 1.0;
  friend bool operator==(ScaleAniso, ScaleAniso) = default;
};
struct Shear {
  double x_degrees = 0.0;
  double y_degrees = 0.0;
  friend bool operator==(Shear, Shear) = default;
};

using TransformKind =
    std::variant<HFlip, VFlip, Rot90, Rotate, Translate, ScaleIso, ScaleAniso, Shear>;

inline const char* name(const TransformKind& t) {
  static constexpr std::array<const char*, 8> kNames = {
      "hflip", "vflip", "rot90", "rotation", "translation", "scale_iso", "scale_aniso", "shear"};
  return kNames[t.index()];
}

/// Everything needed to replay the augmentation of one slice.
struct TransformSpec {
  std::vector<TransformKind> transforms;
  std::uint64_t volume = 0;
  std::uint64_t slice = 0;
  std::uint64_t epoch = 0;
  double p = 0.0;

  bool empty() const { return transforms.empty(); }
  friend bool operator==(const TransformSpec&, const TransformSpec&) = default;
};

struct InterpConfig {
  unsigned upsample = 2;
};

/// out = linear * (in - center) + center + offset, in pixel units.
struct Affine2D {
  std::array<double, 4> linear{1.0, 0.0, 0.0, 1.0};  // row-major 2x2
  std::array<double, 2> offset{0.0, 0.0};

  double det() const { return linear[0] * linear[3] - linear[1] * linear[2]; }

  /// this applied after `first`.
  Affine2D after(const Affine2D& first) const {
    const auto& a = linear;
    const auto& b = first.linear;
    Affine2D out;
    out.linear = {a[0] * b[0] + a[1] * b[2], a[0] * b[1] + a[1] * b[3],
                  a[2] * b[0] + a[3] * b[2], a[2] * b[1] + a[3] * b[3]};
    out.offset = {a[0] * first.offset[0] + a[1] * first.offset[1] + offset[0],
                  a[2] * first.offset[0] + a[3] * first.offset[1] + offset[1]};
    return out;
  }

  bool is_identity() const {
    return linear == std::array<double, 4>{1.0, 0.0, 0.0, 1.0} &&
           offset == std::array<double, 2>{0.0, 0.0};
  }
};

namespace detail {

constexpr double deg2rad(double deg) { return deg * std::numbers::pi / 180.0; }

inline bool near_integer(double v) {
  return std::abs(v - std::round(v)) <= 1e-9 * std::max(1.0, std::abs(v));
}

inline std::array<long, 2> pixel_shift(const Translate& t, GridShape shape) {
  return {std::lround(t.dx * static_cast<double>(shape.width)),
          std::lround(t.dy * static_cast<double>(shape.height))};
}

}  // namespace detail

/// True if the transform only permutes pixels on a grid of this shape.
inline bool is_pixel_preserving(const TransformKind& t, GridShape shape) {
  if (std::holds_alternative<HFlip>(t) || std::holds_alternative<VFlip>(t)) return true;
  if (const auto* r = std::get_if<Rot90>(&t)) return shape.square() || r->k % 2 == 0;
  if (const auto* tr = std::get_if<Translate>(&t)) {
    return detail::near_integer(tr->dx * static_cast<double>(shape.width)) &&
           detail::near_integer(tr->dy * static_cast<double>(shape.height));
  }
  return false;
}

/// Affine matrix of an interpolating transform on a grid of this shape.
inline Affine2D affine_matrix(const TransformKind& t, GridShape shape) {
  Affine2D m;
  if (const auto* r = std::get_if<Rotate>(&t)) {
    const double th = detail::deg2rad(r->degrees);
    const double c = std::cos(th);
    const double s = std::sin(th);
    m.linear = {c, s, -s, c};
  } else if (const auto* tr = std::get_if<Translate>(&t)) {
    m.offset = {tr->dx * static_cast<double>(shape.width),
                tr->dy * static_cast<double>(shape.height)};
  } else if (const auto* si = std::get_if<ScaleIso>(&t)) {
    m.linear = {si->s, 0.0, 0.0, si->s};
  } else if (const auto* sa = std::get_if<ScaleAniso>(&t)) {
    m.linear = {sa->sx, 0.0, 0.0, sa->sy};
  } else if (const auto* sh = std::get_if<Shear>(&t)) {
    m.linear = {1.0, std::tan(detail::deg2rad(sh->x_degrees)),
                std::tan(detail::deg2rad(sh->y_degrees)), 1.0};
  } else {
    throw DomainError(std::string("affine_matrix: ") + name(t) + " is not an interpolating transform");
  }
  return m;
}

namespace detail {

// Keys cubic convolution kernel, a = -0.5.
inline double cubic_weight(double t) {
  constexpr double a = -0.5;
  t = std::abs(t);
  if (t <= 1.0) return ((a + 2.0) * t - (a + 3.0)) * t * t + 1.0;
  if (t < 2.0) return ((a * t - 5.0 * a) * t + 8.0 * a) * t - 4.0 * a;
  return 0.0;
}

// Mirror about the first and last sample without repeating them.
inline std::size_t reflect_index(long i, std::size_t n) {
  if (n == 1) return 0;
  const long period = 2 * static_cast<long>(n - 1);
  long m = std::abs(i) % period;
  if (m > static_cast<long>(n - 1)) m = period - m;
  return static_cast<std::size_t>(m);
}

inline double reflect_coord(double x, std::size_t n) {
  if (n == 1) return 0.0;
  const double last = static_cast<double>(n - 1);
  if (x >= 0.0 && x <= last) return x;
  const double period = 2.0 * last;
  double m = std::fmod(std::abs(x), period);
  if (m > last) m = period - m;
  return m;
}

struct CubicTaps {
  std::array<std::size_t, 4> index{};
  std::array<double, 4> weight{};
};

inline CubicTaps cubic_taps(double x, std::size_t n) {
  x = reflect_coord(x, n);
  const double base = std::floor(x);
  const double t = x - base;
  const long i0 = static_cast<long>(base);
  CubicTaps taps;
  for (int j = 0; j < 4; ++j) {
    taps.index[j] = reflect_index(i0 - 1 + j, n);
    taps.weight[j] = cubic_weight(t - static_cast<double>(j - 1));
  }
  return taps;
}

inline std::vector<CubicTaps> resize_taps(std::size_t in_n, std::size_t out_n) {
  std::vector<CubicTaps> taps(out_n);
  for (std::size_t o = 0; o < out_n; ++o) {
    const double pos =
        out_n == 1 ? 0.0 : static_cast<double>(o * (in_n - 1)) / static_cast<double>(out_n - 1);
    taps[o] = cubic_taps(pos, in_n);
  }
  return taps;
}

// Bicubic resize with aligned corners: output index o samples input
// coordinate o * (in - 1) / (out - 1), so an integer upsampling factor f
// with out = f * (in - 1) + 1 places every input sample on an output node.
inline ComplexGrid resize_bicubic(const ComplexGrid& g, GridShape out) {
  const auto col_taps = resize_taps(g.width(), out.width);
  const auto row_taps = resize_taps(g.height(), out.height);

  ComplexGrid tmp(g.height(), out.width);
  for (std::size_t r = 0; r < g.height(); ++r) {
    for (std::size_t c = 0; c < out.width; ++c) {
      const auto& tp = col_taps[c];
      cplx acc{};
      for (int j = 0; j < 4; ++j) acc += tp.weight[j] * g(r, tp.index[j]);
      tmp(r, c) = acc;
    }
  }
  ComplexGrid res(out);
  for (std::size_t r = 0; r < out.height; ++r) {
    const auto& tp = row_taps[r];
    for (std::size_t c = 0; c < out.width; ++c) {
      cplx acc{};
      for (int j = 0; j < 4; ++j) acc += tp.weight[j] * tmp(tp.index[j], c);
      res(r, c) = acc;
    }
  }
  return res;
}

inline ComplexGrid hflip(const ComplexGrid& g) {
  ComplexGrid out(g.shape());
  for (std::size_t r = 0; r < g.height(); ++r)
    for (std::size_t c = 0; c < g.width(); ++c) out(r, c) = g(r, g.width() - 1 - c);
  return out;
}

inline ComplexGrid vflip(const ComplexGrid& g) {
  ComplexGrid out(g.shape());
  for (std::size_t r = 0; r < g.height(); ++r)
    for (std::size_t c = 0; c < g.width(); ++c) out(r, c) = g(g.height() - 1 - r, c);
  return out;
}

// Same convention as numpy.rot90: out(r, c) = in(c, w - 1 - r) for k = 1.
inline ComplexGrid rot90(const ComplexGrid& g, int k) {
  k = ((k % 4) + 4) % 4;
  const std::size_t h = g.height();
  const std::size_t w = g.width();
  switch (k) {
    case 0:
      return g;
    case 2: {
      ComplexGrid out(g.shape());
      for (std::size_t r = 0; r < h; ++r)
        for (std::size_t c = 0; c < w; ++c) out(r, c) = g(h - 1 - r, w - 1 - c);
      return out;
    }
    case 1: {
      ComplexGrid out(w, h);
      for (std::size_t r = 0; r < w; ++r)
        for (std::size_t c = 0; c < h; ++c) out(r, c) = g(c, w - 1 - r);
      return out;
    }
    default: {
      ComplexGrid out(w, h);
      for (std::size_t r = 0; r < w; ++r)
        for (std::size_t c = 0; c < h; ++c) out(r, c) = g(h - 1 - c, r);
      return out;
    }
  }
}

inline ComplexGrid circular_translate(const ComplexGrid& g, long dx, long dy) {
  const long h = static_cast<long>(g.height());
  const long w = static_cast<long>(g.width());
  ComplexGrid out(g.shape());
  for (long r = 0; r < h; ++r) {
    const long rr = ((r + dy) % h + h) % h;
    for (long c = 0; c < w; ++c) {
      out(static_cast<std::size_t>(rr), static_cast<std::size_t>(((c + dx) % w + w) % w)) =
          g(static_cast<std::size_t>(r), static_cast<std::size_t>(c));
    }
  }
  return out;
}

inline ComplexGrid permute(const ComplexGrid& g, const TransformKind& t) {
  if (std::holds_alternative<HFlip>(t)) return hflip(g);
  if (std::holds_alternative<VFlip>(t)) return vflip(g);
  if (const auto* r = std::get_if<Rot90>(&t)) return rot90(g, r->k);
  const auto shift = pixel_shift(std::get<Translate>(t), g.shape());
  return circular_translate(g, shift[0], shift[1]);
}

}  // namespace detail

/// Exact pixel permutation (flip, quarter-turn or integer circular shift).
inline CoilStack apply_pixel_preserving(const CoilStack& stack, const TransformKind& t) {
  if (!is_pixel_preserving(t, stack.shape())) {
    throw DomainError(std::string("apply_pixel_preserving: ") + name(t) +
                      " is not a pixel permutation on a " + to_string(stack.shape()) +
                      " grid; use the affine path");
  }
  std::vector<ComplexGrid> out;
  out.reserve(stack.coils());
  for (const auto& g : stack) out.push_back(detail::permute(g, t));
  return CoilStack(std::move(out));
}

namespace detail {

// Sampling geometry of one warp: output pixels of the upsampled grid and the
// bicubic taps they read from the upsampled input.
class WarpGeometry {
 public:
  WarpGeometry(GridShape shape, const Affine2D& m, const InterpConfig& interp)
      : shape_(shape), f_(interp.upsample), m_(m) {
    if (std::abs(m.det()) < 1e-8) throw DomainError("warp: degenerate affine matrix");
    if (interp.upsample < 1) throw DomainError("warp: upsample factor must be >= 1");
    up_ = {f_ * (shape.height - 1) + 1, f_ * (shape.width - 1) + 1};
    cx_ = (static_cast<double>(shape.width) - 1.0) / 2.0;
    cy_ = (static_cast<double>(shape.height) - 1.0) / 2.0;
    const double inv_det = 1.0 / m.det();
    inv_ = {m.linear[3] * inv_det, -m.linear[1] * inv_det, -m.linear[2] * inv_det,
            m.linear[0] * inv_det};
  }

  GridShape shape() const { return shape_; }
  GridShape up() const { return up_; }
  std::size_t factor() const { return f_; }

  /// Row and column taps on the upsampled input for upsampled output (ur, uc).
  std::pair<CubicTaps, CubicTaps> taps(std::size_t ur, std::size_t uc) const {
    const double fd = static_cast<double>(f_);
    // Output location in original pixel units, relative to the center.
    const double ox = static_cast<double>(uc) / fd - cx_ - m_.offset[0];
    const double oy = static_cast<double>(ur) / fd - cy_ - m_.offset[1];
    const double ix = inv_[0] * ox + inv_[1] * oy + cx_;
    const double iy = inv_[2] * ox + inv_[3] * oy + cy_;
    return {cubic_taps(iy * fd, up_.height), cubic_taps(ix * fd, up_.width)};
  }

 private:
  GridShape shape_;
  GridShape up_;
  std::size_t f_;
  Affine2D m_;
  double cx_ = 0.0;
  double cy_ = 0.0;
  std::array<double, 4> inv_{};
};

}  // namespace detail

/// Resamples every coil under one affine map. Each coil is upsampled by
/// `interp.upsample` (bicubic), warped with bicubic sampling and reflected
/// borders, then brought back to its original size.
inline CoilStack warp(const CoilStack& stack, const Affine2D& m, const InterpConfig& interp) {
  const GridShape shape = stack.shape();
  if (shape.size() == 0) return stack;
  const detail::WarpGeometry geo(shape, m, interp);
  const GridShape up = geo.up();
  const bool resample = geo.factor() > 1;

  std::vector<ComplexGrid> upsampled;
  upsampled.reserve(stack.coils());
  for (const auto& g : stack) upsampled.push_back(resample ? detail::resize_bicubic(g, up) : g);

  std::vector<ComplexGrid> warped(stack.coils(), ComplexGrid(up));
  for (std::size_t ur = 0; ur < up.height; ++ur) {
    for (std::size_t uc = 0; uc < up.width; ++uc) {
      const auto [ty, tx] = geo.taps(ur, uc);
      for (std::size_t i = 0; i < stack.coils(); ++i) {
        const auto& src = upsampled[i];
        cplx acc{};
        for (int a = 0; a < 4; ++a) {
          cplx row{};
          for (int b = 0; b < 4; ++b) row += tx.weight[b] * src(ty.index[a], tx.index[b]);
          acc += ty.weight[a] * row;
        }
        warped[i](ur, uc) = acc;
      }
    }
  }

  std::vector<ComplexGrid> out;
  out.reserve(stack.coils());
  for (auto& g : warped) out.push_back(resample ? detail::resize_bicubic(g, shape) : std::move(g));
  return CoilStack(std::move(out));
}

/// Per-pixel noise amplification of a warp: output pixel p is a fixed linear
/// combination sum_q L_pq x_q of input pixels, so i.i.d. input noise of
/// deviation sigma leaves p with deviation sigma * sqrt(sum_q L_pq^2). This
/// returns that square root for every output pixel.
inline RealGrid warp_noise_gain(GridShape shape, const Affine2D& m, const InterpConfig& interp) {
  const detail::WarpGeometry geo(shape, m, interp);
  const GridShape up = geo.up();
  const bool resample = geo.factor() > 1;
  const auto up_rows = detail::resize_taps(shape.height, up.height);
  const auto up_cols = detail::resize_taps(shape.width, up.width);
  const auto down_rows = detail::resize_taps(up.height, shape.height);
  const auto down_cols = detail::resize_taps(up.width, shape.width);

  RealGrid gain(shape);
  std::vector<std::pair<std::size_t, double>> terms;
  for (std::size_t r = 0; r < shape.height; ++r) {
    for (std::size_t c = 0; c < shape.width; ++c) {
      terms.clear();
      auto add_warp = [&](std::size_t ur, std::size_t uc, double w0) {
        const auto [ty, tx] = geo.taps(ur, uc);
        for (int a = 0; a < 4; ++a) {
          for (int b = 0; b < 4; ++b) {
            const double w1 = w0 * ty.weight[a] * tx.weight[b];
            if (w1 == 0.0) continue;
            if (!resample) {
              terms.emplace_back(ty.index[a] * shape.width + tx.index[b], w1);
              continue;
            }
            const auto& ry = up_rows[ty.index[a]];
            const auto& rx = up_cols[tx.index[b]];
            for (int a2 = 0; a2 < 4; ++a2) {
              for (int b2 = 0; b2 < 4; ++b2) {
                const double w2 = w1 * ry.weight[a2] * rx.weight[b2];
                if (w2 != 0.0) terms.emplace_back(ry.index[a2] * shape.width + rx.index[b2], w2);
              }
            }
          }
        }
      };
      if (!resample) {
        add_warp(r, c, 1.0);
      } else {
        const auto& dy = down_rows[r];
        const auto& dx = down_cols[c];
        for (int a = 0; a < 4; ++a)
          for (int b = 0; b < 4; ++b)
            if (dy.weight[a] * dx.weight[b] != 0.0) add_warp(dy.index[a], dx.index[b], dy.weight[a] * dx.weight[b]);
      }
      std::sort(terms.begin(), terms.end());
      double acc = 0.0;
      for (std::size_t i = 0; i < terms.size();) {
        double w = 0.0;
        const std::size_t idx = terms[i].first;
        for (; i < terms.size() && terms[i].first == idx; ++i) w += terms[i].second;
        acc += w * w;
      }
      gain(r, c) = std::sqrt(acc);
    }
  }
  return gain;
}

/// Single interpolating transform (rotation, fractional translation, scaling
/// or shearing).
inline CoilStack apply_affine(const CoilStack& stack, const TransformKind& t,
                              const InterpConfig& interp = {}) {
  return warp(stack, affine_matrix(t, stack.shape()), interp);
}

/// Applies a resolved spec: every pixel permutation in spec order first, then
/// the remaining interpolating transforms folded into one warp.
inline CoilStack compose(const CoilStack& stack, const TransformSpec& spec,
                         const InterpConfig& interp = {}) {
  CoilStack out = stack;
  Affine2D total;
  bool any_affine = false;
  for (const auto& t : spec.transforms) {
    if (is_pixel_preserving(t, out.shape())) {
      out = apply_pixel_preserving(out, t);
    } else if (std::holds_alternative<Rot90>(t)) {
      throw DomainError("compose: odd quarter-turn on a non-square grid");
    }
  }
  for (const auto& t : spec.transforms) {
    if (is_pixel_preserving(t, out.shape()) || std::holds_alternative<Rot90>(t)) continue;
    total = affine_matrix(t, out.shape()).after(total);
    any_affine = true;
  }
  if (any_affine) out = warp(out, total, interp);
  return out;
}

inline RealGrid compose(const RealGrid& image, const TransformSpec& spec,
                        const InterpConfig& interp = {}) {
  const CoilStack out = compose(CoilStack({to_complex(image)}), spec, interp);
  RealGrid res(out.shape());
  for (std::size_t p = 0; p < res.size(); ++p) res[p] = out[0][p].real();
  return res;
}

/// Per-pixel noise amplification of a whole spec (see warp_noise_gain). Pixel
/// permutations leave the noise untouched, so only the folded warp counts.
inline RealGrid noise_gain(GridShape shape, const TransformSpec& spec,
                           const InterpConfig& interp = {}) {
  Affine2D total;
  bool any_affine = false;
  for (const auto& t : spec.transforms) {
    if (is_pixel_preserving(t, shape)) continue;
    if (std::holds_alternative<Rot90>(t)) {
      throw DomainError("noise_gain: odd quarter-turn on a non-square grid");
    }
    total = affine_matrix(t, shape).after(total);
    any_affine = true;
  }
  if (!any_affine) return RealGrid(shape, 1.0);
  return warp_noise_gain(shape, total, interp);
}

}  // namespace mraug
