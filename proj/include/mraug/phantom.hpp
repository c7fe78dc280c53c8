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
#include <numbers>
#include <vector>

#include "mraug/acquisition.hpp"
#include "mraug/dataset.hpp"
#include "mraug/fourier.hpp"
#include "mraug/grid.hpp"
#include "mraug/parallel.hpp"
#include "mraug/random.hpp"

namespace mraug {

enum class PhantomVariant {
  kModified,   ///< Toft's high-contrast intensities
  kOriginal,   ///< Shepp & Logan's intensities, halved so the skull is 1
  kSymmetric,  ///< modified intensities, left-right mirror-symmetric geometry
};

struct Ellipse {
  double intensity;
  double semi_x;
  double semi_y;
  double center_x;
  double center_y;
  double degrees;

  /// Membership in normalized coordinates (x right, y up, both in [-1, 1]).
  bool contains(double x, double y) const {
    const double th = degrees * std::numbers::pi / 180.0;
    const double dx = x - center_x;
    const double dy = y - center_y;
    const double xr = dx * std::cos(th) + dy * std::sin(th);
    const double yr = -dx * std::sin(th) + dy * std::cos(th);
    return (xr * xr) / (semi_x * semi_x) + (yr * yr) / (semi_y * semi_y) <= 1.0;
  }
};

inline std::vector<Ellipse> phantom_ellipses(PhantomVariant variant) {
  std::vector<Ellipse> e = {
      {1.0, 0.6900, 0.9200, 0.00, 0.0000, 0.0},    {-0.8, 0.6624, 0.8740, 0.00, -0.0184, 0.0},
      {-0.2, 0.1100, 0.3100, 0.22, 0.0000, -18.0}, {-0.2, 0.1600, 0.4100, -0.22, 0.0000, 18.0},
      {0.1, 0.2100, 0.2500, 0.00, 0.3500, 0.0},    {0.1, 0.0460, 0.0460, 0.00, 0.1000, 0.0},
      {0.1, 0.0460, 0.0460, 0.00, -0.1000, 0.0},   {0.1, 0.0460, 0.0230, -0.08, -0.6050, 0.0},
      {0.1, 0.0230, 0.0230, 0.00, -0.6060, 0.0},   {0.1, 0.0230, 0.0460, 0.06, -0.6050, 0.0},
  };
  switch (variant) {
    case PhantomVariant::kModified:
      break;
    case PhantomVariant::kOriginal: {
      constexpr std::array<double, 10> orig = {2.0,  -0.98, -0.02, -0.02, 0.01,
                                               0.01, 0.01,  0.01,  0.01,  0.01};
      for (std::size_t i = 0; i < e.size(); ++i) e[i].intensity = orig[i] / 2.0;
      break;
    }
    case PhantomVariant::kSymmetric:
      e[3] = {-0.2, 0.1100, 0.3100, -0.22, 0.0000, 18.0};
      e[7] = {0.1, 0.0460, 0.0230, -0.08, -0.6050, 0.0};
      e[9] = {0.1, 0.0460, 0.0230, 0.08, -0.6050, 0.0};
      break;
  }
  return e;
}

/// Rigid-plus-scale placement of the phantom inside the field of view.
struct PhantomPose {
  double degrees = 0.0;
  double scale = 1.0;
  double shift_x = 0.0;  ///< normalized units, x right
  double shift_y = 0.0;  ///< normalized units, y up
};

/// Normalized coordinate of column j / row i. Pixel centers are symmetric
/// about zero, so odd sizes have a pixel exactly at the origin.
inline double phantom_x(std::size_t j, std::size_t w) {
  return (2.0 * static_cast<double>(j) + 1.0 - static_cast<double>(w)) / static_cast<double>(w);
}
inline double phantom_y(std::size_t i, std::size_t h) {
  return (static_cast<double>(h) - 1.0 - 2.0 * static_cast<double>(i)) / static_cast<double>(h);
}

/// Ellipse-sum intensity at a normalized point, before clamping.
inline double phantom_value(const std::vector<Ellipse>& ellipses, double x, double y) {
  double v = 0.0;
  for (const auto& e : ellipses) {
    if (e.contains(x, y)) v += e.intensity;
  }
  return v;
}

inline RealGrid shepp_logan(std::size_t h, std::size_t w,
                            PhantomVariant variant = PhantomVariant::kModified,
                            const PhantomPose& pose = {}) {
  if (h < 32 || w < 32) throw DomainError("shepp_logan: size must be at least 32x32");
  if (!(pose.scale > 0.0)) throw DomainError("shepp_logan: pose scale must be positive");
  const auto ellipses = phantom_ellipses(variant);
  const double th = pose.degrees * std::numbers::pi / 180.0;
  const double c = std::cos(th);
  const double s = std::sin(th);
  RealGrid out(h, w);
  for (std::size_t i = 0; i < h; ++i) {
    for (std::size_t j = 0; j < w; ++j) {
      // Pull the sample point back into phantom coordinates.
      const double px = (phantom_x(j, w) - pose.shift_x) / pose.scale;
      const double py = (phantom_y(i, h) - pose.shift_y) / pose.scale;
      const double x = c * px + s * py;
      const double y = -s * px + c * py;
      out(i, j) = std::clamp(phantom_value(ellipses, x, y), 0.0, 1.0);
    }
  }
  return out;
}

/// Gaussian-bump coil profiles centered at equiangular positions just
/// outside the field of view, each with a smooth random linear phase,
/// normalized so that sum_i |S_i|^2 = 1 at every pixel. A single coil gets
/// the constant map S = 1.
inline SensitivityMaps synth_sensitivities(std::size_t h, std::size_t w, std::size_t coils,
                                           Rng& rng) {
  if (coils == 0) throw DomainError("synth_sensitivities: need at least one coil");
  if (coils == 1) return SensitivityMaps({ComplexGrid(h, w, cplx(1.0, 0.0))});

  constexpr double kRadius = 1.2;
  constexpr double kWidth = 0.9;
  std::vector<ComplexGrid> maps;
  maps.reserve(coils);
  for (std::size_t k = 0; k < coils; ++k) {
    const double angle = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(coils);
    const double cx = kRadius * std::cos(angle);
    const double cy = kRadius * std::sin(angle);
    const double phase0 = uniform(rng, 0.0, 2.0 * std::numbers::pi);
    const double ramp_x = uniform(rng, -std::numbers::pi / 2.0, std::numbers::pi / 2.0);
    const double ramp_y = uniform(rng, -std::numbers::pi / 2.0, std::numbers::pi / 2.0);
    ComplexGrid m(h, w);
    for (std::size_t i = 0; i < h; ++i) {
      const double y = phantom_y(i, h);
      for (std::size_t j = 0; j < w; ++j) {
        const double x = phantom_x(j, w);
        const double r2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
        const double mag = std::exp(-r2 / (2.0 * kWidth * kWidth));
        m(i, j) = std::polar(mag, phase0 + ramp_x * x + ramp_y * y);
      }
    }
    maps.push_back(std::move(m));
  }
  for (std::size_t p = 0; p < h * w; ++p) {
    double acc = 0.0;
    for (const auto& m : maps) acc += std::norm(m[p]);
    const double inv = 1.0 / std::sqrt(acc);
    for (auto& m : maps) m[p] *= inv;
  }
  return SensitivityMaps(std::move(maps));
}

// ---------------------------------------------------------------------------
// Synthetic datasets

struct DatasetParams {
  std::size_t volumes = 2;
  std::size_t slices_per_volume = 4;
  std::size_t height = 640;
  std::size_t width = 368;
  std::size_t coils = 8;
  double sigma = 0.002;
  std::uint64_t seed = 0;
};

/// Random placement of the phantom in one slice.
inline PhantomPose slice_pose(std::uint64_t seed, std::uint64_t volume, std::uint64_t slice) {
  Rng rng = make_rng(seed, Stream::kPhantom, volume, slice);
  PhantomPose pose;
  pose.degrees = uniform(rng, -10.0, 10.0);
  pose.scale = uniform(rng, 0.85, 1.0);
  pose.shift_x = uniform(rng, -0.05, 0.05);
  pose.shift_y = uniform(rng, -0.05, 0.05);
  return pose;
}

inline SensitivityMaps volume_maps(std::uint64_t seed, std::uint64_t volume, std::size_t h,
                                   std::size_t w, std::size_t coils) {
  Rng rng = make_rng(seed, Stream::kMaps, volume);
  return synth_sensitivities(h, w, coils, rng);
}

struct SimulatedSlice {
  RealGrid object;    ///< ground-truth x*
  CoilStack kspace;   ///< fully sampled, noisy unless sigma == 0
};

/// Object, coil modulation, FFT and noise of one slice. Pass sigma = 0 for
/// the noise-free counterpart of a stored slice.
inline SimulatedSlice simulate_slice(std::uint64_t seed, std::uint64_t volume, std::uint64_t slice,
                                     const SensitivityMaps& maps, double sigma) {
  SimulatedSlice out;
  const GridShape shape = maps.shape();
  out.object = shepp_logan(shape.height, shape.width, PhantomVariant::kModified,
                           slice_pose(seed, volume, slice));
  out.kspace = fft2c(apply_sensitivities(to_complex(out.object), maps));
  Rng noise = make_rng(seed, Stream::kNoise, volume, slice);
  out.kspace = add_noise(out.kspace, NoiseModel{sigma}, noise);
  return out;
}

/// Writes a complete dataset under `root`; output bytes depend only on params.
inline DatasetMeta synth_dataset(const DatasetParams& p, const fs::path& root,
                                 unsigned workers = 1) {
  if (p.volumes == 0 || p.slices_per_volume == 0) {
    throw DomainError("synth_dataset: need at least one volume and one slice");
  }
  if (p.sigma < 0.0) throw DomainError("synth_dataset: sigma must be non-negative");
  fs::create_directories(root);
  DatasetMeta meta;
  meta.height = p.height;
  meta.width = p.width;
  meta.coils = p.coils;
  meta.sigma = p.sigma;
  meta.seed = p.seed;
  meta.volumes = p.volumes;
  meta.slices_per_volume = p.slices_per_volume;
  std::vector<SensitivityMaps> maps;
  for (std::uint64_t v = 0; v < p.volumes; ++v) {
    maps.push_back(volume_maps(p.seed, v, p.height, p.width, p.coils));
    meta.map_files.push_back(maps_file_name(v));
    write_coil_stack(root / meta.map_files.back(), CoilStack(maps.back().maps()));
    for (std::uint64_t s = 0; s < p.slices_per_volume; ++s) {
      meta.slices.push_back({v, s, slice_file_name(v, s)});
    }
  }
  parallel_for(meta.slices.size(), workers, [&](std::size_t i) {
    const SliceEntry& e = meta.slices[i];
    const SimulatedSlice sim = simulate_slice(p.seed, e.volume, e.slice, maps[e.volume], p.sigma);
    write_coil_stack(root / e.file, sim.kspace);
  });
  write_meta(root, meta);
  return meta;
}

}  // namespace mraug
