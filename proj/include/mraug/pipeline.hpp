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
#include <optional>
#include <string>
#include <string_view>

#include "mraug/acquisition.hpp"
#include "mraug/fourier.hpp"
#include "mraug/grid.hpp"
#include "mraug/random.hpp"
#include "mraug/transforms.hpp"

namespace mraug {

enum class Schedule { kExponential, kConstant };
enum class MaskPolicy { kRandomPerSlice, kFixedPerVolume };
enum class Mode { kMRAugment, kNaive, kObjectLevel };

/// Index order used by weights and sampling; matches TransformKind.
enum class TransformId : std::size_t {
  kHFlip = 0,
  kVFlip,
  kRot90,
  kRotation,
  kTranslation,
  kScaleIso,
  kScaleAniso,
  kShear,
};
inline constexpr std::size_t kTransformCount = 8;

struct Range {
  double lo = 0.0;
  double hi = 0.0;
  friend bool operator==(Range, Range) = default;
};

/// Defaults reproduce the fastMRI configuration: exponential schedule with
/// c = 5 and p_max = 0.55, 8x masks with a 4% center band, and the
/// per-transform weights and ranges below.
struct AugmentConfig {
  double p_max = 0.55;
  double c = 5.0;
  unsigned total_epochs = 50;
  Schedule schedule = Schedule::kExponential;

  std::array<double, kTransformCount> weights{0.5, 0.5, 0.5, 0.5, 1.0, 0.5, 0.5, 1.0};
  Range rotation_degrees{-180.0, 180.0};
  Range translate_x{-0.08, 0.08};
  Range translate_y{-0.125, 0.125};
  Range scale_iso{0.75, 1.25};
  Range scale_aniso{0.75, 1.25};
  Range shear_degrees{-12.5, 12.5};
  /// Snap sampled shifts to whole pixels so translation stays a permutation.
  bool translate_integer = true;

  InterpConfig interp{};
  unsigned acceleration = 8;
  double center_fraction = 0.04;
  MaskPolicy mask_policy = MaskPolicy::kRandomPerSlice;
  /// Target size; a zero extent keeps the full slice size on that axis.
  GridShape crop{320, 320};

  double weight(TransformId id) const { return weights[static_cast<std::size_t>(id)]; }

  void validate() const {
    if (!(p_max >= 0.0 && p_max <= 1.0)) throw DomainError("p_max must lie in [0, 1]");
    if (!(c >= 0.0)) throw DomainError("schedule sharpness c must be non-negative");
    for (double w : weights) {
      if (!(w >= 0.0 && w <= 1.0)) throw DomainError("transform weights must lie in [0, 1]");
      if (p_max * w > 1.0) throw DomainError("p_max * weight exceeds 1");
    }
    for (const Range& r : {rotation_degrees, translate_x, translate_y, scale_iso, scale_aniso,
                           shear_degrees}) {
      if (!(r.lo <= r.hi)) throw DomainError("parameter range is empty");
    }
    if (scale_iso.lo <= 0.0 || scale_aniso.lo <= 0.0) {
      throw DomainError("scaling ranges must be positive");
    }
    if (std::abs(shear_degrees.lo) >= 90.0 || std::abs(shear_degrees.hi) >= 90.0) {
      throw DomainError("shear angles must lie strictly inside (-90, 90) degrees");
    }
    if (interp.upsample < 1) throw DomainError("upsample factor must be >= 1");
    if (acceleration < 1) throw DomainError("acceleration must be >= 1");
    if (!(center_fraction > 0.0 && center_fraction < 1.0)) {
      throw DomainError("center_fraction must lie in (0, 1)");
    }
  }

  GridShape target_shape(GridShape slice) const {
    return {crop.height == 0 ? slice.height : crop.height,
            crop.width == 0 ? slice.width : crop.width};
  }
};

inline std::string_view to_string(Mode m) {
  switch (m) {
    case Mode::kMRAugment:
      return "mraugment";
    case Mode::kNaive:
      return "naive";
    case Mode::kObjectLevel:
      return "object-level";
  }
  return "?";
}

inline std::optional<Mode> parse_mode(std::string_view s) {
  if (s == "mraugment") return Mode::kMRAugment;
  if (s == "naive") return Mode::kNaive;
  if (s == "object-level") return Mode::kObjectLevel;
  return std::nullopt;
}

/// Identifies one slice draw; every random stream of the slice derives from it.
struct SliceKey {
  std::uint64_t seed = 0;
  std::uint64_t volume = 0;
  std::uint64_t slice = 0;
  std::uint64_t epoch = 0;
};

inline std::uint64_t mask_seed(const SliceKey& key) {
  return derive_seed({key.seed, static_cast<std::uint64_t>(Stream::kMask), key.volume, key.slice,
                      key.epoch});
}

/// Augmentation probability at epoch t. Epochs past T clamp to T.
inline double schedule_p(double t, const AugmentConfig& cfg) {
  if (cfg.schedule == Schedule::kConstant) return cfg.p_max;
  const double T = static_cast<double>(cfg.total_epochs);
  if (T <= 0.0) return cfg.p_max;
  t = std::clamp(t, 0.0, T);
  if (cfg.c == 0.0) return cfg.p_max * t / T;
  return cfg.p_max / (1.0 - std::exp(-cfg.c)) * (1.0 - std::exp(-t * cfg.c / T));
}

/// Decides independently for each transform whether it fires (probability
/// p * w_i, drawn from `fire`) and draws its parameters uniformly from the
/// configured ranges (from `params`). Both streams advance by a fixed number
/// of draws regardless of the outcome.
inline TransformSpec sample_transforms(const AugmentConfig& cfg, double p, Rng& fire, Rng& params,
                                       GridShape shape) {
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("sample_transforms: p must lie in [0, 1]");
  std::array<bool, kTransformCount> fired{};
  for (std::size_t i = 0; i < kTransformCount; ++i) fired[i] = uniform01(fire) < p * cfg.weights[i];

  const double quarter = uniform01(params);
  const int k = shape.square() ? static_cast<int>(quarter * 4.0)
                               : 2 * static_cast<int>(quarter * 2.0);
  const double angle = uniform(params, cfg.rotation_degrees.lo, cfg.rotation_degrees.hi);
  double dx = uniform(params, cfg.translate_x.lo, cfg.translate_x.hi);
  double dy = uniform(params, cfg.translate_y.lo, cfg.translate_y.hi);
  if (cfg.translate_integer && shape.size() > 0) {
    const double w = static_cast<double>(shape.width);
    const double h = static_cast<double>(shape.height);
    dx = std::round(dx * w) / w;
    dy = std::round(dy * h) / h;
  }
  const double s = uniform(params, cfg.scale_iso.lo, cfg.scale_iso.hi);
  const double sx = uniform(params, cfg.scale_aniso.lo, cfg.scale_aniso.hi);
  const double sy = uniform(params, cfg.scale_aniso.lo, cfg.scale_aniso.hi);
  const double shx = uniform(params, cfg.shear_degrees.lo, cfg.shear_degrees.hi);
  const double shy = uniform(params, cfg.shear_degrees.lo, cfg.shear_degrees.hi);

  TransformSpec spec;
  spec.p = p;
  if (fired[0]) spec.transforms.emplace_back(HFlip{});
  if (fired[1]) spec.transforms.emplace_back(VFlip{});
  if (fired[2]) spec.transforms.emplace_back(Rot90{std::min(k, 3)});
  if (fired[3]) spec.transforms.emplace_back(Rotate{angle});
  if (fired[4]) spec.transforms.emplace_back(Translate{dx, dy});
  if (fired[5]) spec.transforms.emplace_back(ScaleIso{s});
  if (fired[6]) spec.transforms.emplace_back(ScaleAniso{sx, sy});
  if (fired[7]) spec.transforms.emplace_back(Shear{shx, shy});
  return spec;
}

/// Spec for one slice at its scheduled probability.
inline TransformSpec sample_transforms(const AugmentConfig& cfg, const SliceKey& key,
                                       GridShape shape) {
  Rng fire = make_rng(key.seed, Stream::kTransformFire, key.volume, key.slice, key.epoch);
  Rng params = make_rng(key.seed, Stream::kTransformParams, key.volume, key.slice, key.epoch);
  TransformSpec spec =
      sample_transforms(cfg, schedule_p(static_cast<double>(key.epoch), cfg), fire, params, shape);
  spec.volume = key.volume;
  spec.slice = key.slice;
  spec.epoch = key.epoch;
  return spec;
}

struct AugmentedPair {
  CoilStack kspace;  ///< undersampled augmented measurements
  RealGrid target;
  TransformSpec spec;
  UndersamplingMask mask;
};

inline UndersamplingMask slice_mask(const AugmentConfig& cfg, const SliceKey& key,
                                    std::size_t width) {
  if (cfg.acceleration == 1) return make_full_mask(width);
  if (cfg.mask_policy == MaskPolicy::kFixedPerVolume) {
    return make_volume_mask(width, cfg.acceleration, cfg.center_fraction, key.seed, key.volume);
  }
  return make_random_mask(width, cfg.acceleration, cfg.center_fraction, mask_seed(key));
}

namespace detail {

inline const SensitivityMaps& require_maps(const SensitivityMaps* maps, std::string_view who) {
  if (maps == nullptr) {
    throw DomainError(std::string(who) + " requires known sensitivity maps");
  }
  return *maps;
}

}  // namespace detail

/// Shape of the image that the spec of a given mode is drawn for.
inline GridShape augmented_shape(Mode mode, GridShape slice, const AugmentConfig& cfg) {
  return mode == Mode::kNaive ? cfg.target_shape(slice) : slice;
}

/// Object-level augmentation: recombine the coils into one object estimate
/// sum_j conj(S_j) x_j, transform it, and modulate it by S_i again.
inline CoilStack object_level_augment(const CoilStack& coil_images, const SensitivityMaps& maps,
                                      const TransformSpec& spec, const AugmentConfig& cfg) {
  const ComplexGrid object = coil_combine(coil_images, maps);
  const CoilStack augmented = compose(CoilStack({object}), spec, cfg.interp);
  return apply_sensitivities(augmented[0], maps);
}

/// Naive comparator: transform the real RSS target, then treat it as a
/// zero-phase object seen through the center-cropped maps.
inline CoilStack naive_coil_images(const CoilStack& coil_images, const SensitivityMaps& maps,
                                   const TransformSpec& spec, const AugmentConfig& cfg,
                                   RealGrid* target_out = nullptr) {
  const GridShape out = cfg.target_shape(coil_images.shape());
  const RealGrid target = center_crop(rss(coil_images), out);
  RealGrid augmented = compose(target, spec, cfg.interp);
  CoilStack coils = apply_sensitivities(to_complex(augmented), maps.cropped(out));
  if (target_out != nullptr) *target_out = std::move(augmented);
  return coils;
}

/// Augmented coil images of one slice under a resolved spec (before masking).
inline CoilStack augmented_coil_images(Mode mode, const CoilStack& kspace,
                                       const TransformSpec& spec, const AugmentConfig& cfg,
                                       const SensitivityMaps* maps = nullptr) {
  const CoilStack x = ifft2c(kspace);
  switch (mode) {
    case Mode::kMRAugment:
      return spec.empty() ? x : compose(x, spec, cfg.interp);
    case Mode::kNaive:
      return naive_coil_images(x, detail::require_maps(maps, "naive augmentation"), spec, cfg);
    case Mode::kObjectLevel:
      return object_level_augment(x, detail::require_maps(maps, "object-level augmentation"), spec,
                                  cfg);
  }
  return x;
}

/// Replays a resolved (spec, mask) pair on fully sampled k-space.
inline AugmentedPair replay(Mode mode, const CoilStack& kspace, const TransformSpec& spec,
                            const UndersamplingMask& mask, const AugmentConfig& cfg,
                            const SensitivityMaps* maps = nullptr) {
  AugmentedPair pair;
  pair.spec = spec;
  pair.mask = mask;
  const CoilStack x = ifft2c(kspace);
  const GridShape out = cfg.target_shape(kspace.shape());
  switch (mode) {
    case Mode::kMRAugment: {
      if (spec.empty()) {
        // F F^-1 k = k; skipping the round trip keeps the identity path exact.
        pair.kspace = apply_mask(kspace, mask);
        pair.target = center_crop(rss(x), out);
      } else {
        const CoilStack xa = compose(x, spec, cfg.interp);
        pair.kspace = forward(xa, mask);
        pair.target = center_crop(rss(xa), out);
      }
      break;
    }
    case Mode::kNaive: {
      const CoilStack coils = naive_coil_images(
          x, detail::require_maps(maps, "naive augmentation"), spec, cfg, &pair.target);
      pair.kspace = forward(coils, mask);
      break;
    }
    case Mode::kObjectLevel: {
      const CoilStack coils = object_level_augment(
          x, detail::require_maps(maps, "object-level augmentation"), spec, cfg);
      pair.kspace = forward(coils, mask);
      pair.target = center_crop(rss(coils), out);
      break;
    }
  }
  return pair;
}

/// Draws the spec and mask of one slice and produces its training pair.
inline AugmentedPair augment(Mode mode, const CoilStack& kspace, const AugmentConfig& cfg,
                             const SliceKey& key, const SensitivityMaps* maps = nullptr) {
  const GridShape image = augmented_shape(mode, kspace.shape(), cfg);
  const TransformSpec spec = sample_transforms(cfg, key, image);
  const UndersamplingMask mask = slice_mask(cfg, key, image.width);
  return replay(mode, kspace, spec, mask, cfg, maps);
}

inline AugmentedPair augment_slice(const CoilStack& kspace, const AugmentConfig& cfg,
                                   const SliceKey& key) {
  return augment(Mode::kMRAugment, kspace, cfg, key);
}

inline AugmentedPair naive_augment_slice(const CoilStack& kspace, const AugmentConfig& cfg,
                                         const SliceKey& key, const SensitivityMaps* maps) {
  return augment(Mode::kNaive, kspace, cfg, key, maps);
}

/// Object-level augmentation of a slice's coil images with its scheduled spec.
inline CoilStack object_level_augment(const CoilStack& kspace, const SensitivityMaps& maps,
                                      const AugmentConfig& cfg, const SliceKey& key) {
  const TransformSpec spec = sample_transforms(cfg, key, kspace.shape());
  return object_level_augment(ifft2c(kspace), maps, spec, cfg);
}

}  // namespace mraug
