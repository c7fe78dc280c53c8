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

#include <cstdint>
#include <initializer_list>
#include <random>

namespace mraug {

using Rng = std::mt19937_64;

/// Tags naming the independent random streams used per slice.
enum class Stream : std::uint64_t {
  kTransformFire = 0x7472616e73666972ULL,
  kTransformParams = 0x706172616d730000ULL,
  kMask = 0x6d61736b00000000ULL,
  kVolumeMask = 0x766d61736b000000ULL,
  kPhantom = 0x7068616e746f6d00ULL,
  kMaps = 0x6d61707300000000ULL,
  kNoise = 0x6e6f697365000000ULL,
};

namespace detail {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace detail

/// Order-sensitive hash of a key tuple, used to derive disjoint substreams
/// such as (seed, stream, volume, slice, epoch).
constexpr std::uint64_t derive_seed(std::initializer_list<std::uint64_t> keys) {
  std::uint64_t h = 0x243f6a8885a308d3ULL;
  for (std::uint64_t k : keys) h = detail::splitmix64(h ^ detail::splitmix64(k));
  return h;
}

inline Rng make_rng(std::initializer_list<std::uint64_t> keys) { return Rng(derive_seed(keys)); }

inline Rng make_rng(std::uint64_t seed, Stream stream, std::uint64_t volume = 0,
                    std::uint64_t slice = 0, std::uint64_t epoch = 0) {
  return make_rng({seed, static_cast<std::uint64_t>(stream), volume, slice, epoch});
}

/// Uniform draw on [0, 1) with 53 random bits.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform(Rng& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

}  // namespace mraug
