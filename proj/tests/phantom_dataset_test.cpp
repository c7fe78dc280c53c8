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

#include <gtest/gtest.h>

#include <cmath>

#include "mraug/commands.hpp"
#include "mraug/dataset.hpp"
#include "mraug/phantom.hpp"
#include "test_util.hpp"

namespace mraug {
namespace {

// Largest |S(p + 1) - S(p)| * extent over neighbouring pixels of 8-coil maps,
// measured at 2.33 for volumes 0..3 at 64x64, 128x96 and 640x368.
constexpr double kMapSlopeBound = 2.5;

TEST(Phantom, CenterIntensity) {
  // Only the skull and brain ellipses cover the origin: 1.0 - 0.8, and
  // (2.0 - 0.98) / 2 for the halved original intensities.
  const RealGrid p = shepp_logan(65, 65);
  EXPECT_DOUBLE_EQ(p(32, 32), 0.2);
  const RealGrid o = shepp_logan(65, 65, PhantomVariant::kOriginal);
  EXPECT_DOUBLE_EQ(o(32, 32), 0.51);
}

TEST(Phantom, RangeAndSize) {
  const RealGrid p = shepp_logan(64, 48);
  for (double v : p) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
  EXPECT_EQ(*std::max_element(p.begin(), p.end()), 1.0);
  EXPECT_EQ(p(0, 0), 0.0);
  EXPECT_THROW(shepp_logan(31, 64), DomainError);
}

TEST(Phantom, SymmetricVariantIsMirrorSymmetric) {
  const RealGrid p = shepp_logan(64, 64, PhantomVariant::kSymmetric);
  for (std::size_t r = 0; r < 64; ++r)
    for (std::size_t c = 0; c < 64; ++c) EXPECT_EQ(p(r, c), p(r, 63 - c));
  const RealGrid m = shepp_logan(64, 64);
  bool asymmetric = false;
  for (std::size_t r = 0; r < 64; ++r)
    for (std::size_t c = 0; c < 64; ++c) asymmetric = asymmetric || m(r, c) != m(r, 63 - c);
  EXPECT_TRUE(asymmetric);
}

TEST(Phantom, PoseMovesTheObject) {
  PhantomPose pose;
  pose.shift_x = 0.25;
  const RealGrid a = shepp_logan(64, 64);
  const RealGrid b = shepp_logan(64, 64, PhantomVariant::kModified, pose);
  // A shift of 0.25 normalized units is 8 pixels at width 64.
  for (std::size_t r = 0; r < 64; ++r)
    for (std::size_t c = 8; c < 64; ++c) EXPECT_EQ(b(r, c), a(r, c - 8));
}

TEST(Maps, NormalizedAndSmooth) {
  for (std::uint64_t v = 0; v < 3; ++v) {
    const SensitivityMaps m = volume_maps(1, v, 96, 80, 8);
    EXPECT_LT(m.normalization_error(), 1e-9);
    double slope = 0.0;
    for (const auto& g : m.maps())
      for (std::size_t r = 0; r < 96; ++r)
        for (std::size_t c = 0; c < 80; ++c) {
          if (c + 1 < 80) slope = std::max(slope, std::abs(g(r, c + 1) - g(r, c)) * 80.0);
          if (r + 1 < 96) slope = std::max(slope, std::abs(g(r + 1, c) - g(r, c)) * 96.0);
        }
    EXPECT_LT(slope, kMapSlopeBound);
  }
  Rng rng(1);
  const SensitivityMaps single = synth_sensitivities(32, 32, 1, rng);
  for (const auto& v : single[0]) EXPECT_EQ(v, cplx(1.0, 0.0));
}

TEST(Dataset, NoiselessRoundTrip) {
  const auto dir = testing::scratch_dir("noiseless");
  DatasetParams p{.volumes = 1, .slices_per_volume = 2, .height = 48, .width = 40, .coils = 3,
                  .sigma = 0.0, .seed = 5};
  const DatasetMeta meta = synth_dataset(p, dir);
  const DatasetMeta back = read_meta(dir);
  EXPECT_EQ(back.slices.size(), 2u);
  EXPECT_EQ(back.shape(), (GridShape{48, 40}));
  const SensitivityMaps maps = volume_maps(5, 0, 48, 40, 3);
  for (const auto& e : back.slices) {
    const CoilStack k = read_slice(dir, back, e);
    const RealGrid obj = shepp_logan(48, 40, PhantomVariant::kModified, slice_pose(5, 0, e.slice));
    const CoilStack expect = fft2c(apply_sensitivities(to_complex(obj), maps));
    EXPECT_LT(l2_norm(subtract(k, expect)) / l2_norm(expect), 1e-6);
  }
  std::filesystem::remove_all(dir);
}

TEST(Dataset, InjectedNoiseHasConfiguredSigma) {
  const auto dir = testing::scratch_dir("snr");
  const double sigma = 0.01;
  DatasetParams p{.volumes = 1, .slices_per_volume = 2, .height = 96, .width = 96, .coils = 4,
                  .sigma = sigma, .seed = 6};
  const DatasetMeta meta = synth_dataset(p, dir);
  const SensitivityMaps maps = volume_maps(6, 0, 96, 96, 4);
  double ss = 0.0, n = 0.0;
  for (const auto& e : meta.slices) {
    const CoilStack noisy = read_slice(dir, meta, e);
    const CoilStack clean = simulate_slice(6, 0, e.slice, maps, 0.0).kspace;
    for (const auto& g : subtract(noisy, clean))
      for (const auto& v : g) {
        ss += std::norm(v);
        n += 2.0;
      }
  }
  EXPECT_NEAR(std::sqrt(ss / n) / sigma, 1.0, 0.02);
  std::filesystem::remove_all(dir);
}

TEST(Dataset, BytesDependOnlyOnParameters) {
  const auto a = testing::scratch_dir("det_a");
  const auto b = testing::scratch_dir("det_b");
  DatasetParams p{.volumes = 2, .slices_per_volume = 3, .height = 40, .width = 32, .coils = 2,
                  .sigma = 0.01, .seed = 8};
  synth_dataset(p, a, 1);
  synth_dataset(p, b, 4);
  EXPECT_TRUE(testing::same_tree(a, b));
  std::filesystem::remove_all(a);
  std::filesystem::remove_all(b);
}

TEST(Dataset, RawFormatIsInterleavedLittleEndianFloat) {
  const auto dir = testing::scratch_dir("raw");
  ComplexGrid g(1, 2);
  g[0] = cplx(1.0, -2.0);
  g[1] = cplx(0.5, 0.0);
  write_coil_stack(dir / "x.bin", CoilStack({g}));
  const std::string bytes = testing::read_bytes(dir / "x.bin");
  ASSERT_EQ(bytes.size(), 16u);
  const unsigned char expect[16] = {0, 0, 0x80, 0x3f, 0, 0, 0, 0xc0, 0, 0, 0, 0x3f, 0, 0, 0, 0};
  for (int i = 0; i < 16; ++i) EXPECT_EQ(static_cast<unsigned char>(bytes[i]), expect[i]);
  EXPECT_THROW(read_coil_stack(dir / "x.bin", 1, {2, 2}), IoError);
  EXPECT_THROW(read_coil_stack(dir / "missing.bin", 1, {1, 2}), IoError);
  std::filesystem::remove_all(dir);
}

TEST(Manifest, RecordsRoundTrip) {
  ManifestRecord r;
  r.mode = Mode::kObjectLevel;
  r.spec.transforms = {HFlip{},        VFlip{},          Rot90{3},          Rotate{-12.25},
                       Translate{0.03, -0.1}, ScaleIso{1.1}, ScaleAniso{0.8, 1.2}, Shear{3.5, -7.0}};
  r.spec.volume = 2;
  r.spec.slice = 5;
  r.spec.epoch = 17;
  r.spec.p = 0.41234567890123;
  const auto mask = make_random_mask(40, 4, 0.1, 77ull);
  r.mask_seed = mask.seed;
  r.acceleration = 4;
  r.center_fraction = 0.1;
  r.mask = mask_to_string(mask);
  r.kspace_file = "k.bin";
  r.target_file = "t.bin";
  r.coils = 3;
  r.kspace_shape = {48, 40};
  r.target_shape = {32, 32};
  const ManifestRecord back = record_from_json(json::parse(to_json(r).dump()));
  EXPECT_EQ(back.spec, r.spec);
  EXPECT_EQ(back.to_mask(), mask);
  EXPECT_EQ(back.mode, r.mode);
  EXPECT_EQ(back.target_shape, r.target_shape);
}

}  // namespace
}  // namespace mraug
