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

#include "mraug/metrics.hpp"
#include "mraug/transforms.hpp"
#include "test_util.hpp"

namespace mraug {
namespace {

using testing::max_abs_diff;
using testing::random_grid;
using testing::random_stack;

CoilStack one(const ComplexGrid& g) { return CoilStack({g}); }

TransformSpec spec_of(std::vector<TransformKind> t) {
  TransformSpec s;
  s.transforms = std::move(t);
  return s;
}

// Smooth test image: an off-center Gaussian blob.
ComplexGrid blob(std::size_t h, std::size_t w, double sigma = 6.0) {
  ComplexGrid g(h, w);
  for (std::size_t r = 0; r < h; ++r)
    for (std::size_t c = 0; c < w; ++c) {
      const double dy = static_cast<double>(r) - 0.45 * static_cast<double>(h);
      const double dx = static_cast<double>(c) - 0.55 * static_cast<double>(w);
      g(r, c) = cplx(std::exp(-(dx * dx + dy * dy) / (2 * sigma * sigma)), 0.5);
    }
  return g;
}

TEST(PixelTransforms, FlipsMatchIndexDefinitions) {
  Rng rng(1);
  const ComplexGrid g = random_grid({5, 7}, rng);
  const ComplexGrid h = apply_pixel_preserving(one(g), HFlip{})[0];
  const ComplexGrid v = apply_pixel_preserving(one(g), VFlip{})[0];
  for (std::size_t r = 0; r < 5; ++r)
    for (std::size_t c = 0; c < 7; ++c) {
      EXPECT_EQ(h(r, c), g(r, 6 - c));
      EXPECT_EQ(v(r, c), g(4 - r, c));
    }
  EXPECT_EQ(apply_pixel_preserving(one(h), HFlip{})[0], g);
}

TEST(PixelTransforms, QuarterTurnsFollowNumpyConvention) {
  ComplexGrid g(2, 3);
  for (std::size_t i = 0; i < 6; ++i) g[i] = static_cast<double>(i);
  // numpy.rot90([[0,1,2],[3,4,5]]) == [[2,5],[1,4],[0,3]]
  const ComplexGrid r = detail::rot90(g, 1);
  ASSERT_EQ(r.shape(), (GridShape{3, 2}));
  const std::vector<double> expect = {2, 5, 1, 4, 0, 3};
  for (std::size_t i = 0; i < 6; ++i) EXPECT_EQ(r[i].real(), expect[i]);
  Rng rng(2);
  const ComplexGrid s = random_grid({6, 6}, rng);
  EXPECT_EQ(detail::rot90(detail::rot90(s, 1), 3), s);
  EXPECT_EQ(detail::rot90(s, 4), s);
  EXPECT_EQ(detail::rot90(s, 2), detail::rot90(detail::rot90(s, 1), 1));
}

TEST(PixelTransforms, IntegerTranslateIsCircularShift) {
  Rng rng(3);
  const ComplexGrid g = random_grid({8, 10}, rng);
  const Translate t{0.3, -0.25};  // 3 columns right, 2 rows up
  ASSERT_TRUE(is_pixel_preserving(t, g.shape()));
  const ComplexGrid out = apply_pixel_preserving(one(g), t)[0];
  for (std::size_t r = 0; r < 8; ++r)
    for (std::size_t c = 0; c < 10; ++c) EXPECT_EQ(out((r + 6) % 8, (c + 3) % 10), g(r, c));
  EXPECT_FALSE(is_pixel_preserving(Translate{0.05, 0.0}, g.shape()));
}

TEST(PixelTransforms, OddQuarterTurnOnRectangleIsRejected) {
  EXPECT_FALSE(is_pixel_preserving(Rot90{1}, {4, 6}));
  EXPECT_TRUE(is_pixel_preserving(Rot90{2}, {4, 6}));
  EXPECT_THROW(compose(CoilStack(1, {4, 6}), spec_of({Rot90{3}})), DomainError);
}

TEST(Affine, IdentityWarpIsExact) {
  Rng rng(4);
  const CoilStack s = random_stack(2, {12, 9}, rng);
  for (unsigned f : {1u, 2u, 3u}) {
    const CoilStack out = compose(s, spec_of({Rotate{0.0}, ScaleIso{1.0}}), {f});
    for (std::size_t i = 0; i < 2; ++i) EXPECT_LT(max_abs_diff(out[i], s[i]), 1e-12);
  }
}

TEST(Affine, NinetyDegreeRotationAgreesWithQuarterTurn) {
  Rng rng(5);
  const ComplexGrid g = random_grid({10, 10}, rng);
  const ComplexGrid a = compose(one(g), spec_of({Rotate{90.0}}))[0];
  EXPECT_LT(max_abs_diff(a, detail::rot90(g, 1)), 1e-9);
  const ComplexGrid b = compose(one(g), spec_of({Rotate{-90.0}}))[0];
  EXPECT_LT(max_abs_diff(b, detail::rot90(g, 3)), 1e-9);
}

TEST(Affine, RotationRoundTripIsCloseInInterior) {
  const ComplexGrid g = blob(48, 48);
  const ComplexGrid back =
      compose(compose(one(g), spec_of({Rotate{23.0}})), spec_of({Rotate{-23.0}}))[0];
  double err = 0, ref = 0;
  for (std::size_t r = 12; r < 36; ++r)
    for (std::size_t c = 12; c < 36; ++c) {
      err = std::max(err, std::abs(back(r, c) - g(r, c)));
      ref = std::max(ref, std::abs(g(r, c)));
    }
  EXPECT_LT(err / ref, 2e-2);
}

TEST(Affine, IsotropicScalingScalesDiskRadius) {
  const std::size_t n = 65;
  ComplexGrid disk(n, n);
  const double c0 = 32.0;
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c) {
      const double d = std::hypot(static_cast<double>(r) - c0, static_cast<double>(c) - c0);
      disk(r, c) = d <= 10.0 ? 1.0 : 0.0;
    }
  const ComplexGrid big = compose(one(disk), spec_of({ScaleIso{1.5}}))[0];
  // Half-maximum crossing along the center row.
  std::size_t edge = 32;
  while (edge + 1 < n && big(32, edge + 1).real() >= 0.5) ++edge;
  EXPECT_NEAR(static_cast<double>(edge) - c0, 15.0, 1.0);
}

TEST(Affine, FractionalTranslationShiftsSmoothContent) {
  // Cubic convolution reproduces quadratics, so a half-pixel shift of a
  // quadratic ramp is exact away from the borders.
  ComplexGrid g(20, 20);
  for (std::size_t r = 0; r < 20; ++r)
    for (std::size_t c = 0; c < 20; ++c) g(r, c) = 0.01 * std::pow(static_cast<double>(c), 2);
  const ComplexGrid out = apply_affine(one(g), Translate{0.025, 0.0}, {1})[0];
  for (std::size_t r = 4; r < 16; ++r)
    for (std::size_t c = 4; c < 16; ++c) {
      EXPECT_NEAR(out(r, c).real(), 0.01 * std::pow(static_cast<double>(c) - 0.5, 2), 1e-12);
    }
}

TEST(Affine, DegenerateMatrixIsRejected) {
  EXPECT_THROW(compose(CoilStack(1, {8, 8}), spec_of({Shear{45.0, 45.0}})), DomainError);
  EXPECT_THROW(compose(CoilStack(1, {8, 8}), spec_of({ScaleAniso{1.0, 0.0}})), DomainError);
}

TEST(Affine, ActsIdenticallyOnRealAndImaginaryParts) {
  Rng rng(6);
  const ComplexGrid g = random_grid({16, 14}, rng);
  RealGrid re(g.shape()), im(g.shape());
  for (std::size_t i = 0; i < g.size(); ++i) {
    re[i] = g[i].real();
    im[i] = g[i].imag();
  }
  const auto spec = spec_of({HFlip{}, Rotate{17.0}, Shear{5.0, -3.0}});
  const ComplexGrid out = compose(one(g), spec)[0];
  const RealGrid ore = compose(re, spec);
  const RealGrid oim = compose(im, spec);
  for (std::size_t i = 0; i < g.size(); ++i) {
    EXPECT_NEAR(out[i].real(), ore[i], 1e-12);
    EXPECT_NEAR(out[i].imag(), oim[i], 1e-12);
  }
}

TEST(Affine, ComposedWarpEqualsSequentialMatrices) {
  const Affine2D a = affine_matrix(Rotate{30.0}, {8, 8});
  const Affine2D b = affine_matrix(ScaleAniso{1.2, 0.9}, {8, 8});
  const Affine2D ab = b.after(a);
  const double th = std::acos(-1.0) / 6.0;
  EXPECT_NEAR(ab.linear[0], 1.2 * std::cos(th), 1e-15);
  EXPECT_NEAR(ab.linear[1], 1.2 * std::sin(th), 1e-15);
  EXPECT_NEAR(ab.linear[2], -0.9 * std::sin(th), 1e-15);
  EXPECT_NEAR(ab.det(), 1.2 * 0.9, 1e-15);
}

// Brute-force oracle: column q of the (linear) warp is its response to the
// impulse at q.
RealGrid impulse_gain(GridShape shape, const TransformSpec& spec, const InterpConfig& interp) {
  RealGrid acc(shape);
  for (std::size_t q = 0; q < shape.size(); ++q) {
    ComplexGrid e(shape);
    e[q] = 1.0;
    const ComplexGrid col = compose(one(e), spec, interp)[0];
    for (std::size_t p = 0; p < shape.size(); ++p) acc[p] += std::norm(col[p]);
  }
  for (auto& v : acc) v = std::sqrt(v);
  return acc;
}

TEST(NoiseGain, MatchesImpulseResponses) {
  const GridShape shape{14, 11};
  for (unsigned f : {1u, 2u}) {
    const auto spec = spec_of({VFlip{}, Rotate{37.0}, Translate{0.07, -0.03}, ScaleAniso{1.1, 0.85},
                               Shear{6.0, -4.0}});
    const RealGrid exact = impulse_gain(shape, spec, {f});
    const RealGrid fast = noise_gain(shape, spec, {f});
    EXPECT_LT(max_abs_diff(exact, fast), 1e-12) << "upsample " << f;
  }
  const RealGrid ones = noise_gain(shape, spec_of({HFlip{}, Translate{0.0, 2.0 / 14.0}}));
  for (double v : ones) EXPECT_EQ(v, 1.0);
}

TEST(NoiseGain, AffineNoiseHasGaussianMarginals) {
  // Interpolation mixes neighbouring samples with pixel-dependent weights, so
  // the output deviation varies across the image. Divided by that exact
  // deviation, the output noise is again standard Gaussian at every pixel.
  const GridShape shape{24, 24};
  const auto spec = spec_of({Rotate{31.0}, ScaleIso{0.9}, Shear{8.0, 0.0}});
  const RealGrid gain = noise_gain(shape, spec);
  const auto [lo, hi] = std::minmax_element(gain.begin(), gain.end());
  EXPECT_GT(*hi / *lo, 1.1);

  Rng rng(7);
  std::vector<cplx> standardized;
  std::vector<cplx> raw;
  for (int rep = 0; rep < 200; ++rep) {
    const CoilStack out = compose(random_stack(1, shape, rng), spec);
    for (std::size_t p = 0; p < shape.size(); ++p) {
      standardized.push_back(out[0][p] / gain[p]);
      raw.push_back(out[0][p]);
    }
  }
  ASSERT_GE(standardized.size(), 100'000u);
  const NoiseReport ok = validate_noise(standardized);
  EXPECT_TRUE(ok.pass) << "ks p " << ok.ks_p_value << " corr " << ok.correlation;
  EXPECT_NEAR(ok.var_re, 1.0, 0.02);
  EXPECT_FALSE(validate_noise(raw).ks_ok);
}

}  // namespace
}  // namespace mraug
