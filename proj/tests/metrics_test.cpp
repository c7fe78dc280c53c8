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
#include <random>

#include "mraug/metrics.hpp"
#include "test_util.hpp"

namespace mraug {
namespace {

// Reference values from scikit-image's structural_similarity(win_size=7,
// data_range=1.0), which uses the same window and sample covariance.
constexpr double kCheckerboardSsim = -0.9956486711846583;
constexpr double kWaveSsim = 0.8676975892809266;
// scipy.special.kolmogorov(1.0)
constexpr double kKolmogorovAtOne = 0.26999967167735456;

TEST(Ssim, IdenticalInputsGiveOne) {
  Rng rng(1);
  const RealGrid x = testing::random_real({20, 20}, rng);
  EXPECT_EQ(ssim(x, x, 1.0), 1.0);
  EXPECT_EQ(ssim(x, x, 7.5), 1.0);
}

TEST(Ssim, CheckerboardAgainstInverse) {
  RealGrid x(16, 16), y(16, 16);
  for (std::size_t r = 0; r < 16; ++r)
    for (std::size_t c = 0; c < 16; ++c) {
      x(r, c) = static_cast<double>((r + c) % 2);
      y(r, c) = 1.0 - x(r, c);
    }
  EXPECT_NEAR(ssim(x, y, 1.0), kCheckerboardSsim, 1e-12);
}

TEST(Ssim, SmoothPairMatchesReference) {
  RealGrid x(20, 24), y(20, 24);
  for (std::size_t r = 0; r < 20; ++r)
    for (std::size_t c = 0; c < 24; ++c) {
      const double rr = static_cast<double>(r), cc = static_cast<double>(c);
      x(r, c) = (std::sin(0.3 * rr) * std::cos(0.17 * cc) + 1.0) / 2.0;
      y(r, c) = x(r, c) + 0.1 * std::cos(0.9 * rr + 0.4 * cc);
    }
  EXPECT_NEAR(ssim(y, x, 1.0), kWaveSsim, 1e-12);
  EXPECT_NEAR(ssim(x, y, 1.0), kWaveSsim, 1e-12);
}

TEST(Ssim, DecreasesWithNoiseLevel) {
  Rng rng(2);
  const RealGrid x = testing::random_real({48, 48}, rng);
  std::normal_distribution<double> n(0.0, 1.0);
  RealGrid z(x.shape());
  for (auto& v : z) v = n(rng);
  double prev = 1.0;
  for (double sd : {0.01, 0.02, 0.04}) {
    RealGrid y = x;
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += sd * z[i];
    const double s = ssim(y, x, 1.0);
    EXPECT_LT(s, prev);
    prev = s;
  }
}

TEST(Ssim, RejectsBadInputs) {
  EXPECT_THROW(ssim(RealGrid(8, 8), RealGrid(8, 9), 1.0), ShapeError);
  EXPECT_THROW(ssim(RealGrid(8, 8), RealGrid(8, 8), 0.0), DomainError);
}

TEST(Psnr, ConstantOffset) {
  Rng rng(3);
  const RealGrid ref = testing::random_real({10, 10}, rng);
  RealGrid x = ref;
  for (auto& v : x) v += 0.1;
  EXPECT_NEAR(psnr(x, ref, 1.0), 20.0, 1e-9);
  EXPECT_TRUE(std::isinf(psnr(ref, ref, 1.0)));
}

TEST(Nmse, ZeroForIdenticalAndScaleCovariant) {
  Rng rng(4);
  const RealGrid a = testing::random_real({10, 10}, rng);
  const RealGrid b = testing::random_real({10, 10}, rng);
  EXPECT_EQ(nmse(a, a), 0.0);
  RealGrid a3 = a, b3 = b;
  for (auto& v : a3) v *= 3.0;
  for (auto& v : b3) v *= 3.0;
  EXPECT_NEAR(nmse(a3, b3), nmse(a, b), 1e-14);
  EXPECT_THROW(nmse(a, RealGrid(5, 5)), ShapeError);
}

TEST(Kolmogorov, SurvivalFunctionMatchesReference) {
  const std::size_t n = 400;
  const double d = 1.0 / (20.0 + 0.12 + 0.11 / 20.0);
  EXPECT_NEAR(kolmogorov_p_value(d, n), kKolmogorovAtOne, 1e-12);
  EXPECT_EQ(kolmogorov_p_value(0.0, n), 1.0);
  EXPECT_LT(kolmogorov_p_value(0.5, n), 1e-30);
}

TEST(ValidateNoise, AcceptsCircularGaussian) {
  Rng rng(5);
  std::normal_distribution<double> n(0.0, 0.7);
  std::vector<cplx> s(50'000);
  for (auto& v : s) v = cplx(n(rng), n(rng));
  const NoiseReport r = validate_noise(s);
  EXPECT_TRUE(r.pass);
  EXPECT_GT(r.ks_p_value, 0.01);
}

TEST(ValidateNoise, RejectsUniformNoise) {
  Rng rng(6);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<cplx> s(50'000);
  for (auto& v : s) v = cplx(u(rng), u(rng));
  const NoiseReport r = validate_noise(s);
  EXPECT_TRUE(r.variance_ok);
  EXPECT_TRUE(r.correlation_ok);
  EXPECT_FALSE(r.ks_ok);
  EXPECT_FALSE(r.pass);
}

TEST(ValidateNoise, RejectsCorrelatedAndAsymmetricNoise) {
  Rng rng(7);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<cplx> corr(20'000), asym(20'000);
  for (std::size_t i = 0; i < corr.size(); ++i) {
    const double a = n(rng), b = n(rng);
    corr[i] = cplx(a, 0.2 * a + b);
    asym[i] = cplx(a, 1.2 * b);
  }
  EXPECT_FALSE(validate_noise(corr).correlation_ok);
  EXPECT_FALSE(validate_noise(asym).variance_ok);
}

TEST(ValidateNoise, RequiresEnoughSamples) {
  std::vector<cplx> s(9'999);
  EXPECT_THROW(validate_noise(s), DomainError);
}

TEST(CoilCovariance, IndependentCoils) {
  Rng rng(8);
  const double sigma = 0.5;
  std::vector<CoilStack> stacks;
  for (int i = 0; i < 4; ++i) stacks.push_back(testing::random_stack(4, {64, 64}, rng, sigma));
  const CoilCovariance c = cross_coil_covariance(stacks);
  EXPECT_LT(c.max_offdiagonal_z(), 3.0);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_NEAR(c.at(i, i).real() / (2 * sigma * sigma), 1.0, 0.02);
  }
}

TEST(CoilCovariance, DetectsSharedNoise) {
  Rng rng(9);
  std::vector<CoilStack> stacks;
  for (int i = 0; i < 4; ++i) {
    CoilStack s = testing::random_stack(3, {64, 64}, rng);
    for (std::size_t p = 0; p < s[0].size(); ++p) s[1][p] = 0.6 * s[0][p] + 0.8 * s[1][p];
    stacks.push_back(std::move(s));
  }
  const CoilCovariance c = cross_coil_covariance(stacks);
  EXPECT_GT(c.max_offdiagonal_z(), 5.0);
  EXPECT_NEAR(c.max_offdiagonal_correlation(), 0.6, 0.03);
}

TEST(CoilCovariance, RequiresEnoughSamples) {
  std::vector<CoilStack> stacks = {CoilStack(2, {50, 50})};
  EXPECT_THROW(cross_coil_covariance(stacks), DomainError);
}

}  // namespace
}  // namespace mraug
