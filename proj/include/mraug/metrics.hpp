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
#include <limits>
#include <numbers>
#include <span>
#include <vector>

#include "mraug/grid.hpp"

namespace mraug {

inline constexpr std::size_t kSsimWindow = 7;
inline constexpr double kSsimK1 = 0.01;
inline constexpr double kSsimK2 = 0.03;

/// Mean structural similarity over all fully contained 7x7 uniform windows,
/// with sample (N - 1) covariance normalization.
inline double ssim(const RealGrid& x, const RealGrid& ref, double data_range) {
  detail::require_same_shape(x.shape(), ref.shape(), "ssim");
  if (!(data_range > 0.0)) throw DomainError("ssim: data_range must be positive");
  constexpr std::size_t w = kSsimWindow;
  if (x.height() < w || x.width() < w) throw ShapeError("ssim: image smaller than the 7x7 window");

  constexpr double n = static_cast<double>(w * w);
  constexpr double cov_norm = n / (n - 1.0);
  const double c1 = (kSsimK1 * data_range) * (kSsimK1 * data_range);
  const double c2 = (kSsimK2 * data_range) * (kSsimK2 * data_range);

  double total = 0.0;
  std::size_t windows = 0;
  for (std::size_t r0 = 0; r0 + w <= x.height(); ++r0) {
    for (std::size_t c0 = 0; c0 + w <= x.width(); ++c0) {
      double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
      for (std::size_t r = r0; r < r0 + w; ++r) {
        for (std::size_t c = c0; c < c0 + w; ++c) {
          const double a = x(r, c);
          const double b = ref(r, c);
          sx += a;
          sy += b;
          sxx += a * a;
          syy += b * b;
          sxy += a * b;
        }
      }
      const double ux = sx / n;
      const double uy = sy / n;
      const double vx = cov_norm * (sxx / n - ux * ux);
      const double vy = cov_norm * (syy / n - uy * uy);
      const double vxy = cov_norm * (sxy / n - ux * uy);
      total += ((2 * ux * uy + c1) * (2 * vxy + c2)) / ((ux * ux + uy * uy + c1) * (vx + vy + c2));
      ++windows;
    }
  }
  return total / static_cast<double>(windows);
}

inline double nmse(const RealGrid& x, const RealGrid& ref) {
  detail::require_same_shape(x.shape(), ref.shape(), "nmse");
  const double denom = l2_norm_sq(ref);
  const double num = l2_norm_sq(subtract(x, ref));
  if (denom == 0.0) return num == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return num / denom;
}

/// Peak signal-to-noise ratio in dB; identical inputs give +infinity.
inline double psnr(const RealGrid& x, const RealGrid& ref, double data_range) {
  detail::require_same_shape(x.shape(), ref.shape(), "psnr");
  if (!(data_range > 0.0)) throw DomainError("psnr: data_range must be positive");
  const double mse = l2_norm_sq(subtract(x, ref)) / static_cast<double>(x.size());
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(data_range * data_range / mse);
}

// ---------------------------------------------------------------------------
// Noise statistics

inline double standard_normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

/// Asymptotic Kolmogorov survival function with Stephens' small-sample
/// correction, P(D_n > d).
inline double kolmogorov_p_value(double d, std::size_t n) {
  const double sn = std::sqrt(static_cast<double>(n));
  const double lambda = (sn + 0.12 + 0.11 / sn) * d;
  if (lambda < 0.2) return 1.0;
  double sum = 0.0;
  double sign = 1.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = sign * std::exp(-2.0 * k * k * lambda * lambda);
    sum += term;
    if (std::abs(term) < 1e-12 * std::abs(sum)) break;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

/// One-sample KS statistic of already standardized values against N(0, 1).
inline double ks_statistic_normal(std::vector<double> z) {
  std::sort(z.begin(), z.end());
  const double n = static_cast<double>(z.size());
  double d = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double f = standard_normal_cdf(z[i]);
    d = std::max({d, (static_cast<double>(i) + 1.0) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

struct NoiseThresholds {
  double mean_standard_errors = 5.0;
  double variance_asymmetry = 0.05;
  double correlation = 0.02;
  double ks_p_value = 0.01;
};

struct NoiseReport {
  std::size_t samples = 0;
  cplx mean{};
  double var_re = 0.0;
  double var_im = 0.0;
  double correlation = 0.0;
  double ks_statistic = 0.0;
  double ks_p_value = 0.0;
  bool mean_ok = false;
  bool variance_ok = false;
  bool correlation_ok = false;
  bool ks_ok = false;
  bool pass = false;
};

inline constexpr std::size_t kMinNoiseSamples = 10'000;

/// Tests whether complex samples look like i.i.d. circular Gaussian noise:
/// near-zero mean, equal real/imaginary variance, uncorrelated components,
/// and real and imaginary parts (each standardized by its fitted mean and
/// deviation, then pooled) passing a Kolmogorov-Smirnov normality test.
inline NoiseReport validate_noise(std::span<const cplx> samples, NoiseThresholds th = {}) {
  if (samples.size() < kMinNoiseSamples) {
    throw DomainError("validate_noise: need at least 10^4 samples, got " +
                      std::to_string(samples.size()));
  }
  NoiseReport rep;
  rep.samples = samples.size();
  const double n = static_cast<double>(samples.size());
  cplx sum{};
  for (const auto& v : samples) sum += v;
  rep.mean = sum / n;
  double srr = 0, sii = 0, sri = 0;
  for (const auto& v : samples) {
    const double a = v.real() - rep.mean.real();
    const double b = v.imag() - rep.mean.imag();
    srr += a * a;
    sii += b * b;
    sri += a * b;
  }
  rep.var_re = srr / (n - 1.0);
  rep.var_im = sii / (n - 1.0);
  const double denom = std::sqrt(srr * sii);
  rep.correlation = denom > 0.0 ? sri / denom : 1.0;

  const double sd_re = std::sqrt(rep.var_re);
  const double sd_im = std::sqrt(rep.var_im);
  if (sd_re > 0.0 && sd_im > 0.0) {
    std::vector<double> z;
    z.reserve(2 * samples.size());
    for (const auto& v : samples) {
      z.push_back((v.real() - rep.mean.real()) / sd_re);
      z.push_back((v.imag() - rep.mean.imag()) / sd_im);
    }
    rep.ks_statistic = ks_statistic_normal(std::move(z));
    rep.ks_p_value = kolmogorov_p_value(rep.ks_statistic, 2 * samples.size());
  } else {
    rep.ks_statistic = 1.0;
    rep.ks_p_value = 0.0;
  }

  const double se_re = sd_re / std::sqrt(n);
  const double se_im = sd_im / std::sqrt(n);
  rep.mean_ok = std::abs(rep.mean.real()) <= th.mean_standard_errors * se_re &&
                std::abs(rep.mean.imag()) <= th.mean_standard_errors * se_im;
  const double vmax = std::max(rep.var_re, rep.var_im);
  rep.variance_ok = vmax > 0.0 && std::abs(rep.var_re - rep.var_im) <= th.variance_asymmetry * vmax;
  rep.correlation_ok = std::abs(rep.correlation) < th.correlation;
  rep.ks_ok = rep.ks_p_value >= th.ks_p_value;
  rep.pass = rep.mean_ok && rep.variance_ok && rep.correlation_ok && rep.ks_ok;
  return rep;
}

/// All samples of a set of coil stacks, coil by coil, flattened.
inline std::vector<cplx> flatten(std::span<const CoilStack> stacks) {
  std::vector<cplx> out;
  for (const auto& s : stacks)
    for (const auto& g : s) out.insert(out.end(), g.begin(), g.end());
  return out;
}

struct CoilCovariance {
  std::size_t coils = 0;
  std::size_t samples = 0;
  std::vector<cplx> covariance;       ///< row-major coils x coils, E[(a_i - m_i) conj(a_j - m_j)]
  std::vector<double> standard_error;  ///< of each entry's estimate

  cplx at(std::size_t i, std::size_t j) const { return covariance[i * coils + j]; }
  double se(std::size_t i, std::size_t j) const { return standard_error[i * coils + j]; }

  /// Largest |C_ij| / SE_ij over off-diagonal entries.
  double max_offdiagonal_z() const {
    double z = 0.0;
    for (std::size_t i = 0; i < coils; ++i)
      for (std::size_t j = 0; j < coils; ++j)
        if (i != j && se(i, j) > 0.0) z = std::max(z, std::abs(at(i, j)) / se(i, j));
    return z;
  }

  /// Largest off-diagonal |C_ij| / sqrt(C_ii C_jj).
  double max_offdiagonal_correlation() const {
    double r = 0.0;
    for (std::size_t i = 0; i < coils; ++i)
      for (std::size_t j = 0; j < coils; ++j)
        if (i != j) r = std::max(r, std::abs(at(i, j)) / std::sqrt(at(i, i).real() * at(j, j).real()));
    return r;
  }
};

inline constexpr std::size_t kCovarianceBandRows = 8;

/// Empirical cross-coil covariance of per-pixel noise pooled over a set of
/// noise stacks. Standard errors come from batch means over bands of eight
/// image rows, which keeps them honest when neighbouring pixels are
/// correlated (e.g. after interpolation).
inline CoilCovariance cross_coil_covariance(std::span<const CoilStack> stacks) {
  if (stacks.empty()) throw DomainError("cross_coil_covariance: no noise stacks");
  const std::size_t nc = stacks.front().coils();
  std::size_t total = 0;
  for (const auto& s : stacks) {
    if (s.coils() != nc) throw ShapeError("cross_coil_covariance: coil count mismatch");
    total += s.shape().size();
  }
  if (total < kMinNoiseSamples) {
    throw DomainError("cross_coil_covariance: need at least 10^4 pixel samples per coil pair");
  }

  std::vector<cplx> mean(nc);
  for (const auto& s : stacks)
    for (std::size_t i = 0; i < nc; ++i)
      for (const auto& v : s[i]) mean[i] += v;
  for (auto& m : mean) m /= static_cast<double>(total);

  struct Batch {
    std::size_t n = 0;
    std::vector<cplx> sum;
  };
  std::vector<Batch> batches;
  for (const auto& s : stacks) {
    const std::size_t h = s.shape().height;
    const std::size_t w = s.shape().width;
    const std::size_t bands = std::max<std::size_t>(1, h / kCovarianceBandRows);
    for (std::size_t b = 0; b < bands; ++b) {
      const std::size_t r0 = b * kCovarianceBandRows;
      const std::size_t r1 = b + 1 == bands ? h : r0 + kCovarianceBandRows;
      Batch batch;
      batch.sum.assign(nc * nc, cplx{});
      for (std::size_t r = r0; r < r1; ++r) {
        for (std::size_t c = 0; c < w; ++c) {
          for (std::size_t i = 0; i < nc; ++i) {
            const cplx ai = s[i](r, c) - mean[i];
            for (std::size_t j = 0; j < nc; ++j) {
              batch.sum[i * nc + j] += ai * std::conj(s[j](r, c) - mean[j]);
            }
          }
        }
        batch.n += w;
      }
      batches.push_back(std::move(batch));
    }
  }

  CoilCovariance out;
  out.coils = nc;
  out.samples = total;
  out.covariance.assign(nc * nc, cplx{});
  out.standard_error.assign(nc * nc, 0.0);
  for (const auto& b : batches)
    for (std::size_t e = 0; e < nc * nc; ++e) out.covariance[e] += b.sum[e];
  for (auto& v : out.covariance) v /= static_cast<double>(total);

  const double nb = static_cast<double>(batches.size());
  if (batches.size() > 1) {
    for (std::size_t e = 0; e < nc * nc; ++e) {
      double acc = 0.0;
      for (const auto& b : batches) {
        const double wgt = static_cast<double>(b.n) / static_cast<double>(total);
        acc += wgt * wgt * std::norm(b.sum[e] / static_cast<double>(b.n) - out.covariance[e]);
      }
      out.standard_error[e] = std::sqrt(acc * nb / (nb - 1.0));
    }
  }
  return out;
}

}  // namespace mraug
