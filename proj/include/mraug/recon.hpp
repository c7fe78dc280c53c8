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
#include <functional>
#include <limits>
#include <random>
#include <stdexcept>
#include <vector>

#include "mraug/acquisition.hpp"
#include "mraug/grid.hpp"
#include "mraug/random.hpp"

namespace mraug {

class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline RealGrid zero_filled(const CoilStack& kspace, const UndersamplingMask& mask, GridShape crop) {
  return center_crop(rss(adjoint(kspace, mask)), crop);
}

/// f(x) = sum_i ||A x_i - k_i||^2 + lambda * sum_i TV_mu(x_i), where TV_mu is
/// the anisotropic total variation with each |d| replaced by
/// sqrt(|d|^2 + mu^2) - mu. Gradients are real gradients written as complex
/// numbers: the directional derivative along v is Re <grad, v>.
class TvObjective {
 public:
  TvObjective(CoilStack kspace, UndersamplingMask mask, double lambda, double mu)
      : kspace_(std::move(kspace)), mask_(std::move(mask)), lambda_(lambda), mu_(mu) {
    if (lambda_ < 0.0) throw DomainError("tv: lambda must be non-negative");
    if (!(mu_ > 0.0)) throw DomainError("tv: smoothing mu must be positive");
  }

  double lambda() const { return lambda_; }
  double mu() const { return mu_; }
  const CoilStack& kspace() const { return kspace_; }
  const UndersamplingMask& mask() const { return mask_; }

  double data_term(const CoilStack& x) const {
    return std::pow(l2_norm(subtract(forward(x, mask_), kspace_)), 2);
  }

  double tv_term(const CoilStack& x) const {
    double acc = 0.0;
    for (const auto& g : x) {
      for_each_difference(g, [&](std::size_t, std::size_t, cplx d) {
        acc += std::sqrt(std::norm(d) + mu_ * mu_) - mu_;
      });
    }
    return acc;
  }

  double value(const CoilStack& x) const {
    return data_term(x) + (lambda_ > 0.0 ? lambda_ * tv_term(x) : 0.0);
  }

  CoilStack data_gradient(const CoilStack& x) const {
    return scale(adjoint(subtract(forward(x, mask_), kspace_), mask_), cplx(2.0, 0.0));
  }

  CoilStack tv_gradient(const CoilStack& x) const {
    std::vector<ComplexGrid> out;
    out.reserve(x.coils());
    for (const auto& g : x) {
      ComplexGrid grad(g.shape());
      for_each_difference(g, [&](std::size_t from, std::size_t to, cplx d) {
        const cplx u = d / std::sqrt(std::norm(d) + mu_ * mu_);
        grad[to] += u;
        grad[from] -= u;
      });
      out.push_back(std::move(grad));
    }
    return CoilStack(std::move(out));
  }

  CoilStack gradient(const CoilStack& x) const {
    CoilStack g = data_gradient(x);
    if (lambda_ > 0.0) g = add(g, scale(tv_gradient(x), cplx(lambda_, 0.0)));
    return g;
  }

 private:
  // Calls fn(from, to, x[to] - x[from]) for every horizontal and vertical
  // forward difference inside the grid.
  template <typename Fn>
  static void for_each_difference(const ComplexGrid& g, Fn&& fn) {
    const std::size_t h = g.height();
    const std::size_t w = g.width();
    for (std::size_t r = 0; r < h; ++r) {
      for (std::size_t c = 0; c + 1 < w; ++c) {
        const std::size_t a = r * w + c;
        fn(a, a + 1, g[a + 1] - g[a]);
      }
    }
    for (std::size_t r = 0; r + 1 < h; ++r) {
      for (std::size_t c = 0; c < w; ++c) {
        const std::size_t a = r * w + c;
        fn(a, a + w, g[a + w] - g[a]);
      }
    }
  }

  CoilStack kspace_;
  UndersamplingMask mask_;
  double lambda_;
  double mu_;
};

struct TvParams {
  double lambda = 1e-3;
  unsigned iters = 100;
  double step = 0.5;
  /// Smoothing relative to the data range of the zero-filled image.
  double mu_relative = 1e-6;
  unsigned max_halvings = 60;
};

struct TvResult {
  RealGrid image;                  ///< center-cropped RSS of the final iterate
  CoilStack coils;                 ///< final iterate
  std::vector<double> objective;   ///< value before the first and after every accepted step
  bool converged_early = false;
};

/// Gradient descent with step halving: every accepted step lowers the
/// objective. The trial step starts at min(step, 2 * last accepted step).
inline TvResult tv_reconstruct(const CoilStack& kspace, const UndersamplingMask& mask,
                               const TvParams& params, GridShape crop) {
  if (params.iters < 1) throw DomainError("tv_reconstruct: iters must be >= 1");
  if (!(params.step > 0.0)) throw DomainError("tv_reconstruct: step must be positive");
  CoilStack x = adjoint(kspace, mask);
  double range = 0.0;
  for (double v : rss(x)) range = std::max(range, v);
  const double mu = params.mu_relative * (range > 0.0 ? range : 1.0);
  const TvObjective objective(kspace, mask, params.lambda, mu);

  TvResult res;
  double f = objective.value(x);
  res.objective.push_back(f);
  double step = params.step;
  for (unsigned it = 0; it < params.iters; ++it) {
    const CoilStack g = objective.gradient(x);
    if (l2_norm(g) == 0.0) {
      res.converged_early = true;
      break;
    }
    bool accepted = false;
    double best_trial = std::numeric_limits<double>::infinity();
    double t = std::min(params.step, 2.0 * step);
    for (unsigned k = 0; k <= params.max_halvings; ++k, t *= 0.5) {
      CoilStack trial = subtract(x, scale(g, cplx(t, 0.0)));
      const double ft = objective.value(trial);
      if (!std::isfinite(ft)) continue;
      best_trial = std::min(best_trial, ft);
      if (ft <= f) {
        x = std::move(trial);
        f = ft;
        step = t;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      if (best_trial > f + 1e-12 * std::abs(f)) {
        throw DivergenceError("tv_reconstruct: objective increases after maximal step halving");
      }
      res.converged_early = true;
      break;
    }
    res.objective.push_back(f);
  }
  res.image = center_crop(rss(x), crop);
  res.coils = std::move(x);
  return res;
}

/// Largest relative deviation between the analytic directional derivative
/// Re <gradient(x0), v> and the central difference
/// (f(x0 + eps v) - f(x0 - eps v)) / (2 eps) over random complex directions.
inline double gradient_check(const std::function<double(const CoilStack&)>& value,
                             const std::function<CoilStack(const CoilStack&)>& gradient,
                             const CoilStack& x0, Rng& rng, unsigned directions = 10,
                             double eps = 1e-5) {
  std::normal_distribution<double> normal(0.0, 1.0);
  const CoilStack g = gradient(x0);
  double worst = 0.0;
  for (unsigned d = 0; d < directions; ++d) {
    CoilStack v(x0.coils(), x0.shape());
    for (auto& grid : v)
      for (auto& s : grid) s = cplx(normal(rng), normal(rng));
    v = scale(v, cplx(1.0 / l2_norm(v), 0.0));
    const double fd = (value(add(x0, scale(v, cplx(eps, 0.0)))) -
                       value(subtract(x0, scale(v, cplx(eps, 0.0))))) /
                      (2.0 * eps);
    const double an = inner(g, v).real();
    const double denom = std::max({std::abs(fd), std::abs(an), 1e-300});
    worst = std::max(worst, std::abs(fd - an) / denom);
  }
  return worst;
}

inline double gradient_check(const TvObjective& objective, const CoilStack& x0, Rng& rng,
                             unsigned directions = 10, double eps = 1e-5) {
  return gradient_check([&](const CoilStack& x) { return objective.value(x); },
                        [&](const CoilStack& x) { return objective.gradient(x); }, x0, rng,
                        directions, eps);
}

}  // namespace mraug
