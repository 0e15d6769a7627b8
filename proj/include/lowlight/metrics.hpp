/* Copyright 2026 The Lowlight Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#ifndef LOWLIGHT_METRICS_HPP_
#define LOWLIGHT_METRICS_HPP_

#include <cmath>
#include <functional>
#include <string>

#include <Eigen/Core>

#include "lowlight/error.hpp"
#include "lowlight/image.hpp"

namespace lowlight {

struct SSIMConfig {
  int window = 11;
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
  double dynamic_range = 255.0;

  void validate() const {
    if (window < 3 || window % 2 == 0) {
      throw ValidationError("SSIM window must be odd and >= 3");
    }
    if (!(sigma > 0.0)) throw ValidationError("SSIM sigma must be positive");
    if (!(k1 > 0.0) || !(k2 > 0.0)) throw ValidationError("SSIM k1, k2 must be positive");
    if (!(dynamic_range > 0.0)) throw ValidationError("SSIM dynamic_range must be positive");
  }
};

struct LossWeights {
  double lambda1 = 1.0;
  double lambda2 = 1.0;

  void validate() const {
    if (!(lambda1 >= 0.0) || !(lambda2 >= 0.0)) {
      throw ValidationError("loss weights must be nonnegative");
    }
  }
};

// Perceptual feature distance hook (e.g. a VGG feature-map L2). Implementations
// must return a nonnegative value, be symmetric, and give 0 for identical
// inputs.
using FeatureDistance =
    std::function<double(const ImageBuffer&, const ImageBuffer&)>;

namespace detail {

template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> gaussian_kernel(int window, Scalar sigma) {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> k(window);
  const int half = window / 2;
  for (int i = 0; i < window; ++i) {
    const Scalar t = static_cast<Scalar>(i - half);
    k(i) = std::exp(-(t * t) / (Scalar(2) * sigma * sigma));
  }
  return k / k.sum();
}

// Separable "valid" correlation: output is (rows - n + 1) x (cols - n + 1).
template <typename Scalar>
Plane<Scalar> filter_valid(const Plane<Scalar>& in,
                           const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& kernel) {
  const Eigen::Index n = kernel.size();
  const Eigen::Index out_rows = in.rows() - n + 1;
  const Eigen::Index out_cols = in.cols() - n + 1;
  Plane<Scalar> horizontal = Plane<Scalar>::Zero(in.rows(), out_cols);
  for (Eigen::Index i = 0; i < n; ++i) {
    horizontal += kernel(i) * in.middleCols(i, out_cols);
  }
  Plane<Scalar> out = Plane<Scalar>::Zero(out_rows, out_cols);
  for (Eigen::Index i = 0; i < n; ++i) {
    out += kernel(i) * horizontal.middleRows(i, out_rows);
  }
  return out;
}

}  // namespace detail

// Mean of (a/255 - b/255)^2 over every sample.
template <typename Scalar = double>
Scalar mse(const ImageBuffer& a, const ImageBuffer& b) {
  require_same_shape(a, b, "mse");
  Scalar sum = 0;
  const auto da = a.data();
  const auto db = b.data();
  for (std::size_t i = 0; i < da.size(); ++i) {
    const Scalar d = static_cast<Scalar>(static_cast<int>(da[i]) - static_cast<int>(db[i]));
    sum += d * d;
  }
  return sum / (Scalar(255) * Scalar(255) * static_cast<Scalar>(da.size()));
}

// SSIM of one channel pair: Gaussian-weighted local statistics, averaged over
// every window position that lies fully inside the image.
template <typename Scalar = double>
Scalar ssim_plane(const Plane<Scalar>& a, const Plane<Scalar>& b,
                  const SSIMConfig& cfg = {}) {
  const auto kernel = detail::gaussian_kernel<Scalar>(cfg.window, static_cast<Scalar>(cfg.sigma));
  const Scalar c1 = std::pow(static_cast<Scalar>(cfg.k1 * cfg.dynamic_range), 2);
  const Scalar c2 = std::pow(static_cast<Scalar>(cfg.k2 * cfg.dynamic_range), 2);

  const Plane<Scalar> mu_a = detail::filter_valid<Scalar>(a, kernel);
  const Plane<Scalar> mu_b = detail::filter_valid<Scalar>(b, kernel);
  const Plane<Scalar> var_a = detail::filter_valid<Scalar>(a * a, kernel) - mu_a * mu_a;
  const Plane<Scalar> var_b = detail::filter_valid<Scalar>(b * b, kernel) - mu_b * mu_b;
  const Plane<Scalar> cov = detail::filter_valid<Scalar>(a * b, kernel) - mu_a * mu_b;

  const Plane<Scalar> num = (Scalar(2) * mu_a * mu_b + c1) * (Scalar(2) * cov + c2);
  const Plane<Scalar> den = (mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2);
  return (num / den).mean();
}

template <typename Scalar = double>
Scalar ssim(const ImageBuffer& a, const ImageBuffer& b, const SSIMConfig& cfg = {}) {
  cfg.validate();
  require_same_shape(a, b, "ssim");
  if (a.width() < cfg.window || a.height() < cfg.window) {
    throw ValidationError("ssim: image " + std::to_string(a.width()) + "x" +
                          std::to_string(a.height()) + " smaller than window " +
                          std::to_string(cfg.window));
  }
  Scalar total = 0;
  for (int c = 0; c < ImageBuffer::kChannels; ++c) {
    total += ssim_plane<Scalar>(channel_plane<Scalar>(a, c), channel_plane<Scalar>(b, c), cfg);
  }
  return total / static_cast<Scalar>(ImageBuffer::kChannels);
}

// mse + lambda1 * (1 - ssim) / 2 + lambda2 * features(a, b). The feature term
// is dropped when no distance is supplied.
double restoration_loss(const ImageBuffer& a, const ImageBuffer& b,
                        const LossWeights& w = {},
                        const FeatureDistance& features = nullptr,
                        const SSIMConfig& cfg = {});

}  // namespace lowlight

#endif  // LOWLIGHT_METRICS_HPP_
