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
#include "lowlight/metrics.hpp"

namespace lowlight {

double restoration_loss(const ImageBuffer& a, const ImageBuffer& b,
                        const LossWeights& w, const FeatureDistance& features,
                        const SSIMConfig& cfg) {
  w.validate();
  require_same_shape(a, b, "restoration_loss");
  double loss = mse<double>(a, b);
  if (w.lambda1 != 0.0) loss += w.lambda1 * (1.0 - ssim<double>(a, b, cfg)) / 2.0;
  if (w.lambda2 != 0.0 && features) {
    const double fd = features(a, b);
    if (!(fd >= 0.0)) {
      throw ValidationError("feature distance returned a negative or NaN value");
    }
    loss += w.lambda2 * fd;
  }
  return loss;
}

}  // namespace lowlight
