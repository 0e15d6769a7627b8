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
#ifndef LOWLIGHT_AUGMENT_HPP_
#define LOWLIGHT_AUGMENT_HPP_

#include <span>
#include <vector>

#include "lowlight/image.hpp"
#include "lowlight/rng.hpp"

namespace lowlight {

// Patch-wise brightness/contrast jitter. Each tile gets
//   v' = clamp(round((1 + a) * (v + d * 255)), 0, 255)
// with a ~ U[-alpha_limit, alpha_limit] and d ~ U[-delta_limit, delta_limit].
// Tile side is round(u * min(W, H)), u ~ U[patch_frac_min, patch_frac_max],
// drawn once per image.
struct LightAugConfig {
  double alpha_limit = 0.3;
  double delta_limit = 0.3;
  double patch_frac_min = 0.04;
  double patch_frac_max = 0.20;

  void validate() const;
};

struct ShuffleConfig {
  int block = 16;
  double prob = 0.5;

  void validate() const;
};

// Applies the gain/offset mapping above to one tile in place.
void adjust_tile(ImageBuffer& img, const Region& tile, double a, double d);

// Tiles drawn for an image of the given size, in raster order.
std::vector<Region> tile_grid(int width, int height, int side);

ImageBuffer patch_light_augment(const ImageBuffer& img,
                                const LightAugConfig& cfg, RngStream& rng);

// For each region: with probability cfg.prob, the full block x block cells
// anchored at the region's top-left are permuted uniformly at random. Cells
// that would cross the region's right/bottom edge are left alone, as is
// everything outside the regions. Regions are processed in order; a later
// region sees the result of earlier ones.
ImageBuffer block_shuffle(const ImageBuffer& img, std::span<const Region> regions,
                          const ShuffleConfig& cfg, RngStream& rng);

// Uniform random permutation of [0, n) by Fisher-Yates.
std::vector<int> random_permutation(int n, RngStream& rng);

// Global per-channel histogram equalization. A constant channel is returned
// unchanged.
ImageBuffer histogram_equalize(const ImageBuffer& img);

}  // namespace lowlight

#endif  // LOWLIGHT_AUGMENT_HPP_
