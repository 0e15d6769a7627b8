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
#include "lowlight/augment.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "lowlight/error.hpp"

namespace lowlight {

void LightAugConfig::validate() const {
  if (!(alpha_limit >= 0.0 && alpha_limit < 1.0)) {
    throw ValidationError("alpha_limit must be in [0,1)");
  }
  if (!(delta_limit >= 0.0 && delta_limit <= 1.0)) {
    throw ValidationError("delta_limit must be in [0,1]");
  }
  if (!(patch_frac_min > 0.0 && patch_frac_min <= patch_frac_max &&
        patch_frac_max <= 1.0)) {
    throw ValidationError(
        "patch fractions must satisfy 0 < patch_frac_min <= patch_frac_max <= 1");
  }
}

void ShuffleConfig::validate() const {
  if (block < 1) throw ValidationError("block must be >= 1");
  if (!(prob >= 0.0 && prob <= 1.0)) throw ValidationError("prob must be in [0,1]");
}

void adjust_tile(ImageBuffer& img, const Region& tile, double a, double d) {
  if (!tile.fits(img.width(), img.height())) {
    throw ValidationError("tile " + to_string(tile) + " outside image");
  }
  const double gain = 1.0 + a;
  const double offset = d * 255.0;
  std::array<std::uint8_t, 256> lut{};
  for (int v = 0; v < 256; ++v) {
    const double out = std::round(gain * (static_cast<double>(v) + offset));
    lut[v] = static_cast<std::uint8_t>(std::clamp(out, 0.0, 255.0));
  }
  for (int y = tile.y; y < tile.y + tile.h; ++y) {
    auto px = img.row(y).subspan(static_cast<std::size_t>(tile.x) * ImageBuffer::kChannels,
                                 static_cast<std::size_t>(tile.w) * ImageBuffer::kChannels);
    for (auto& v : px) v = lut[v];
  }
}

std::vector<Region> tile_grid(int width, int height, int side) {
  std::vector<Region> tiles;
  for (int y = 0; y < height; y += side) {
    for (int x = 0; x < width; x += side) {
      tiles.push_back({x, y, std::min(side, width - x), std::min(side, height - y)});
    }
  }
  return tiles;
}

ImageBuffer patch_light_augment(const ImageBuffer& img,
                                const LightAugConfig& cfg, RngStream& rng) {
  cfg.validate();
  const int shorter = std::min(img.width(), img.height());
  const double frac = rng.uniform(cfg.patch_frac_min, cfg.patch_frac_max);
  const int side = std::max(1, static_cast<int>(std::lround(frac * shorter)));

  ImageBuffer out = img;
  for (const Region& tile : tile_grid(img.width(), img.height(), side)) {
    const double a = rng.uniform(-cfg.alpha_limit, cfg.alpha_limit);
    const double d = rng.uniform(-cfg.delta_limit, cfg.delta_limit);
    if (a == 0.0 && d == 0.0) continue;
    adjust_tile(out, tile, a, d);
  }
  return out;
}

std::vector<int> random_permutation(int n, RngStream& rng) {
  std::vector<int> perm(static_cast<std::size_t>(std::max(n, 0)));
  std::iota(perm.begin(), perm.end(), 0);
  for (int i = n - 1; i > 0; --i) {
    const auto j = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(i) + 1));
    std::swap(perm[i], perm[j]);
  }
  return perm;
}

ImageBuffer block_shuffle(const ImageBuffer& img, std::span<const Region> regions,
                          const ShuffleConfig& cfg, RngStream& rng) {
  cfg.validate();
  for (const Region& r : regions) {
    if (!r.fits(img.width(), img.height())) {
      throw ValidationError("shuffle region " + to_string(r) + " outside " +
                            std::to_string(img.width()) + "x" +
                            std::to_string(img.height()) + " image");
    }
  }

  ImageBuffer out = img;
  const int b = cfg.block;
  const std::size_t block_bytes = static_cast<std::size_t>(b) * ImageBuffer::kChannels;
  for (const Region& r : regions) {
    if (!rng.bernoulli(cfg.prob)) continue;
    const int cols = r.w / b;
    const int rows = r.h / b;
    const int cells = cols * rows;
    if (cells < 2) continue;

    const std::vector<int> perm = random_permutation(cells, rng);
    const ImageBuffer snapshot = out.crop({r.x, r.y, cols * b, rows * b});
    for (int dst = 0; dst < cells; ++dst) {
      const int src = perm[dst];
      const int sx = (src % cols) * b;
      const int sy = (src / cols) * b;
      const int dx = r.x + (dst % cols) * b;
      const int dy = r.y + (dst / cols) * b;
      for (int yy = 0; yy < b; ++yy) {
        const auto from = snapshot.row(sy + yy).subspan(
            static_cast<std::size_t>(sx) * ImageBuffer::kChannels, block_bytes);
        auto to = out.row(dy + yy).subspan(
            static_cast<std::size_t>(dx) * ImageBuffer::kChannels, block_bytes);
        std::copy(from.begin(), from.end(), to.begin());
      }
    }
  }
  return out;
}

ImageBuffer histogram_equalize(const ImageBuffer& img) {
  ImageBuffer out = img;
  const std::uint64_t total =
      static_cast<std::uint64_t>(img.width()) * static_cast<std::uint64_t>(img.height());
  const auto src = img.data();
  auto dst = out.data();

  for (int c = 0; c < ImageBuffer::kChannels; ++c) {
    std::array<std::uint64_t, 256> cdf{};
    for (std::size_t i = c; i < src.size(); i += ImageBuffer::kChannels) ++cdf[src[i]];
    std::partial_sum(cdf.begin(), cdf.end(), cdf.begin());

    // Smallest nonzero cdf value == count of the darkest occupied level.
    const std::uint64_t cdf_min =
        *std::find_if(cdf.begin(), cdf.end(), [](std::uint64_t v) { return v > 0; });
    if (cdf_min == total) continue;

    const std::uint64_t denom = total - cdf_min;
    std::array<std::uint8_t, 256> lut{};
    for (int v = 0; v < 256; ++v) {
      if (cdf[v] < cdf_min) continue;  // level absent below the darkest one
      // round((cdf - cdf_min) / denom * 255), half up, exact in integers.
      lut[v] = static_cast<std::uint8_t>(((cdf[v] - cdf_min) * 510 + denom) / (2 * denom));
    }
    for (std::size_t i = c; i < dst.size(); i += ImageBuffer::kChannels) dst[i] = lut[src[i]];
  }
  return out;
}

}  // namespace lowlight
