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
#include "lowlight/image.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lowlight/error.hpp"
#include "lowlight/rng.hpp"

namespace lowlight {

std::string to_string(const Region& r) {
  return "(" + std::to_string(r.x) + "," + std::to_string(r.y) + "," +
         std::to_string(r.w) + "," + std::to_string(r.h) + ")";
}

namespace {

std::size_t checked_size(int width, int height) {
  if (width <= 0 || height <= 0) {
    throw ValidationError("image dimensions must be positive, got " +
                          std::to_string(width) + "x" + std::to_string(height));
  }
  return static_cast<std::size_t>(width) * static_cast<std::size_t>(height) *
         ImageBuffer::kChannels;
}

}  // namespace

ImageBuffer::ImageBuffer(int width, int height, std::uint8_t fill)
    : width_(width), height_(height), data_(checked_size(width, height), fill) {}

ImageBuffer::ImageBuffer(int width, int height, std::vector<std::uint8_t> data)
    : width_(width), height_(height), data_(std::move(data)) {
  if (data_.size() != checked_size(width, height)) {
    throw ValidationError("image data length " + std::to_string(data_.size()) +
                          " does not match " + std::to_string(width) + "x" +
                          std::to_string(height) + "x3");
  }
}

ImageBuffer ImageBuffer::crop(const Region& r) const {
  if (!r.fits(width_, height_)) {
    throw ValidationError("region " + to_string(r) + " outside " +
                          std::to_string(width_) + "x" +
                          std::to_string(height_) + " image");
  }
  ImageBuffer out(r.w, r.h);
  const std::size_t span = static_cast<std::size_t>(r.w) * kChannels;
  for (int y = 0; y < r.h; ++y) {
    const auto src = row(r.y + y).subspan(static_cast<std::size_t>(r.x) * kChannels, span);
    std::copy(src.begin(), src.end(), out.row(y).begin());
  }
  return out;
}

void require_same_shape(const ImageBuffer& a, const ImageBuffer& b,
                        const char* what) {
  if (a.width() != b.width() || a.height() != b.height()) {
    throw ValidationError(std::string(what) + ": shape mismatch " +
                          std::to_string(a.width()) + "x" +
                          std::to_string(a.height()) + " vs " +
                          std::to_string(b.width()) + "x" +
                          std::to_string(b.height()));
  }
}

std::uint64_t RngStream::uniform_int(std::uint64_t n) {
  if (n == 0) throw ValidationError("uniform_int: empty range");
  // Largest multiple of n representable; draws at or above it are rejected.
  const std::uint64_t limit =
      std::numeric_limits<std::uint64_t>::max() -
      std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t v = next_u64();
  while (v >= limit) v = next_u64();
  return v % n;
}

double RngStream::normal() {
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  constexpr double kTwoPi = 6.283185307179586476925286766559;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
}

}  // namespace lowlight
