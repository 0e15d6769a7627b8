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
#ifndef LOWLIGHT_IMAGE_HPP_
#define LOWLIGHT_IMAGE_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace lowlight {

// Axis-aligned pixel rectangle, top-left anchored.
struct Region {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;

  bool valid() const { return w > 0 && h > 0; }
  bool fits(int width, int height) const {
    return valid() && x >= 0 && y >= 0 && x + w <= width && y + h <= height;
  }
  friend bool operator==(const Region&, const Region&) = default;
};

std::string to_string(const Region& r);

// 8-bit interleaved RGB raster. Every intensity is in [0,255] by type, and
// data().size() == width * height * 3 always holds.
class ImageBuffer {
 public:
  static constexpr int kChannels = 3;

  ImageBuffer(int width, int height, std::uint8_t fill = 0);
  ImageBuffer(int width, int height, std::vector<std::uint8_t> data);

  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return kChannels; }
  std::size_t size() const { return data_.size(); }

  std::span<std::uint8_t> data() { return data_; }
  std::span<const std::uint8_t> data() const { return data_; }

  std::uint8_t& at(int x, int y, int c) { return data_[index(x, y, c)]; }
  std::uint8_t at(int x, int y, int c) const { return data_[index(x, y, c)]; }

  std::span<std::uint8_t> row(int y) {
    return {data_.data() + row_offset(y), row_stride()};
  }
  std::span<const std::uint8_t> row(int y) const {
    return {data_.data() + row_offset(y), row_stride()};
  }

  std::size_t row_stride() const {
    return static_cast<std::size_t>(width_) * kChannels;
  }

  Region bounds() const { return {0, 0, width_, height_}; }

  // Deep copy of a sub-rectangle. Throws ValidationError if r does not fit.
  ImageBuffer crop(const Region& r) const;

  friend bool operator==(const ImageBuffer&, const ImageBuffer&) = default;

 private:
  std::size_t row_offset(int y) const {
    return static_cast<std::size_t>(y) * row_stride();
  }
  std::size_t index(int x, int y, int c) const {
    return row_offset(y) + static_cast<std::size_t>(x) * kChannels +
           static_cast<std::size_t>(c);
  }

  int width_;
  int height_;
  std::vector<std::uint8_t> data_;
};

// Single channel as a dense height x width array, for the float-domain
// kernels in metrics.
template <typename Scalar>
using Plane = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename Scalar>
Plane<Scalar> channel_plane(const ImageBuffer& img, int channel) {
  Plane<Scalar> plane(img.height(), img.width());
  for (int y = 0; y < img.height(); ++y) {
    const auto row = img.row(y);
    for (int x = 0; x < img.width(); ++x) {
      plane(y, x) = static_cast<Scalar>(row[x * ImageBuffer::kChannels + channel]);
    }
  }
  return plane;
}

// Throws ValidationError unless a and b have identical dimensions.
void require_same_shape(const ImageBuffer& a, const ImageBuffer& b,
                        const char* what);

}  // namespace lowlight

#endif  // LOWLIGHT_IMAGE_HPP_
