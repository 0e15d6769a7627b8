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
#ifndef LOWLIGHT_IMAGE_IO_HPP_
#define LOWLIGHT_IMAGE_IO_HPP_

#include <filesystem>
#include <utility>
#include <vector>

#include "lowlight/image.hpp"
#include "lowlight/rng.hpp"

namespace lowlight {

enum class ImageFormat { kPng, kJpeg };

struct ImageInfo {
  ImageFormat format;
  int width;
  int height;
};

// Reads PNG (8/16-bit, gray/RGB/palette, alpha dropped) or baseline JPEG.
// Grayscale sources come back with three identical channels.
// Throws FileNotFoundError or DecodeError; never returns a partial image.
ImageBuffer load_image(const std::filesystem::path& path);

// Header-only probe, for filtering a corpus by size without decoding it.
ImageInfo read_image_info(const std::filesystem::path& path);

// Writes 8-bit RGB PNG. Output bytes depend only on the pixels.
void save_png(const ImageBuffer& img, const std::filesystem::path& path);

// Sorted list of *.png / *.jpg / *.jpeg files directly inside dir.
std::vector<std::filesystem::path> list_images(const std::filesystem::path& dir);

// Copies a side x side window whose top-left corner is uniform over all
// (width - side + 1) * (height - side + 1) positions.
std::pair<ImageBuffer, Region> extract_random_patch(const ImageBuffer& img,
                                                    int side, RngStream& rng);

}  // namespace lowlight

#endif  // LOWLIGHT_IMAGE_IO_HPP_
