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
#include "lowlight/image_io.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <string>

#include <jpeglib.h>
#include <png.h>

#include "lowlight/error.hpp"

namespace fs = std::filesystem;

namespace lowlight {
namespace {

using FilePtr = std::unique_ptr<std::FILE, int (*)(std::FILE*)>;

FilePtr open_for_read(const fs::path& path) {
  std::error_code ec;
  if (!fs::is_regular_file(path, ec)) throw FileNotFoundError(path.string());
  FilePtr f(std::fopen(path.c_str(), "rb"), &std::fclose);
  if (!f) throw IoError("cannot open " + path.string());
  return f;
}

ImageFormat sniff(std::FILE* f, const fs::path& path) {
  std::array<unsigned char, 8> magic{};
  const std::size_t n = std::fread(magic.data(), 1, magic.size(), f);
  std::rewind(f);
  if (n >= 8 && png_sig_cmp(magic.data(), 0, 8) == 0) return ImageFormat::kPng;
  if (n >= 3 && magic[0] == 0xFF && magic[1] == 0xD8 && magic[2] == 0xFF) {
    return ImageFormat::kJpeg;
  }
  throw DecodeError("unsupported image format: " + path.string());
}

// libpng's simplified API does all the format normalisation we need:
// palette expansion, 16->8 bit, gray->RGB, alpha removal over black.
struct PngImage {
  png_image img;
  PngImage() {
    std::memset(&img, 0, sizeof img);
    img.version = PNG_IMAGE_VERSION;
  }
  ~PngImage() { png_image_free(&img); }
  PngImage(const PngImage&) = delete;
  PngImage& operator=(const PngImage&) = delete;
};

ImageBuffer load_png(std::FILE* f, const fs::path& path) {
  PngImage png;
  if (!png_image_begin_read_from_stdio(&png.img, f)) {
    throw DecodeError("corrupt PNG " + path.string() + ": " + png.img.message);
  }
  png.img.format = PNG_FORMAT_RGB;
  const int width = static_cast<int>(png.img.width);
  const int height = static_cast<int>(png.img.height);
  std::vector<std::uint8_t> pixels(PNG_IMAGE_SIZE(png.img));
  const png_color black{0, 0, 0};
  if (!png_image_finish_read(&png.img, &black, pixels.data(), 0, nullptr)) {
    throw DecodeError("corrupt PNG " + path.string() + ": " + png.img.message);
  }
  return ImageBuffer(width, height, std::move(pixels));
}

struct JpegErrorManager {
  jpeg_error_mgr pub;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
};

extern "C" void jpeg_error_exit(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<JpegErrorManager*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, err->message);
  std::longjmp(err->jump, 1);
}

// Warnings (e.g. premature end of data) are promoted to errors so that a
// truncated file never yields a partially gray image.
extern "C" void jpeg_emit_message(j_common_ptr cinfo, int level) {
  if (level < 0) jpeg_error_exit(cinfo);
}

// No C++ objects with destructors may be live across the setjmp region, so
// the decode writes into caller-owned storage.
bool decode_jpeg(std::FILE* f, bool header_only, int* width, int* height,
                 std::vector<std::uint8_t>* pixels, std::string* message) {
  jpeg_decompress_struct cinfo;
  JpegErrorManager err;
  cinfo.err = jpeg_std_error(&err.pub);
  err.pub.error_exit = jpeg_error_exit;
  err.pub.emit_message = jpeg_emit_message;
  err.message[0] = '\0';
  if (setjmp(err.jump)) {
    jpeg_destroy_decompress(&cinfo);
    *message = err.message;
    return false;
  }
  jpeg_create_decompress(&cinfo);
  jpeg_stdio_src(&cinfo, f);
  jpeg_read_header(&cinfo, TRUE);
  if (header_only) {
    *width = static_cast<int>(cinfo.image_width);
    *height = static_cast<int>(cinfo.image_height);
    jpeg_destroy_decompress(&cinfo);
    return true;
  }
  cinfo.out_color_space = JCS_RGB;
  jpeg_start_decompress(&cinfo);
  *width = static_cast<int>(cinfo.output_width);
  *height = static_cast<int>(cinfo.output_height);
  const std::size_t stride = static_cast<std::size_t>(*width) * 3;
  pixels->resize(stride * static_cast<std::size_t>(*height));
  while (cinfo.output_scanline < cinfo.output_height) {
    JSAMPROW row = pixels->data() + stride * cinfo.output_scanline;
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  return true;
}

ImageBuffer load_jpeg(std::FILE* f, const fs::path& path) {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;
  std::string message;
  if (!decode_jpeg(f, false, &width, &height, &pixels, &message)) {
    throw DecodeError("corrupt JPEG " + path.string() + ": " + message);
  }
  return ImageBuffer(width, height, std::move(pixels));
}

}  // namespace

ImageBuffer load_image(const fs::path& path) {
  FilePtr f = open_for_read(path);
  switch (sniff(f.get(), path)) {
    case ImageFormat::kPng:
      return load_png(f.get(), path);
    case ImageFormat::kJpeg:
      return load_jpeg(f.get(), path);
  }
  throw DecodeError("unsupported image format: " + path.string());
}

ImageInfo read_image_info(const fs::path& path) {
  FilePtr f = open_for_read(path);
  const ImageFormat format = sniff(f.get(), path);
  if (format == ImageFormat::kPng) {
    PngImage png;
    if (!png_image_begin_read_from_stdio(&png.img, f.get())) {
      throw DecodeError("corrupt PNG " + path.string() + ": " + png.img.message);
    }
    return {format, static_cast<int>(png.img.width),
            static_cast<int>(png.img.height)};
  }
  int width = 0;
  int height = 0;
  std::string message;
  if (!decode_jpeg(f.get(), true, &width, &height, nullptr, &message)) {
    throw DecodeError("corrupt JPEG " + path.string() + ": " + message);
  }
  return {format, width, height};
}

void save_png(const ImageBuffer& img, const fs::path& path) {
  PngImage png;
  png.img.width = static_cast<png_uint_32>(img.width());
  png.img.height = static_cast<png_uint_32>(img.height());
  png.img.format = PNG_FORMAT_RGB;
  FilePtr f(std::fopen(path.c_str(), "wb"), &std::fclose);
  if (!f) throw WriteError("cannot create " + path.string());
  if (!png_image_write_to_stdio(&png.img, f.get(), 0, img.data().data(), 0,
                                nullptr)) {
    throw WriteError("PNG encode failed for " + path.string() + ": " +
                     png.img.message);
  }
  if (std::fflush(f.get()) != 0) throw WriteError("write failed: " + path.string());
}

std::vector<fs::path> list_images(const fs::path& dir) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw FileNotFoundError(dir.string());
  std::vector<fs::path> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    std::string ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (ext == ".png" || ext == ".jpg" || ext == ".jpeg") out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::pair<ImageBuffer, Region> extract_random_patch(const ImageBuffer& img,
                                                    int side, RngStream& rng) {
  if (side <= 0 || side > std::min(img.width(), img.height())) {
    throw ValidationError("patch side " + std::to_string(side) +
                          " does not fit " + std::to_string(img.width()) + "x" +
                          std::to_string(img.height()) + " image");
  }
  Region r;
  r.w = side;
  r.h = side;
  r.x = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(img.width() - side + 1)));
  r.y = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(img.height() - side + 1)));
  return {img.crop(r), r};
}

}  // namespace lowlight
