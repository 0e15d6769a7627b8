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
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>

#include "lowlight/error.hpp"
#include "lowlight/image.hpp"
#include "lowlight/image_io.hpp"
#include "lowlight/parallel.hpp"
#include "lowlight/rng.hpp"
#include "test_util.hpp"

namespace fs = std::filesystem;
using namespace lowlight;
using lowlight::testing::fixture;
using lowlight::testing::random_image;
using lowlight::testing::TempDir;

TEST_CASE("ImageBuffer construction and invariants") {
  ImageBuffer img(4, 3, 7);
  CHECK(img.size() == 4 * 3 * 3);
  CHECK(img.at(3, 2, 2) == 7);
  img.at(1, 2, 0) = 200;
  CHECK(img.row(2)[3] == 200);

  CHECK_THROWS_AS(ImageBuffer(0, 3), ValidationError);
  CHECK_THROWS_AS(ImageBuffer(2, -1), ValidationError);
  CHECK_THROWS_AS(ImageBuffer(2, 2, std::vector<std::uint8_t>(11)), ValidationError);
}

TEST_CASE("crop copies the region and rejects out-of-bounds") {
  std::mt19937_64 gen(1);
  const ImageBuffer img = random_image(10, 8, gen);
  const ImageBuffer c = img.crop({3, 2, 4, 5});
  REQUIRE(c.width() == 4);
  REQUIRE(c.height() == 5);
  for (int y = 0; y < 5; ++y)
    for (int x = 0; x < 4; ++x)
      for (int ch = 0; ch < 3; ++ch) CHECK(c.at(x, y, ch) == img.at(x + 3, y + 2, ch));
  CHECK_THROWS_AS(img.crop({7, 0, 4, 1}), ValidationError);
  CHECK_THROWS_AS(img.crop({0, 0, 0, 1}), ValidationError);
  CHECK_THROWS_AS(img.crop({-1, 0, 2, 2}), ValidationError);
}

TEST_CASE("RngStream matches the documented algorithm") {
  // Reference values from an independent big-integer implementation of
  // key = mix64(mix64(seed) ^ (stream*G + C)), draw(n) = mix64(key + n*G).
  RngStream a(0, 0);
  CHECK(a.next_u64() == 0xf5dd724ff3b8a536ULL);
  CHECK(a.next_u64() == 0x7c6ede0099d1dac1ULL);
  CHECK(a.next_u64() == 0x09f2c7599678a38eULL);
  CHECK(a.next_u64() == 0x7f0826b1a0a9165dULL);

  RngStream b(42, 7);
  CHECK(b.next_u64() == 0xec116df4d7f64edeULL);
  CHECK(b.next_u64() == 0x6a997fa4762d4d48ULL);

  RngStream c(~0ULL, ~0ULL);
  CHECK(c.next_u64() == 0x379479e138c67c0bULL);

  RngStream d = RngStream(42, 7).derive(3);
  CHECK(d.stream() == 0x953aeb70673e29cbULL);
  CHECK(d.next_u64() == 0x0f22e6a6a739a993ULL);
}

TEST_CASE("RngStream draw helpers") {
  RngStream rng(9, 1);
  SUBCASE("uniform stays in [0,1) and uses one draw") {
    for (int i = 0; i < 10000; ++i) {
      const double u = rng.uniform();
      REQUIRE(u >= 0.0);
      REQUIRE(u < 1.0);
    }
    CHECK(rng.draws() == 10000);
  }
  SUBCASE("uniform_int covers its range") {
    std::set<std::uint64_t> seen;
    for (int i = 0; i < 2000; ++i) {
      const auto v = rng.uniform_int(7);
      REQUIRE(v < 7);
      seen.insert(v);
    }
    CHECK(seen.size() == 7);
    CHECK(rng.uniform_int(1) == 0);
    CHECK_THROWS_AS(rng.uniform_int(0), ValidationError);
  }
  SUBCASE("normal has unit moments") {
    double sum = 0, sq = 0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
      const double z = rng.normal();
      sum += z;
      sq += z * z;
    }
    CHECK(sum / n == doctest::Approx(0.0).epsilon(0.01).scale(1.0));
    CHECK(sq / n == doctest::Approx(1.0).epsilon(0.02));
  }
  SUBCASE("derive leaves the parent untouched") {
    RngStream copy = rng;
    (void)rng.derive(5);
    CHECK(copy.next_u64() == rng.next_u64());
    CHECK(rng.derive(1).next_u64() != rng.derive(2).next_u64());
  }
}

TEST_CASE("load_image decodes known pixels") {
  const ImageBuffer img = load_image(fixture("known_2x2.png"));
  REQUIRE(img.width() == 2);
  REQUIRE(img.height() == 2);
  const std::vector<std::uint8_t> expected = {255, 0, 0, 0, 255, 0, 0, 0, 255, 12, 34, 56};
  CHECK(std::equal(img.data().begin(), img.data().end(), expected.begin(), expected.end()));
}

TEST_CASE("grayscale PNG expands to three identical channels") {
  const ImageBuffer img = load_image(fixture("corpus/corpus_c_gray.png"));
  CHECK(img.width() == 90);
  CHECK(img.height() == 90);
  bool any_nonzero = false;
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      REQUIRE(img.at(x, y, 0) == img.at(x, y, 1));
      REQUIRE(img.at(x, y, 1) == img.at(x, y, 2));
      any_nonzero |= img.at(x, y, 0) != 0;
    }
  }
  CHECK(any_nonzero);
}

TEST_CASE("JPEG sources decode to RGB") {
  const ImageInfo info = read_image_info(fixture("small.jpg"));
  CHECK(info.format == ImageFormat::kJpeg);
  CHECK(info.width == 40);
  CHECK(info.height == 48);
  const ImageBuffer img = load_image(fixture("small.jpg"));
  CHECK(img.width() == 40);
  CHECK(img.height() == 48);
  // Decoders differ by a few codes across builds; check the rough content only.
  double mean = 0;
  for (auto v : img.data()) mean += v;
  mean /= static_cast<double>(img.size());
  CHECK(mean == doctest::Approx(57.48).epsilon(0.02));
}

TEST_CASE("PNG save/load round-trip is the identity") {
  TempDir dir("png");
  std::mt19937_64 gen(2024);
  std::uniform_int_distribution<int> side(1, 40);
  for (int trial = 0; trial < 25; ++trial) {
    const ImageBuffer img = random_image(side(gen), side(gen), gen);
    const fs::path p = dir / ("t" + std::to_string(trial) + ".png");
    save_png(img, p);
    CHECK(load_image(p) == img);
  }
}

TEST_CASE("PNG encoding is byte-stable") {
  TempDir dir("png-stable");
  std::mt19937_64 gen(5);
  const ImageBuffer img = random_image(33, 17, gen);
  save_png(img, dir / "a.png");
  save_png(img, dir / "b.png");
  CHECK(testing::slurp(dir / "a.png") == testing::slurp(dir / "b.png"));
}

TEST_CASE("IO errors are reported distinctly") {
  TempDir dir("io-errors");
  CHECK_THROWS_AS(load_image(dir / "missing.png"), FileNotFoundError);

  const std::string full = testing::slurp(fixture("natural_patch.png"));
  {
    std::ofstream(dir / "truncated.png", std::ios::binary) << full.substr(0, full.size() / 2);
  }
  CHECK_THROWS_AS(load_image(dir / "truncated.png"), DecodeError);

  const std::string jpeg = testing::slurp(fixture("small.jpg"));
  {
    std::ofstream(dir / "truncated.jpg", std::ios::binary) << jpeg.substr(0, jpeg.size() / 2);
  }
  CHECK_THROWS_AS(load_image(dir / "truncated.jpg"), DecodeError);

  { std::ofstream(dir / "notes.png") << "this is not an image"; }
  CHECK_THROWS_AS(load_image(dir / "notes.png"), DecodeError);

  CHECK_THROWS_AS(save_png(ImageBuffer(2, 2), dir / "no" / "such" / "dir.png"), WriteError);
}

TEST_CASE("list_images is sorted and filtered by extension") {
  TempDir dir("list");
  save_png(ImageBuffer(1, 1), dir / "b.png");
  save_png(ImageBuffer(1, 1), dir / "a.PNG");
  { std::ofstream(dir / "c.txt") << "x"; }
  const auto files = list_images(dir.path());
  REQUIRE(files.size() == 2);
  CHECK(files[0].filename() == "a.PNG");
  CHECK(files[1].filename() == "b.png");
  CHECK_THROWS_AS(list_images(dir / "nope"), FileNotFoundError);
}

TEST_CASE("extract_random_patch") {
  std::mt19937_64 gen(11);
  const ImageBuffer img = random_image(30, 20, gen);

  SUBCASE("side equal to a square image returns the whole image") {
    const ImageBuffer square = random_image(16, 16, gen);
    RngStream rng(1);
    auto [patch, region] = extract_random_patch(square, 16, rng);
    CHECK(region == Region{0, 0, 16, 16});
    CHECK(patch == square);
  }
  SUBCASE("fixed seed reproduces patch and region") {
    RngStream r1(77, 3);
    RngStream r2(77, 3);
    auto a = extract_random_patch(img, 9, r1);
    auto b = extract_random_patch(img, 9, r2);
    CHECK(a.second == b.second);
    CHECK(a.first == b.first);
  }
  SUBCASE("patch is a copy of its region and stays in bounds") {
    RngStream rng(3);
    for (int i = 0; i < 500; ++i) {
      auto [patch, region] = extract_random_patch(img, 7, rng);
      REQUIRE(region.fits(img.width(), img.height()));
      REQUIRE(patch == img.crop(region));
    }
  }
  SUBCASE("oversized side is rejected") {
    RngStream rng(3);
    CHECK_THROWS_AS(extract_random_patch(img, 21, rng), ValidationError);
    CHECK_THROWS_AS(extract_random_patch(img, 0, rng), ValidationError);
  }
}

TEST_CASE("extract_random_patch corner is uniform over the valid grid") {
  // 100x100 image, side 10 -> 91 x 91 = 8281 corner positions; 1e5 draws.
  const ImageBuffer img(100, 100);
  RngStream rng(20260101, 0);
  std::vector<std::uint64_t> counts(91 * 91, 0);
  for (int i = 0; i < 100000; ++i) {
    auto [patch, r] = extract_random_patch(img, 10, rng);
    REQUIRE(r.x >= 0);
    REQUIRE(r.x <= 90);
    REQUIRE(r.y <= 90);
    ++counts[static_cast<std::size_t>(r.y) * 91 + static_cast<std::size_t>(r.x)];
  }
  const double p = testing::chi_square_uniform_p(counts);
  INFO("chi-square p = " << p);
  CHECK(p > 0.001);
}

TEST_CASE("parallel_for runs every index once and propagates errors") {
  std::vector<int> hits(1000, 0);
  parallel_for(hits.size(), 8, [&](std::size_t i) { hits[i] += 1; });
  CHECK(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));

  CHECK_THROWS_AS(parallel_for(100, 4,
                               [](std::size_t i) {
                                 if (i == 37) throw ValidationError("boom");
                               }),
                  ValidationError);
}
