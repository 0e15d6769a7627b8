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
#include "lowlight/corrupt.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>

#include <json.hpp>

#include "lowlight/error.hpp"
#include "lowlight/image_io.hpp"
#include "lowlight/parallel.hpp"

namespace fs = std::filesystem;

namespace lowlight {
namespace {

// Child stream tags. Each random quantity gets its own stream so that, for a
// fixed seed, changing k does not shift the noise draws.
constexpr std::uint64_t kTagLevels = 0;
constexpr std::uint64_t kTagPhotons = 1;
constexpr std::uint64_t kTagNoise = 2;

constexpr std::uint64_t kTagSource = 0;
constexpr std::uint64_t kTagRegion = 1;
constexpr std::uint64_t kTagPairSeed = 2;

constexpr double kNormalApproxLambda = 30.0;
constexpr std::int64_t kInverseTransformCap = 1000;

void check_levels(int k) {
  if (k < 2 || k > 256) {
    throw ValidationError("gray-level count k must be in [2,256], got " +
                          std::to_string(k));
  }
}

std::string pair_name(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%06zu.png", index);
  return buf;
}

}  // namespace

void CorruptionConfig::validate() const {
  if (k_min < 2 || k_max > 256 || k_min > k_max) {
    throw ValidationError("k range must satisfy 2 <= k_min <= k_max <= 256, got [" +
                          std::to_string(k_min) + "," + std::to_string(k_max) + "]");
  }
  if (!(photon_scale_min > 0.0) || !(photon_scale_min <= photon_scale_max) ||
      !std::isfinite(photon_scale_max)) {
    throw ValidationError(
        "photon scale range must satisfy 0 < photon_scale_min <= photon_scale_max");
  }
  if (patch_side <= 0) throw ValidationError("patch_side must be positive");
}

std::vector<std::uint8_t> posterize_table(int k) {
  check_levels(k);
  std::vector<std::uint8_t> lut(256);
  const int top = k - 1;
  for (int v = 0; v < 256; ++v) {
    const int segment = std::min(v * k / 256, top);
    // round(segment * 255 / top), half away from zero, in integers.
    lut[v] = static_cast<std::uint8_t>((2 * segment * 255 + top) / (2 * top));
  }
  return lut;
}

ImageBuffer posterize(const ImageBuffer& img, int k) {
  const auto lut = posterize_table(k);
  ImageBuffer out = img;
  for (auto& v : out.data()) v = lut[v];
  return out;
}

std::int64_t sample_poisson(double lambda, RngStream& rng) {
  const double u1 = rng.uniform();
  const double u2 = rng.uniform();
  if (!(lambda > 0.0)) return 0;

  if (lambda < kNormalApproxLambda) {
    double p = std::exp(-lambda);
    double cdf = p;
    std::int64_t k = 0;
    while (u1 > cdf && k < kInverseTransformCap) {
      ++k;
      p *= lambda / static_cast<double>(k);
      cdf += p;
    }
    return k;
  }

  // Same Box-Muller transform as RngStream::normal, on the two draws above.
  constexpr double kTwoPi = 6.283185307179586476925286766559;
  const double z = std::sqrt(-2.0 * std::log(1.0 - u1)) * std::cos(kTwoPi * u2);
  const double x = std::round(lambda + std::sqrt(lambda) * z);
  return x < 0.0 ? 0 : static_cast<std::int64_t>(x);
}

ImageBuffer shot_noise(const ImageBuffer& img, double photon_scale,
                       RngStream& rng) {
  if (!(photon_scale > 0.0) || !std::isfinite(photon_scale)) {
    throw ValidationError("photon_scale must be a positive finite number");
  }
  ImageBuffer out = img;
  for (auto& v : out.data()) {
    const auto photons = sample_poisson(static_cast<double>(v) * photon_scale, rng);
    const double restored = std::round(static_cast<double>(photons) / photon_scale);
    v = static_cast<std::uint8_t>(std::clamp(restored, 0.0, 255.0));
  }
  return out;
}

CorruptedPair corrupt_patch(const ImageBuffer& clean,
                            const CorruptionConfig& cfg, const RngStream& rng) {
  cfg.validate();
  CorruptionRecord record;
  record.seed = rng.seed();
  record.stream = rng.stream();

  RngStream levels = rng.derive(kTagLevels);
  record.k = cfg.k_min + static_cast<int>(levels.uniform_int(
                             static_cast<std::uint64_t>(cfg.k_max - cfg.k_min + 1)));

  RngStream photons = rng.derive(kTagPhotons);
  const double u = photons.uniform();
  if (cfg.photon_scale_min == cfg.photon_scale_max) {
    record.photon_scale = cfg.photon_scale_min;
  } else {
    const double lo = std::log(cfg.photon_scale_min);
    const double hi = std::log(cfg.photon_scale_max);
    record.photon_scale = std::exp(lo + (hi - lo) * u);
  }

  ImageBuffer corrupted = replay_corruption(clean, record);
  return {std::move(corrupted), clean, record};
}

ImageBuffer replay_corruption(const ImageBuffer& clean,
                              const CorruptionRecord& record) {
  RngStream noise = RngStream(record.seed, record.stream).derive(kTagNoise);
  return shot_noise(posterize(clean, record.k), record.photon_scale, noise);
}

std::string manifest_line(const ManifestEntry& e) {
  nlohmann::ordered_json j;
  j["index"] = e.index;
  j["source"] = e.source;
  j["region"] = {e.region.x, e.region.y, e.region.w, e.region.h};
  j["k"] = e.k;
  j["photon_scale"] = e.photon_scale;
  j["seed"] = e.seed;
  return j.dump();
}

std::vector<ManifestEntry> read_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw FileNotFoundError(path.string());
  std::vector<ManifestEntry> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      ManifestEntry e;
      e.index = j.at("index").get<std::size_t>();
      e.source = j.at("source").get<std::string>();
      const auto& r = j.at("region");
      e.region = {r.at(0).get<int>(), r.at(1).get<int>(), r.at(2).get<int>(),
                  r.at(3).get<int>()};
      e.k = j.at("k").get<int>();
      e.photon_scale = j.at("photon_scale").get<double>();
      e.seed = j.at("seed").get<std::uint64_t>();
      out.push_back(std::move(e));
    } catch (const nlohmann::json::exception& ex) {
      throw ValidationError(path.string() + ":" + std::to_string(line_no) +
                            ": bad manifest record: " + ex.what());
    }
  }
  return out;
}

std::vector<ManifestEntry> generate_restoration_dataset(
    const fs::path& src_dir, const CorruptionConfig& cfg, const fs::path& out_dir,
    std::size_t count, std::uint64_t master_seed, int jobs) {
  cfg.validate();
  const auto listing = list_images(src_dir);
  if (listing.empty()) {
    throw ValidationError("no PNG/JPEG images in " + src_dir.string());
  }
  std::vector<fs::path> sources;
  for (const auto& p : listing) {
    const ImageInfo info = read_image_info(p);
    if (std::min(info.width, info.height) >= cfg.patch_side) sources.push_back(p);
  }
  if (sources.empty()) {
    throw ValidationError("every image in " + src_dir.string() +
                          " is smaller than patch_side " +
                          std::to_string(cfg.patch_side));
  }

  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw WriteError("cannot create " + out_dir.string() + ": " + ec.message());
  if (count > 0) {
    fs::create_directories(out_dir / "clean", ec);
    fs::create_directories(out_dir / "corrupt", ec);
    if (ec) throw WriteError("cannot create output tree under " + out_dir.string());
  }

  std::vector<ManifestEntry> manifest(count);
  parallel_for(count, jobs, [&](std::size_t i) {
    const RngStream pair = item_stream(master_seed, i);
    RngStream pick = pair.derive(kTagSource);
    const std::size_t src = static_cast<std::size_t>(pick.uniform_int(sources.size()));
    const ImageBuffer image = load_image(sources[src]);

    RngStream placement = pair.derive(kTagRegion);
    auto [patch, region] = extract_random_patch(image, cfg.patch_side, placement);

    RngStream seeder = pair.derive(kTagPairSeed);
    const RngStream corruption(seeder.next_u64());
    const CorruptedPair result = corrupt_patch(patch, cfg, corruption);

    const std::string name = pair_name(i);
    save_png(result.clean, out_dir / "clean" / name);
    save_png(result.corrupted, out_dir / "corrupt" / name);

    manifest[i] = {i, sources[src].filename().string(), region, result.record.k,
                   result.record.photon_scale, result.record.seed};
  });

  std::ofstream out(out_dir / "manifest.jsonl", std::ios::binary | std::ios::trunc);
  if (!out) throw WriteError("cannot create " + (out_dir / "manifest.jsonl").string());
  for (const auto& e : manifest) out << manifest_line(e) << '\n';
  out.flush();
  if (!out) throw WriteError("write failed: " + (out_dir / "manifest.jsonl").string());
  return manifest;
}

}  // namespace lowlight
