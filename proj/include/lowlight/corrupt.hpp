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
#ifndef LOWLIGHT_CORRUPT_HPP_
#define LOWLIGHT_CORRUPT_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "lowlight/image.hpp"
#include "lowlight/rng.hpp"

namespace lowlight {

// Severity ranges for synthetic low-light pairs. Gray-level count k is drawn
// uniformly from [k_min, k_max]; photon scale (photons per intensity unit)
// log-uniformly from [photon_scale_min, photon_scale_max].
struct CorruptionConfig {
  int k_min = 2;
  int k_max = 8;
  double photon_scale_min = 0.05;
  double photon_scale_max = 1.0;
  int patch_side = 256;

  // Throws ValidationError naming the offending field.
  void validate() const;
};

// Uniform quantization to k levels per channel. Segment i = floor(v*k/256)
// is reconstructed as round(i*255/(k-1)), so 0 and 255 are always kept.
ImageBuffer posterize(const ImageBuffer& img, int k);

// The 256-entry table posterize applies; exposed for tests and tooling.
std::vector<std::uint8_t> posterize_table(int k);

// Poisson(lambda) by inverse transform below lambda = 30 and a rounded
// N(lambda, lambda) above. Always consumes exactly two draws.
std::int64_t sample_poisson(double lambda, RngStream& rng);

// Photon shot noise: out = clamp(round(Poisson(v*s)/s), 0, 255) per sample.
ImageBuffer shot_noise(const ImageBuffer& img, double photon_scale,
                       RngStream& rng);

struct CorruptionRecord {
  int k = 0;
  double photon_scale = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
};

struct CorruptedPair {
  ImageBuffer corrupted;
  ImageBuffer clean;
  CorruptionRecord record;
};

// Draws (k, s) from rng and returns shot_noise(posterize(clean, k), s).
// The noise comes from a child stream of rng, so replay_corruption can
// reproduce it from the record alone.
CorruptedPair corrupt_patch(const ImageBuffer& clean,
                            const CorruptionConfig& cfg, const RngStream& rng);

ImageBuffer replay_corruption(const ImageBuffer& clean,
                              const CorruptionRecord& record);

struct ManifestEntry {
  std::size_t index = 0;
  std::string source;  // file name relative to the source directory
  Region region;
  int k = 0;
  double photon_scale = 0.0;
  std::uint64_t seed = 0;

  friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

// Writes out_dir/{clean,corrupt}/NNNNNN.png and out_dir/manifest.jsonl.
// Pair i is a pure function of (eligible source listing, cfg, master_seed, i),
// so `jobs` never changes the bytes written.
std::vector<ManifestEntry> generate_restoration_dataset(
    const std::filesystem::path& src_dir, const CorruptionConfig& cfg,
    const std::filesystem::path& out_dir, std::size_t count,
    std::uint64_t master_seed, int jobs = 1);

std::string manifest_line(const ManifestEntry& e);
std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path);

}  // namespace lowlight

#endif  // LOWLIGHT_CORRUPT_HPP_
