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
#ifndef LOWLIGHT_RNG_HPP_
#define LOWLIGHT_RNG_HPP_

#include <cstdint>

namespace lowlight {

// SplitMix64 finalizer (Stafford "mix13" constants).
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Counter-based generator. The whole algorithm is:
//
//   key      = mix64(mix64(seed) ^ (stream * G + C))
//   draw(n)  = mix64(key + n * G)        for n = 1, 2, 3, ...
//
// with G = 0x9E3779B97F4A7C15 and C = 0x632BE59BD9B4E019, all arithmetic
// mod 2^64. It uses no platform RNG, so a given (seed, stream) yields the
// same sequence everywhere. Derived helpers (uniform, uniform_int, normal)
// are also written out below and consume a fixed number of draws.
class RngStream {
 public:
  static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
  static constexpr std::uint64_t kStreamSalt = 0x632BE59BD9B4E019ULL;

  explicit RngStream(std::uint64_t seed, std::uint64_t stream = 0)
      : seed_(seed),
        stream_(stream),
        key_(mix64(mix64(seed) ^ (stream * kGolden + kStreamSalt))) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }
  std::uint64_t draws() const { return counter_; }

  // Independent child stream, identified by tag. Does not advance *this.
  RngStream derive(std::uint64_t tag) const {
    return RngStream(seed_, mix64(stream_ + (tag + 1) * kGolden));
  }

  std::uint64_t next_u64() { return mix64(key_ + (++counter_) * kGolden); }

  // [0, 1) with 53 bits of resolution. One draw.
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // [lo, hi). One draw.
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Integer in [0, n) by rejection; n must be > 0. Usually one draw.
  std::uint64_t uniform_int(std::uint64_t n);

  // Standard normal via Box-Muller, cosine branch only. Two draws.
  double normal();

  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

// Stream for item `index` of a batch run under `master_seed`. Results depend
// only on the index, never on which worker processes it.
inline RngStream item_stream(std::uint64_t master_seed, std::uint64_t index) {
  return RngStream(master_seed, index);
}

}  // namespace lowlight

#endif  // LOWLIGHT_RNG_HPP_
