// Copyright 2026 The Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>

namespace sns {

/// SplitMix64 finalizer. Bijective on 64-bit words with good avalanche.
inline constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Counter-based random source. The draw at (seed, stream, counter) is a
/// pure hash of the triple, so substreams never overlap, draws are
/// order-independent, and any (seed, stream) pair can be replayed from a
/// fresh object. Streams index trials, Monte-Carlo samples, or worker
/// lanes; the counter advances within one stream.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream) noexcept
      : seed_(seed), stream_(stream) {}

  static constexpr std::uint64_t word_at(std::uint64_t seed, std::uint64_t stream,
                                         std::uint64_t counter) noexcept {
    std::uint64_t h = mix64(seed);
    h = mix64(h ^ stream);
    h = mix64(h ^ counter);
    return h;
  }

  /// Uniform double in [0, 1) with 53 random bits.
  static constexpr double uniform_at(std::uint64_t seed, std::uint64_t stream,
                                     std::uint64_t counter) noexcept {
    return static_cast<double>(word_at(seed, stream, counter) >> 11) * 0x1.0p-53;
  }

  std::uint64_t next_word() noexcept { return word_at(seed_, stream_, counter_++); }

  double uniform() noexcept {
    return static_cast<double>(next_word() >> 11) * 0x1.0p-53;
  }

  /// Uniform double in the open interval (0, 1).
  double uniform_open() noexcept {
    double u = uniform();
    while (u == 0.0) u = uniform();
    return u;
  }

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream() const noexcept { return stream_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
};

}  // namespace sns
