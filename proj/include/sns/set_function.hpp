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
#include <functional>
#include <memory>
#include <vector>

#include "sns/errors.hpp"

namespace sns {

/// A real-valued set function over a ground set of size n <= 64. Subsets
/// are bitmasks over positions 0..n-1.
struct SetFunction {
  int ground_size = 0;
  std::function<double(std::uint64_t)> value;

  double operator()(std::uint64_t mask) const { return value(mask); }
  std::uint64_t full_mask() const {
    return ground_size == 64 ? ~0ULL : ((1ULL << ground_size) - 1);
  }
};

inline std::uint64_t mask_from_positions(const std::vector<int>& positions) {
  std::uint64_t mask = 0;
  for (int p : positions) mask |= (1ULL << p);
  return mask;
}

inline std::vector<int> positions_from_mask(std::uint64_t mask) {
  std::vector<int> out;
  for (int p = 0; mask != 0; ++p, mask >>= 1) {
    if (mask & 1ULL) out.push_back(p);
  }
  return out;
}

inline int popcount64(std::uint64_t mask) {
  return static_cast<int>(__builtin_popcountll(mask));
}

/// Wraps f with a full value table cache. Only usable for ground sets of
/// at most max_bits positions; evaluation is lazy, single-threaded.
inline SetFunction memoize(const SetFunction& f, int max_bits = 20) {
  if (f.ground_size > max_bits) return f;
  const auto size = static_cast<size_t>(1) << f.ground_size;
  auto table = std::make_shared<std::vector<double>>(size);
  auto known = std::make_shared<std::vector<char>>(size, 0);
  auto inner = f.value;
  SetFunction out;
  out.ground_size = f.ground_size;
  out.value = [table, known, inner](std::uint64_t mask) {
    if (!(*known)[mask]) {
      (*table)[mask] = inner(mask);
      (*known)[mask] = 1;
    }
    return (*table)[mask];
  };
  return out;
}

}  // namespace sns
