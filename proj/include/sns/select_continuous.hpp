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

#include <Eigen/Core>
#include <cstdint>
#include <functional>

#include "sns/select_greedy.hpp"
#include "sns/set_function.hpp"

namespace sns {

/// A point in [0,1]^{|V|}; coordinate s is the probability that sensor
/// position s is included in a random set.
struct FractionalPoint {
  Eigen::VectorXd x;

  int size() const { return static_cast<int>(x.size()); }
  void clamp();  // projects every coordinate back into [0, 1]
};

/// Monte-Carlo configuration for multilinear-extension estimates. Samples
/// come from counter-based substreams keyed (seed, sample index), so
/// evaluation order and parallel scheduling cannot change the draw.
struct SamplerConfig {
  int samples = 64;       // K
  std::uint64_t seed = 0;

  void validate() const;
};

/// Draws the random set S_x: each position s is included independently
/// with probability x[s], using the substream keyed (seed, sample_index).
std::uint64_t sample_set(const FractionalPoint& x, std::uint64_t sample_index,
                         std::uint64_t seed);

/// Exact multilinear extension
///   F(x) = sum_S f(S) prod_{s in S} x_s prod_{s not in S} (1 - x_s),
/// by enumeration of all subsets. Guarded to ground sets of size <= 20.
double multilinear_exact(const SetFunction& f, const FractionalPoint& x);

/// Sample-mean estimate of F(x) = E[f(S_x)] over cfg.samples draws.
double multilinear_estimate(const SetFunction& f, const FractionalPoint& x,
                            const SamplerConfig& cfg);

/// Sampled gradient: coordinate s estimates E[f(S_x ∪ {s}) - f(S_x \ {s})].
/// One common batch of sample sets is reused for every coordinate, which
/// makes the estimate exact (variance-free) for modular f.
Eigen::VectorXd multilinear_gradient(const SetFunction& f, const FractionalPoint& x,
                                     const SamplerConfig& cfg);

/// Sampled mixed second derivative for positions a != b, the four-term
/// toggle estimator. Non-positive (up to sampling noise) iff f is
/// submodular; used by property tests.
double multilinear_mixed_second(const SetFunction& f, const FractionalPoint& x, int a,
                                int b, const SamplerConfig& cfg);

/// Continuous greedy ascent (cardinality matroid): starting from x = 0,
/// perform r rounds; each round estimates per-position weights from K
/// common samples, takes the top-r weight positions, and moves x by 1/r
/// along their indicator. Returns x with sum(x) = r (up to roundoff).
FractionalPoint continuous_greedy(const SetFunction& f, int r, const SamplerConfig& cfg);

/// Pipage rounding: repeatedly picks the two lowest-indexed fractional
/// coordinates and moves along e_a - e_b to whichever extreme point has the
/// larger extension value (ties move a upward); the extension restricted to
/// that segment is convex for submodular f, so the value never decreases.
/// Requires sum(x) = r within 1e-9; returns the r support positions.
std::vector<int> pipage_round(const std::function<double(const FractionalPoint&)>& extension,
                              FractionalPoint x, int r);

/// Full pipeline: continuous greedy, then pipage rounding against the exact
/// extension when |V| <= 20 (or when force_exact is set) and against the
/// fixed-seed sampled extension otherwise. Records samples, seed, the
/// fractional point, and the rounded set in the result.
SelectionResult continuous_select(const Metric& metric, const GramianContributions& contrib,
                                  int r, const SamplerConfig& cfg, bool force_exact = false);

}  // namespace sns
