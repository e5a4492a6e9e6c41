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
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "sns/metrics.hpp"
#include "sns/set_function.hpp"

namespace sns {

/// Outcome of a sensor-selection run. `selected` holds sensor ids, in
/// selection order for the greedy method and ascending for the continuous
/// method; `gains` is the per-iteration audit trail.
struct SelectionResult {
  std::string method;  // "greedy" | "continuous"
  std::vector<int> selected;
  double objective = 0.0;
  std::vector<double> gains;
  std::optional<std::uint64_t> seed;  // continuous only
  std::optional<int> samples;         // continuous only
  std::optional<Eigen::VectorXd> fractional;  // pre-rounding point (audit)
  bool exact_extension = false;  // rounding used exact enumeration
};

void write_selection_json(const SelectionResult& result, std::ostream& out);

/// Greedy maximization under |S| = r: iteratively adds the sensor with the
/// largest marginal gain (ties broken by lowest index). Implemented with
/// lazy evaluation (a priority queue of possibly stale gains revalidated on
/// pop), which is output-identical to the naive scan for monotone
/// submodular objectives.
SelectionResult greedy_select(const Metric& metric, const GramianContributions& contrib,
                              int r);

/// Exact maximizer over all C(|V|, r) subsets. Ties resolve to the
/// lexicographically smallest set. Guarded to at most 10^6 evaluations.
std::pair<std::vector<int>, double> brute_force_optimum(const Metric& metric,
                                                        const GramianContributions& contrib,
                                                        int r);

/// Mask-based cores, usable with arbitrary set functions.
struct GreedyCoreResult {
  std::vector<int> positions;  // selection order
  std::vector<double> gains;
  double objective = 0.0;
};
GreedyCoreResult greedy_core(const SetFunction& f, int r);
std::pair<std::uint64_t, double> brute_force_core(const SetFunction& f, int r);

}  // namespace sns
