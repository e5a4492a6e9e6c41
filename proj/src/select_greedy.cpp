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

#include "sns/select_greedy.hpp"

#include <algorithm>
#include <queue>

#include <json.hpp>

#include "sns/errors.hpp"

namespace sns {

namespace {

struct Candidate {
  double gain;
  int pos;
  int stamp;  // iteration at which the gain was computed
};

// Max-heap: larger gain first, ties to the lower position.
struct CandidateLess {
  bool operator()(const Candidate& a, const Candidate& b) const {
    if (a.gain != b.gain) return a.gain < b.gain;
    return a.pos > b.pos;
  }
};

long long binomial_guarded(int n, int r, long long cap) {
  long long c = 1;
  for (int i = 0; i < r; ++i) {
    c = c * (n - i) / (i + 1);
    if (c > cap) return cap + 1;
  }
  return c;
}

}  // namespace

GreedyCoreResult greedy_core(const SetFunction& f, int r) {
  const int n = f.ground_size;
  if (n > 64) {
    throw ValidationError("greedy_select: ground set exceeds the 64-sensor limit");
  }
  if (r < 1 || r > n) {
    throw ValidationError("greedy_select: r = " + std::to_string(r) +
                          " out of range [1, " + std::to_string(n) + "]");
  }

  GreedyCoreResult out;
  std::uint64_t current = 0;
  double current_value = f(0);

  // Initial gains are valid for iteration 1 (computed against the empty set).
  std::priority_queue<Candidate, std::vector<Candidate>, CandidateLess> heap;
  for (int p = 0; p < n; ++p) {
    heap.push({f(1ULL << p) - current_value, p, 1});
  }

  for (int iter = 1; iter <= r; ++iter) {
    for (;;) {
      Candidate top = heap.top();
      heap.pop();
      if (top.stamp == iter) {
        current |= (1ULL << top.pos);
        current_value += top.gain;
        out.positions.push_back(top.pos);
        out.gains.push_back(top.gain);
        break;
      }
      top.gain = f(current | (1ULL << top.pos)) - current_value;
      top.stamp = iter;
      heap.push(top);
    }
  }
  // Recompute the objective directly; the incremental value can carry
  // accumulated rounding.
  out.objective = f(current);
  return out;
}

std::pair<std::uint64_t, double> brute_force_core(const SetFunction& f, int r) {
  const int n = f.ground_size;
  if (r < 1 || r > n) {
    throw ValidationError("brute_force_optimum: r = " + std::to_string(r) +
                          " out of range [1, " + std::to_string(n) + "]");
  }
  if (binomial_guarded(n, r, 1000000) > 1000000) {
    throw ValidationError("brute_force_optimum: C(" + std::to_string(n) + ", " +
                          std::to_string(r) + ") exceeds the 10^6 evaluation guard");
  }

  // Lexicographic enumeration of r-combinations; strict improvement keeps
  // the lexicographically smallest maximizer.
  std::vector<int> comb(static_cast<size_t>(r));
  for (int i = 0; i < r; ++i) comb[static_cast<size_t>(i)] = i;

  std::uint64_t best_mask = 0;
  double best_value = 0.0;
  bool first = true;
  for (;;) {
    std::uint64_t mask = 0;
    for (int p : comb) mask |= (1ULL << p);
    const double value = f(mask);
    if (first || value > best_value) {
      best_mask = mask;
      best_value = value;
      first = false;
    }
    int i = r - 1;
    while (i >= 0 && comb[static_cast<size_t>(i)] == n - r + i) --i;
    if (i < 0) break;
    ++comb[static_cast<size_t>(i)];
    for (int k = i + 1; k < r; ++k) comb[static_cast<size_t>(k)] = comb[static_cast<size_t>(k - 1)] + 1;
  }
  return {best_mask, best_value};
}

SelectionResult greedy_select(const Metric& metric, const GramianContributions& contrib,
                              int r) {
  const SetFunction f = memoize(make_set_function(metric, contrib));
  const GreedyCoreResult core = greedy_core(f, r);

  SelectionResult result;
  result.method = "greedy";
  for (int p : core.positions) {
    result.selected.push_back(contrib.ground_set[static_cast<size_t>(p)]);
  }
  result.gains = core.gains;
  result.objective = core.objective;
  return result;
}

std::pair<std::vector<int>, double> brute_force_optimum(const Metric& metric,
                                                        const GramianContributions& contrib,
                                                        int r) {
  const SetFunction f = memoize(make_set_function(metric, contrib));
  const auto [mask, value] = brute_force_core(f, r);
  std::vector<int> ids;
  for (int p : positions_from_mask(mask)) {
    ids.push_back(contrib.ground_set[static_cast<size_t>(p)]);
  }
  return {ids, value};
}

void write_selection_json(const SelectionResult& result, std::ostream& out) {
  nlohmann::json doc;
  doc["method"] = result.method;
  doc["selected"] = result.selected;
  doc["objective"] = result.objective;
  doc["gains"] = result.gains;
  doc["seed"] = nullptr;
  if (result.seed) doc["seed"] = *result.seed;
  if (result.samples) doc["samples"] = *result.samples;
  if (result.fractional) {
    std::vector<double> x(result.fractional->data(),
                          result.fractional->data() + result.fractional->size());
    doc["fractional"] = x;
    doc["exact_extension"] = result.exact_extension;
  }
  out << doc.dump(2) << "\n";
}

}  // namespace sns
