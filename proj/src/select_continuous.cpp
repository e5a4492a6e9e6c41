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

#include "sns/select_continuous.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sns/errors.hpp"
#include "sns/rng.hpp"

namespace sns {

namespace {

void validate_point(const FractionalPoint& x, const char* op) {
  if (x.size() > 64) {
    throw ValidationError(std::string(op) + ": " + std::to_string(x.size()) +
                          " coordinates exceed the 64-sensor limit");
  }
  for (int s = 0; s < x.size(); ++s) {
    if (!(x.x[s] >= 0.0 && x.x[s] <= 1.0)) {
      throw ValidationError(std::string(op) + ": coordinate " + std::to_string(s) +
                            " = " + std::to_string(x.x[s]) + " outside [0, 1]");
    }
  }
}

void validate_sizes(const SetFunction& f, const FractionalPoint& x, const char* op) {
  if (x.size() != f.ground_size) {
    throw ValidationError(std::string(op) + ": point has " + std::to_string(x.size()) +
                          " coordinates, ground set has " +
                          std::to_string(f.ground_size));
  }
  validate_point(x, op);
}

struct GreedyPath {
  FractionalPoint x;
  std::vector<double> direction_values;  // sum of chosen weights per round
};

GreedyPath continuous_greedy_path(const SetFunction& f, int r, const SamplerConfig& cfg) {
  cfg.validate();
  const int n = f.ground_size;
  if (r < 1 || r > n) {
    throw ValidationError("continuous_greedy: r = " + std::to_string(r) +
                          " out of range [1, " + std::to_string(n) + "]");
  }

  GreedyPath path;
  path.x.x = Eigen::VectorXd::Zero(n);
  const double step = 1.0 / static_cast<double>(r);

  std::vector<int> order(static_cast<size_t>(n));
  Eigen::VectorXd contribution(n);
  for (int round = 1; round <= r; ++round) {
    // One common batch of samples for all coordinates this round; the
    // substream index keeps batches disjoint across rounds. Running mean
    // so constant per-sample values (modular f) stay exact.
    Eigen::VectorXd weights = Eigen::VectorXd::Zero(n);
    for (int t = 0; t < cfg.samples; ++t) {
      const std::uint64_t idx =
          static_cast<std::uint64_t>(round - 1) * static_cast<std::uint64_t>(cfg.samples) +
          static_cast<std::uint64_t>(t);
      const std::uint64_t s_mask = sample_set(path.x, idx, cfg.seed);
      const double base = f(s_mask);
      for (int s = 0; s < n; ++s) {
        const std::uint64_t bit = 1ULL << s;
        // f(S ∪ {s}) - f(S \ {s}) costs one extra evaluation: the
        // untouched side equals the base value.
        contribution[s] = (s_mask & bit) ? base - f(s_mask & ~bit) : f(s_mask | bit) - base;
      }
      weights += (contribution - weights) / static_cast<double>(t + 1);
    }

    // Cardinality-matroid argmax of sum of weights: the top-r positions,
    // ties to the lower index.
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      if (weights[a] != weights[b]) return weights[a] > weights[b];
      return a < b;
    });
    double chosen_weight = 0.0;
    for (int i = 0; i < r; ++i) {
      const int s = order[static_cast<size_t>(i)];
      path.x.x[s] = std::min(1.0, path.x.x[s] + step);
      chosen_weight += weights[s];
    }
    path.direction_values.push_back(chosen_weight);
  }

  if (std::abs(path.x.x.sum() - static_cast<double>(r)) > 1e-12 * static_cast<double>(r)) {
    throw NumericalError("continuous_greedy: fractional mass " +
                         std::to_string(path.x.x.sum()) + " != r = " + std::to_string(r));
  }
  return path;
}

}  // namespace

void FractionalPoint::clamp() {
  for (int s = 0; s < size(); ++s) x[s] = std::min(1.0, std::max(0.0, x[s]));
}

void SamplerConfig::validate() const {
  if (samples < 1) throw ValidationError("SamplerConfig: samples must be >= 1");
}

std::uint64_t sample_set(const FractionalPoint& x, std::uint64_t sample_index,
                         std::uint64_t seed) {
  validate_point(x, "sample_set");
  std::uint64_t mask = 0;
  for (int s = 0; s < x.size(); ++s) {
    const double u = CounterRng::uniform_at(seed, sample_index, static_cast<std::uint64_t>(s));
    if (u < x.x[s]) mask |= (1ULL << s);
  }
  return mask;
}

double multilinear_exact(const SetFunction& f, const FractionalPoint& x) {
  validate_sizes(f, x, "multilinear_exact");
  const int n = f.ground_size;
  if (n > 20) {
    throw ValidationError("multilinear_exact: ground set of size " + std::to_string(n) +
                          " exceeds the enumeration limit of 20");
  }
  const std::uint64_t full = f.full_mask();
  double total = 0.0;
  for (std::uint64_t mask = 0;; ++mask) {
    double weight = 1.0;
    for (int s = 0; s < n; ++s) {
      weight *= (mask & (1ULL << s)) ? x.x[s] : 1.0 - x.x[s];
    }
    if (weight != 0.0) total += weight * f(mask);
    if (mask == full) break;
  }
  return total;
}

double multilinear_estimate(const SetFunction& f, const FractionalPoint& x,
                            const SamplerConfig& cfg) {
  validate_sizes(f, x, "multilinear_estimate");
  cfg.validate();
  // Running mean: degenerate distributions (x at a vertex) return the set
  // value exactly for any sample count.
  double mean = 0.0;
  for (int t = 0; t < cfg.samples; ++t) {
    const double value = f(sample_set(x, static_cast<std::uint64_t>(t), cfg.seed));
    mean += (value - mean) / static_cast<double>(t + 1);
  }
  return mean;
}

Eigen::VectorXd multilinear_gradient(const SetFunction& f, const FractionalPoint& x,
                                     const SamplerConfig& cfg) {
  validate_sizes(f, x, "multilinear_gradient");
  cfg.validate();
  const int n = f.ground_size;
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd contribution(n);
  for (int t = 0; t < cfg.samples; ++t) {
    const std::uint64_t s_mask = sample_set(x, static_cast<std::uint64_t>(t), cfg.seed);
    const double base = f(s_mask);
    for (int s = 0; s < n; ++s) {
      const std::uint64_t bit = 1ULL << s;
      contribution[s] = (s_mask & bit) ? base - f(s_mask & ~bit) : f(s_mask | bit) - base;
    }
    grad += (contribution - grad) / static_cast<double>(t + 1);
  }
  return grad;
}

double multilinear_mixed_second(const SetFunction& f, const FractionalPoint& x, int a,
                                int b, const SamplerConfig& cfg) {
  validate_sizes(f, x, "multilinear_mixed_second");
  cfg.validate();
  if (a == b) throw ValidationError("multilinear_mixed_second: a and b must differ");
  if (a < 0 || a >= f.ground_size || b < 0 || b >= f.ground_size) {
    throw ValidationError("multilinear_mixed_second: position out of range");
  }
  const std::uint64_t bit_a = 1ULL << a;
  const std::uint64_t bit_b = 1ULL << b;
  double mean = 0.0;
  for (int t = 0; t < cfg.samples; ++t) {
    const std::uint64_t s_mask = sample_set(x, static_cast<std::uint64_t>(t), cfg.seed);
    const double term = f((s_mask | bit_a) | bit_b) - f((s_mask | bit_b) & ~bit_a) -
                        f((s_mask | bit_a) & ~bit_b) + f(s_mask & ~(bit_a | bit_b));
    mean += (term - mean) / static_cast<double>(t + 1);
  }
  return mean;
}

FractionalPoint continuous_greedy(const SetFunction& f, int r, const SamplerConfig& cfg) {
  return continuous_greedy_path(f, r, cfg).x;
}

std::vector<int> pipage_round(const std::function<double(const FractionalPoint&)>& extension,
                              FractionalPoint x, int r) {
  const int n = x.size();
  validate_point(x, "pipage_round");
  if (std::abs(x.x.sum() - static_cast<double>(r)) > 1e-9) {
    throw ValidationError("pipage_round: coordinates sum to " + std::to_string(x.x.sum()) +
                          ", expected r = " + std::to_string(r));
  }

  const double integral_tol = 1e-9;
  auto fractional = [&](int s) {
    return x.x[s] > integral_tol && x.x[s] < 1.0 - integral_tol;
  };

  for (int guard = 0;; ++guard) {
    if (guard > 2 * n) {
      throw NumericalError("pipage_round: elimination did not terminate in " +
                           std::to_string(2 * n) + " iterations");
    }
    int a = -1, b = -1;
    for (int s = 0; s < n && b < 0; ++s) {
      if (!fractional(s)) continue;
      if (a < 0) {
        a = s;
      } else {
        b = s;
      }
    }
    if (b < 0) break;  // fewer than two fractional coordinates left

    // Feasible extremes along e_a - e_b: one coordinate hits {0, 1} at
    // each endpoint; the total mass is preserved.
    const double t_up = std::min(1.0 - x.x[a], x.x[b]);
    const double t_down = -std::min(x.x[a], 1.0 - x.x[b]);

    FractionalPoint up = x;
    up.x[a] += t_up;
    up.x[b] -= t_up;
    up.clamp();
    FractionalPoint down = x;
    down.x[a] += t_down;
    down.x[b] -= t_down;
    down.clamp();

    // Ties move a upward.
    x = (extension(up) >= extension(down)) ? up : down;
  }

  std::vector<int> support;
  for (int s = 0; s < n; ++s) {
    if (x.x[s] > 0.5) support.push_back(s);
  }
  if (static_cast<int>(support.size()) != r) {
    throw NumericalError("pipage_round: rounded support has " +
                         std::to_string(support.size()) + " elements, expected " +
                         std::to_string(r));
  }
  return support;
}

SelectionResult continuous_select(const Metric& metric, const GramianContributions& contrib,
                                  int r, const SamplerConfig& cfg, bool force_exact) {
  const SetFunction f = memoize(make_set_function(metric, contrib));
  const GreedyPath path = continuous_greedy_path(f, r, cfg);

  const bool use_exact = force_exact || f.ground_size <= 20;
  std::function<double(const FractionalPoint&)> extension;
  if (use_exact) {
    extension = [&f](const FractionalPoint& p) { return multilinear_exact(f, p); };
  } else {
    // Fixed-seed estimator: the same substreams score both endpoints of
    // every elimination step (common random numbers).
    SamplerConfig rounding_cfg = cfg;
    rounding_cfg.seed = mix64(cfg.seed ^ 0x70697061676500ULL);
    extension = [&f, rounding_cfg](const FractionalPoint& p) {
      return multilinear_estimate(f, p, rounding_cfg);
    };
  }

  const std::vector<int> positions = pipage_round(extension, path.x, r);

  SelectionResult result;
  result.method = "continuous";
  for (int p : positions) result.selected.push_back(contrib.ground_set[static_cast<size_t>(p)]);
  std::sort(result.selected.begin(), result.selected.end());
  result.objective = evaluate(metric, contrib, result.selected);
  result.gains = path.direction_values;
  result.seed = cfg.seed;
  result.samples = cfg.samples;
  result.fractional = path.x.x;
  result.exact_extension = use_exact;
  return result;
}

}  // namespace sns
