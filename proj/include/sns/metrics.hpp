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

#include <ostream>
#include <string>
#include <vector>

#include "sns/set_function.hpp"
#include "sns/variational.hpp"

namespace sns {

/// Observability set function over Gramian contributions.
///
/// Trace:  trace(V(S)); a modular function (the sum of per-sensor traces).
/// Rank:   number of eigenvalues of V(S) above rank_tol * lambda_max;
///         submodular and monotone.
/// LogDet: logdet(V(S) + eps I) - n_x log(eps); the regularization keeps
///         the value finite on rank-deficient Gramians and the shift
///         normalizes f(empty) = 0; submodular and monotone.
struct Metric {
  enum class Kind { Trace, Rank, LogDet };

  Kind kind = Kind::LogDet;
  double rank_tol = 1e-9;  // relative eigenvalue cutoff (Rank)
  double epsilon = 1e-6;   // regularizer (LogDet)

  static Metric trace();
  static Metric rank(double tol = 1e-9);
  static Metric logdet(double eps = 1e-6);

  std::string name() const;
};

/// Parses "trace", "rank", or "logdet".
Metric::Kind parse_metric_kind(const std::string& name);

/// f(S) for a sensor set; the empty set evaluates to 0 for every metric.
double evaluate(const Metric& metric, const GramianContributions& contrib,
                const std::vector<int>& sensors);

/// f(S ∪ {s}) - f(S) for s outside S.
double marginal_gain(const Metric& metric, const GramianContributions& contrib,
                     const std::vector<int>& sensors, int s);

/// Bridges a metric over contributions to the mask-based set-function
/// interface, positions indexing contrib.ground_set. The contributions
/// object must outlive the returned function.
SetFunction make_set_function(const Metric& metric, const GramianContributions& contrib);

struct PropertyViolation {
  std::string property;    // "modularity" | "monotonicity" | "submodularity"
  std::vector<int> set_a;  // sensor ids
  std::vector<int> set_b;
  int element = -1;
  double lhs = 0.0;  // the side that should dominate
  double rhs = 0.0;
};

/// Result of exhaustively checking set-function properties on a small
/// ground set. Counterexample lists are capped at 32 entries each; empty
/// lists mean pass.
struct PropertyReport {
  std::string metric;
  int ground_size = 0;
  double tolerance = 0.0;
  bool modularity_checked = false;
  bool modularity_pass = true;
  bool monotonicity_pass = true;
  bool submodularity_pass = true;
  long long violation_count = 0;
  std::vector<PropertyViolation> violations;

  bool pass() const { return modularity_pass && monotonicity_pass && submodularity_pass; }
};

struct PropertyCheckOptions {
  bool check_modularity = false;
  /// Slack for the inequalities; negative means the default
  /// 1e-9 * (1 + |f(V)|). Modularity is compared with modularity_slack,
  /// which defaults to the same value.
  double slack = -1.0;
  double modularity_slack = -1.0;
};

/// Exhaustive checker over an arbitrary set function (ground size <= 12):
/// monotonicity f(S ∪ {s}) >= f(S), the diminishing-returns inequality
/// f(A ∪ {s}) - f(A) >= f(B ∪ {s}) - f(B) for all A ⊆ B, s ∉ B, and
/// optionally modularity f(A ∪ B) = f(A) + f(B) for disjoint A, B.
PropertyReport check_set_function_properties(const SetFunction& f,
                                             const PropertyCheckOptions& opts);

/// check_set_function_properties applied to a metric over contributions;
/// modularity is checked for Trace. Counterexamples report sensor ids.
PropertyReport check_properties(const Metric& metric, const GramianContributions& contrib);

/// JSON with pass/fail per property and counterexample tuples.
void write_property_report_json(const PropertyReport& report, std::ostream& out);

}  // namespace sns
