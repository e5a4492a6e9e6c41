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

#include "sns/metrics.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "sns/errors.hpp"

namespace sns {

namespace {

Eigen::MatrixXd gramian_of_mask(const GramianContributions& contrib, std::uint64_t mask) {
  Eigen::MatrixXd v = Eigen::MatrixXd::Zero(contrib.n_x, contrib.n_x);
  for (int p = 0; p < contrib.ground_size(); ++p) {
    if (mask & (1ULL << p)) v += contrib.per_sensor[static_cast<size_t>(p)];
  }
  return v;
}

std::string describe_mask(const GramianContributions& contrib, std::uint64_t mask) {
  std::string out = "{";
  bool first = true;
  for (int p = 0; p < contrib.ground_size(); ++p) {
    if (mask & (1ULL << p)) {
      if (!first) out += ",";
      out += std::to_string(contrib.ground_set[static_cast<size_t>(p)]);
      first = false;
    }
  }
  return out + "}";
}

double evaluate_mask(const Metric& metric, const GramianContributions& contrib,
                     std::uint64_t mask) {
  if (mask == 0 && metric.kind == Metric::Kind::Trace) return 0.0;
  const Eigen::MatrixXd v = gramian_of_mask(contrib, mask);
  switch (metric.kind) {
    case Metric::Kind::Trace:
      return v.trace();
    case Metric::Kind::Rank: {
      if (mask == 0) return 0.0;
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(v, Eigen::EigenvaluesOnly);
      if (es.info() != Eigen::Success) {
        throw NumericalError("rank metric: eigendecomposition failed on set " +
                             describe_mask(contrib, mask));
      }
      const auto& lambda = es.eigenvalues();
      const double lmax = lambda.maxCoeff();
      if (!(lmax > 0.0)) return 0.0;
      const double cutoff = metric.rank_tol * lmax;
      int rank = 0;
      for (Eigen::Index i = 0; i < lambda.size(); ++i) {
        if (lambda[i] > cutoff) ++rank;
      }
      return static_cast<double>(rank);
    }
    case Metric::Kind::LogDet: {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(v, Eigen::EigenvaluesOnly);
      if (es.info() != Eigen::Success) {
        throw NumericalError("logdet metric: eigendecomposition failed on set " +
                             describe_mask(contrib, mask));
      }
      const double log_eps = std::log(metric.epsilon);
      double sum = 0.0;
      for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
        const double shifted = es.eigenvalues()[i] + metric.epsilon;
        if (!(shifted > 0.0)) {
          throw NumericalError("logdet metric: non-positive eigenvalue " +
                               std::to_string(es.eigenvalues()[i]) + " on set " +
                               describe_mask(contrib, mask));
        }
        sum += std::log(shifted) - log_eps;
      }
      return sum;
    }
  }
  throw ValidationError("evaluate: unknown metric kind");
}

void check_ground_size(const GramianContributions& contrib, const char* op) {
  if (contrib.ground_size() > 64) {
    throw ValidationError(std::string(op) + ": ground set of size " +
                          std::to_string(contrib.ground_size()) +
                          " exceeds the 64-sensor limit");
  }
}

std::uint64_t mask_from_sensors(const GramianContributions& contrib,
                                const std::vector<int>& sensors, const char* op) {
  check_ground_size(contrib, op);
  std::uint64_t mask = 0;
  for (int j : sensors) {
    const int pos = contrib.position_of(j);
    if (pos < 0) {
      throw ValidationError(std::string(op) + ": sensor " + std::to_string(j) +
                            " is not in the ground set");
    }
    if (mask & (1ULL << pos)) {
      throw ValidationError(std::string(op) + ": duplicate sensor " + std::to_string(j));
    }
    mask |= (1ULL << pos);
  }
  return mask;
}

void append_violation(PropertyReport& report, PropertyViolation v) {
  ++report.violation_count;
  if (report.violations.size() < 32) report.violations.push_back(std::move(v));
}

}  // namespace

Metric Metric::trace() { return Metric{Kind::Trace, 1e-9, 1e-6}; }

Metric Metric::rank(double tol) {
  if (!(tol > 0.0)) throw ValidationError("rank metric: tolerance must be > 0");
  return Metric{Kind::Rank, tol, 1e-6};
}

Metric Metric::logdet(double eps) {
  if (!(eps > 0.0)) throw ValidationError("logdet metric: epsilon must be > 0");
  return Metric{Kind::LogDet, 1e-9, eps};
}

std::string Metric::name() const {
  switch (kind) {
    case Kind::Trace: return "trace";
    case Kind::Rank: return "rank";
    case Kind::LogDet: return "logdet";
  }
  return "?";
}

Metric::Kind parse_metric_kind(const std::string& name) {
  if (name == "trace") return Metric::Kind::Trace;
  if (name == "rank") return Metric::Kind::Rank;
  if (name == "logdet") return Metric::Kind::LogDet;
  throw ValidationError("unknown metric: " + name + " (expected trace|rank|logdet)");
}

double evaluate(const Metric& metric, const GramianContributions& contrib,
                const std::vector<int>& sensors) {
  return evaluate_mask(metric, contrib, mask_from_sensors(contrib, sensors, "evaluate"));
}

double marginal_gain(const Metric& metric, const GramianContributions& contrib,
                     const std::vector<int>& sensors, int s) {
  const std::uint64_t base = mask_from_sensors(contrib, sensors, "marginal_gain");
  const int pos = contrib.position_of(s);
  if (pos < 0) {
    throw ValidationError("marginal_gain: sensor " + std::to_string(s) +
                          " is not in the ground set");
  }
  if (base & (1ULL << pos)) {
    throw ValidationError("marginal_gain: sensor " + std::to_string(s) +
                          " is already in the set");
  }
  return evaluate_mask(metric, contrib, base | (1ULL << pos)) -
         evaluate_mask(metric, contrib, base);
}

SetFunction make_set_function(const Metric& metric, const GramianContributions& contrib) {
  check_ground_size(contrib, "make_set_function");
  SetFunction f;
  f.ground_size = contrib.ground_size();
  f.value = [metric, &contrib](std::uint64_t mask) {
    return evaluate_mask(metric, contrib, mask);
  };
  return f;
}

PropertyReport check_set_function_properties(const SetFunction& f,
                                             const PropertyCheckOptions& opts) {
  const int n = f.ground_size;
  if (n > 12) {
    throw ValidationError("check_set_function_properties: ground set of size " +
                          std::to_string(n) + " exceeds the exhaustive limit of 12");
  }

  // Tabulate all 2^n values once; the exhaustive scans below are lookups.
  const std::uint64_t full = f.full_mask();
  std::vector<double> val(static_cast<size_t>(1) << n);
  for (std::uint64_t m = 0; m <= full; ++m) val[m] = f(m);

  PropertyReport report;
  report.ground_size = n;
  const double slack = opts.slack >= 0.0 ? opts.slack : 1e-9 * (1.0 + std::abs(val[full]));
  const double mod_slack = opts.modularity_slack >= 0.0 ? opts.modularity_slack : slack;
  report.tolerance = slack;
  report.modularity_checked = opts.check_modularity;

  // Monotonicity: adding one element never decreases the value.
  for (std::uint64_t s = 0; s <= full; ++s) {
    for (int e = 0; e < n; ++e) {
      const std::uint64_t bit = 1ULL << e;
      if (s & bit) continue;
      if (val[s | bit] < val[s] - slack) {
        report.monotonicity_pass = false;
        append_violation(report, {"monotonicity", positions_from_mask(s | bit),
                                  positions_from_mask(s), e, val[s | bit], val[s]});
      }
    }
  }

  // Diminishing returns: enumerate B, its subsets A, and elements outside B.
  for (std::uint64_t b = 0; b <= full; ++b) {
    for (std::uint64_t a = b;; a = (a - 1) & b) {
      if (a != b) {
        for (int e = 0; e < n; ++e) {
          const std::uint64_t bit = 1ULL << e;
          if (b & bit) continue;
          const double gain_a = val[a | bit] - val[a];
          const double gain_b = val[b | bit] - val[b];
          if (gain_a < gain_b - slack) {
            report.submodularity_pass = false;
            append_violation(report, {"submodularity", positions_from_mask(a),
                                      positions_from_mask(b), e, gain_a, gain_b});
          }
        }
      }
      if (a == 0) break;
    }
  }

  if (opts.check_modularity) {
    // f(A ∪ B) = f(A) + f(B) for disjoint A, B.
    for (std::uint64_t m = 0; m <= full; ++m) {
      for (std::uint64_t a = m;; a = (a - 1) & m) {
        const std::uint64_t b = m & ~a;
        if (a <= b) {  // each unordered pair once
          const double lhs = val[m];
          const double rhs = val[a] + val[b];
          if (std::abs(lhs - rhs) > mod_slack) {
            report.modularity_pass = false;
            append_violation(report, {"modularity", positions_from_mask(a),
                                      positions_from_mask(b), -1, lhs, rhs});
          }
        }
        if (a == 0) break;
      }
    }
  }
  return report;
}

PropertyReport check_properties(const Metric& metric, const GramianContributions& contrib) {
  if (contrib.ground_size() > 12) {
    throw ValidationError("check_properties: ground set of size " +
                          std::to_string(contrib.ground_size()) +
                          " exceeds the exhaustive limit of 12");
  }
  PropertyCheckOptions opts;
  opts.check_modularity = metric.kind == Metric::Kind::Trace;
  PropertyReport report =
      check_set_function_properties(make_set_function(metric, contrib), opts);
  report.metric = metric.name();
  // The checker reports ground-set positions; translate to sensor ids.
  for (PropertyViolation& v : report.violations) {
    for (int& p : v.set_a) p = contrib.ground_set[static_cast<size_t>(p)];
    for (int& p : v.set_b) p = contrib.ground_set[static_cast<size_t>(p)];
    if (v.element >= 0) v.element = contrib.ground_set[static_cast<size_t>(v.element)];
  }
  return report;
}

void write_property_report_json(const PropertyReport& report, std::ostream& out) {
  nlohmann::json doc;
  doc["metric"] = report.metric;
  doc["ground_size"] = report.ground_size;
  doc["tolerance"] = report.tolerance;
  doc["pass"] = report.pass();
  doc["monotonicity"] = report.monotonicity_pass ? "pass" : "fail";
  doc["submodularity"] = report.submodularity_pass ? "pass" : "fail";
  if (report.modularity_checked) {
    doc["modularity"] = report.modularity_pass ? "pass" : "fail";
  }
  doc["violation_count"] = report.violation_count;
  nlohmann::json list = nlohmann::json::array();
  for (const PropertyViolation& v : report.violations) {
    nlohmann::json item;
    item["property"] = v.property;
    item["set_a"] = v.set_a;
    item["set_b"] = v.set_b;
    if (v.element >= 0) item["element"] = v.element;
    item["lhs"] = v.lhs;
    item["rhs"] = v.rhs;
    list.push_back(std::move(item));
  }
  doc["counterexamples"] = std::move(list);
  out << doc.dump(2) << "\n";
}

}  // namespace sns
