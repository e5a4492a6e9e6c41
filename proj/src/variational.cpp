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

#include "sns/variational.hpp"

#include <algorithm>

#include <json.hpp>

#include "sns/errors.hpp"

namespace sns {

namespace {

std::vector<int> sorted_unique(std::vector<int> ids, const char* what) {
  std::sort(ids.begin(), ids.end());
  if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) {
    throw ValidationError(std::string(what) + ": duplicate sensor index");
  }
  return ids;
}

}  // namespace

int GramianContributions::position_of(int j) const {
  auto it = std::lower_bound(ground_set.begin(), ground_set.end(), j);
  if (it == ground_set.end() || *it != j) return -1;
  return static_cast<int>(it - ground_set.begin());
}

const Eigen::MatrixXd& GramianContributions::contribution(int sensor_id) const {
  const int pos = position_of(sensor_id);
  if (pos < 0) {
    throw ValidationError("contribution: sensor " + std::to_string(sensor_id) +
                          " is not in the ground set");
  }
  return per_sensor[static_cast<size_t>(pos)];
}

TransitionStack transition_matrices(const Model& model, const Trajectory& traj,
                                    const IrkConfig& cfg) {
  if (traj.steps() < 1) throw ValidationError("transition_matrices: empty trajectory");
  if (traj.dimension() != model.dimension()) {
    throw ValidationError("transition_matrices: trajectory dimension mismatch");
  }

  const int n = traj.dimension();
  TransitionStack stack;
  stack.phis.reserve(static_cast<size_t>(traj.steps()));
  stack.phis.push_back(Eigen::MatrixXd::Identity(n, n));
  for (int k = 1; k < traj.steps(); ++k) {
    Eigen::MatrixXd step;
    try {
      step = step_jacobian(model, traj.states.row(k - 1).transpose(), cfg);
    } catch (const NumericalError& e) {
      throw NumericalError("transition_matrices: step " + std::to_string(k - 1) + ": " +
                           e.what());
    }
    stack.phis.push_back(step * stack.phis.back());
  }
  return stack;
}

Eigen::MatrixXd observability_matrix(const TransitionStack& stack,
                                     const std::vector<int>& sensors) {
  const int n = stack.dimension();
  const std::vector<int> ids = sorted_unique(sensors, "observability_matrix");
  for (int j : ids) {
    if (j < 0 || j >= n) {
      throw ValidationError("observability_matrix: sensor index " + std::to_string(j) +
                            " out of range");
    }
  }

  const int ny = static_cast<int>(ids.size());
  Eigen::MatrixXd psi(static_cast<Eigen::Index>(stack.horizon()) * ny, n);
  for (int k = 0; k < stack.horizon(); ++k) {
    for (int r = 0; r < ny; ++r) {
      psi.row(static_cast<Eigen::Index>(k) * ny + r) = stack.phis[static_cast<size_t>(k)].row(ids[static_cast<size_t>(r)]);
    }
  }
  return psi;
}

GramianContributions sensor_contributions(const TransitionStack& stack,
                                          const std::vector<int>& ground_set) {
  const int n = stack.dimension();
  GramianContributions contrib;
  contrib.n_x = n;
  contrib.ground_set = sorted_unique(ground_set, "sensor_contributions");
  for (int j : contrib.ground_set) {
    if (j < 0 || j >= n) {
      throw ValidationError("sensor_contributions: sensor index " + std::to_string(j) +
                            " out of range [0, " + std::to_string(n) + ")");
    }
  }

  contrib.per_sensor.reserve(contrib.ground_set.size());
  for (int j : contrib.ground_set) {
    Eigen::MatrixXd v = Eigen::MatrixXd::Zero(n, n);
    for (int k = 0; k < stack.horizon(); ++k) {
      const auto row = stack.phis[static_cast<size_t>(k)].row(j);
      v.noalias() += row.transpose() * row;
    }
    v = 0.5 * (v + v.transpose()).eval();
    contrib.per_sensor.push_back(std::move(v));
  }
  return contrib;
}

Eigen::MatrixXd gramian_of_set(const GramianContributions& contrib,
                               const std::vector<int>& sensors) {
  const std::vector<int> ids = sorted_unique(sensors, "gramian_of_set");
  Eigen::MatrixXd v = Eigen::MatrixXd::Zero(contrib.n_x, contrib.n_x);
  for (int j : ids) {
    const int pos = contrib.position_of(j);
    if (pos < 0) {
      throw ValidationError("gramian_of_set: sensor " + std::to_string(j) +
                            " is not in the ground set");
    }
    v += contrib.per_sensor[static_cast<size_t>(pos)];
  }
  return v;
}

void write_gramian_json(const GramianContributions& contrib, std::ostream& out) {
  nlohmann::json doc;
  doc["ground_set"] = contrib.ground_set;
  doc["n_x"] = contrib.n_x;
  nlohmann::json entries = nlohmann::json::object();
  for (size_t p = 0; p < contrib.per_sensor.size(); ++p) {
    const Eigen::MatrixXd& v = contrib.per_sensor[p];
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < v.rows(); ++i) {
      nlohmann::json row = nlohmann::json::array();
      for (Eigen::Index j = 0; j < v.cols(); ++j) row.push_back(v(i, j));
      rows.push_back(std::move(row));
    }
    entries[std::to_string(contrib.ground_set[p])] = std::move(rows);
  }
  doc["contributions"] = std::move(entries);
  out << doc.dump(2) << "\n";
}

}  // namespace sns
