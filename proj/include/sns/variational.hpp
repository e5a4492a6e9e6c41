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
#include <ostream>
#include <vector>

#include "sns/integrator.hpp"

namespace sns {

/// Accumulated state-transition matrices along a trajectory:
/// phis[0] = I and phis[k] = (step Jacobian at x_{k-1}) * phis[k-1], the
/// chain-rule sensitivity of x_k with respect to x_0.
struct TransitionStack {
  std::vector<Eigen::MatrixXd> phis;  // each n_x x n_x

  int horizon() const { return static_cast<int>(phis.size()); }
  int dimension() const { return phis.empty() ? 0 : static_cast<int>(phis[0].rows()); }
};

/// Per-sensor observability Gramian contributions. Sensor j measures
/// species j (unit measurement row), and
///   contribution(j) = sum_k (row j of phis[k])^T (row j of phis[k]),
/// a symmetric PSD matrix. The Gramian of any sensor set is the sum of its
/// members' contributions.
struct GramianContributions {
  std::vector<int> ground_set;               // candidate sensor indices, ascending
  std::vector<Eigen::MatrixXd> per_sensor;   // aligned with ground_set
  int n_x = 0;

  int ground_size() const { return static_cast<int>(ground_set.size()); }
  /// Position of sensor id j in ground_set, or -1.
  int position_of(int j) const;
  const Eigen::MatrixXd& contribution(int sensor_id) const;
};

/// Builds phis for every step of the trajectory by left-multiplying the
/// exact per-step Jacobians in trajectory order.
TransitionStack transition_matrices(const Model& model, const Trajectory& traj,
                                    const IrkConfig& cfg);

/// Observability matrix for a sensor set: the N|S| x n_x vertical stack of
/// the selected rows of phis[k], k-major, sensors in ascending order within
/// each block. An empty set yields a 0-row matrix.
Eigen::MatrixXd observability_matrix(const TransitionStack& stack,
                                     const std::vector<int>& sensors);

/// Per-sensor contributions for the given candidate set (indices < n_x).
GramianContributions sensor_contributions(const TransitionStack& stack,
                                          const std::vector<int>& ground_set);

/// Gramian of a sensor set: the sum of its members' contributions, added
/// in ascending sensor order (fixed order for reproducibility). The empty
/// set yields the zero matrix.
Eigen::MatrixXd gramian_of_set(const GramianContributions& contrib,
                               const std::vector<int>& sensors);

/// JSON export: { "ground_set": [...], "n_x": n, "contributions":
/// { "j": [[...]] } }, full double precision.
void write_gramian_json(const GramianContributions& contrib, std::ostream& out);

}  // namespace sns
