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
#include <ostream>
#include <vector>

#include "sns/integrator.hpp"
#include "sns/select_greedy.hpp"
#include "sns/variational.hpp"

namespace sns {

/// Measurements of the selected sensors stacked over the whole horizon,
/// k-major with sensors ascending within each block (the same row order as
/// observability_matrix).
struct LiftedObservation {
  Eigen::VectorXd y;         // length steps * |sensors|
  std::vector<int> sensors;  // ascending
  double dt = 0.0;
  int steps = 0;
};

/// Extracts the selected-sensor measurements from a simulated trajectory.
LiftedObservation observe(const Trajectory& traj, const std::vector<int>& sensors);

/// Box bounds on the initial state, lower <= upper elementwise.
struct Bounds {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  void validate(int n) const;
  Eigen::VectorXd midpoint() const { return 0.5 * (lower + upper); }
  Eigen::VectorXd clamp(const Eigen::VectorXd& x) const {
    return x.cwiseMax(lower).cwiseMin(upper);
  }
};

/// Open-lifted-observer residual g(x0) = y - stacked prediction, where the
/// prediction simulates from x0_guess over the observation horizon.
Eigen::VectorXd lifted_residual(const Model& model, const IrkConfig& cfg,
                                const std::vector<int>& sensors,
                                const Eigen::Ref<const Eigen::VectorXd>& x0_guess,
                                const LiftedObservation& obs);

struct EstimateOptions {
  int max_iters = 200;
  double gradient_tol = 1e-10;  // on ||Psi^T g||_2 projected onto the box
  double step_tol = 1e-12;      // on the accepted step norm
};

struct EstimateReport {
  Eigen::VectorXd x0;
  bool converged = false;
  int iterations = 0;
  double residual_norm = 0.0;
  double gradient_norm = 0.0;       // projected gradient at the solution
  std::vector<int> active_lower;    // coordinates pinned at the bounds
  std::vector<int> active_upper;
};

/// Minimizes ||g(x0)||^2 subject to the box via damped Gauss-Newton
/// (Levenberg-Marquardt) with projection onto the bounds. The residual
/// Jacobian is the exact variational observability matrix at the current
/// guess. On hitting the iteration cap the best iterate is returned with
/// converged = false.
EstimateReport estimate_initial_state(const Model& model, const IrkConfig& cfg,
                                      const std::vector<int>& sensors,
                                      const LiftedObservation& obs, const Bounds& bounds,
                                      const Eigen::Ref<const Eigen::VectorXd>& x0_init,
                                      const EstimateOptions& opts = {});

/// Relative estimation error over the whole horizon:
/// ||stack(truth) - stack(est)||_2 / ||stack(truth)||_2.
double estimation_error(const Trajectory& truth, const Trajectory& estimate);

struct TrialResult {
  double alpha = 0.0;
  double error = 0.0;
  bool converged = false;
};

struct ValidationReport {
  std::string method;
  int r = 0;
  std::vector<TrialResult> trials;
  double median = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
};

/// Runs the estimation protocol for one selection: per trial, perturb the
/// base initial state by a scalar factor drawn from (0, alpha_max),
/// simulate the truth, measure the selected sensors (noiseless), estimate
/// x0 from the box midpoint, re-simulate, and record the relative error.
/// Trials use substream (seed, trial) and may run on several threads; the
/// report is reduced in trial order either way.
ValidationReport validation_run(const Model& model, const IrkConfig& cfg, int steps,
                                const SelectionResult& selection, int trials,
                                double alpha_max, const Bounds& bounds,
                                const Eigen::Ref<const Eigen::VectorXd>& x0_base,
                                std::uint64_t seed, int threads = 1);

void write_validation_json(const ValidationReport& report, std::ostream& out);

/// Plot-ready rows "r,trial,error,method" (no header; callers prepend one,
/// so several reports can share a file).
void append_validation_csv(const ValidationReport& report, std::ostream& out);

}  // namespace sns
