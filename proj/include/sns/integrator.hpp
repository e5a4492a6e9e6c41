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

#include "sns/model.hpp"

namespace sns {

/// Configuration of one implicit Runge-Kutta step.
struct IrkConfig {
  double dt = 1e-2;            // step size T > 0
  double stage_tol = 1e-12;    // absolute Newton tolerance on the stage residual
  int max_newton_iters = 50;

  void validate() const;
};

/// A simulated trajectory: row k holds x_k, k = 0..N-1.
struct Trajectory {
  Eigen::MatrixXd states;  // N x n_x
  double dt = 0.0;

  int steps() const { return static_cast<int>(states.rows()); }
  int dimension() const { return static_cast<int>(states.cols()); }
};

/// One step of the 2-stage Radau IIA method:
///   x_{k+1} = x_k + (T/4) (f(z1) + 3 f(z2)),
/// where the stages (z1, z2) solve
///   z1 = x_k + T ( 1/4  f(z1) + 3/4  f(z2)),
///   z2 = x_k + T (-1/12 f(z1) + 5/12 f(z2)).
/// This is the classical Radau IIA tableau (c = (1/3, 1), b = (3/4, 1/4))
/// with the stages permuted so the weights read b = (1/4, 3/4); z1 is the
/// stiffly-accurate stage, so x_{k+1} = z1. Stages are solved by full
/// Newton iteration started from (x_k, x_k), converged when the stacked
/// residual max-norm is <= stage_tol.
Eigen::VectorXd irk_step(const Model& model, const Eigen::Ref<const Eigen::VectorXd>& x_k,
                         const IrkConfig& cfg);

/// Exact derivative d x_{k+1} / d x_k of the discrete step map, obtained by
/// implicit differentiation of the converged stage system: one linear solve
/// with the final Newton matrix against the stage-equation partials, then
/// I + (T/4) (J(z1) dz1/dx + 3 J(z2) dz2/dx).
Eigen::MatrixXd step_jacobian(const Model& model,
                              const Eigen::Ref<const Eigen::VectorXd>& x_k,
                              const IrkConfig& cfg);

struct StepWithJacobian {
  Eigen::VectorXd x_next;
  Eigen::MatrixXd jacobian;
};

/// Computes the step and its exact Jacobian from a single stage solve.
StepWithJacobian irk_step_with_jacobian(const Model& model,
                                        const Eigen::Ref<const Eigen::VectorXd>& x_k,
                                        const IrkConfig& cfg);

/// Simulates N states x_0..x_{N-1}; states[0] is x0 exactly. Throws
/// NumericalError with the step index if a stage solve fails or a state
/// leaves the finite (feasible) region.
Trajectory simulate(const Model& model, const Eigen::Ref<const Eigen::VectorXd>& x0,
                    const IrkConfig& cfg, int steps);

/// CSV export: header "k,x_0,...,x_{n_x-1}", one row per step, 17
/// significant digits, LF line endings.
void write_trajectory_csv(const Trajectory& traj, std::ostream& out);

}  // namespace sns
