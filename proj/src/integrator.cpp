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

#include "sns/integrator.hpp"

#include <Eigen/Dense>

#include "sns/errors.hpp"
#include "sns/io_util.hpp"

namespace sns {

namespace {

// Permuted 2-stage Radau IIA coefficients; see the note on irk_step.
constexpr double kA11 = 1.0 / 4.0;
constexpr double kA12 = 3.0 / 4.0;
constexpr double kA21 = -1.0 / 12.0;
constexpr double kA22 = 5.0 / 12.0;

struct StageSolution {
  Eigen::VectorXd z1, z2;  // converged stage states
  Eigen::VectorXd f1, f2;  // f evaluated at the stages
};

StageSolution solve_stages(const Model& model, const Eigen::Ref<const Eigen::VectorXd>& x,
                           const IrkConfig& cfg) {
  cfg.validate();
  if (!x.allFinite()) throw ValidationError("irk_step: non-finite state");

  const int n = static_cast<int>(x.size());
  const double dt = cfg.dt;

  StageSolution s;
  s.z1 = x;
  s.z2 = x;

  Eigen::VectorXd residual(2 * n);
  Eigen::MatrixXd newton(2 * n, 2 * n);

  for (int iter = 0;; ++iter) {
    s.f1 = eval_rhs(model, s.z1);
    s.f2 = eval_rhs(model, s.z2);
    residual.head(n) = s.z1 - x - dt * (kA11 * s.f1 + kA12 * s.f2);
    residual.tail(n) = s.z2 - x - dt * (kA21 * s.f1 + kA22 * s.f2);

    const double res_norm = residual.lpNorm<Eigen::Infinity>();
    if (res_norm <= cfg.stage_tol) break;
    if (iter >= cfg.max_newton_iters) {
      throw NumericalError("irk_step: Newton did not converge in " +
                           std::to_string(cfg.max_newton_iters) +
                           " iterations (residual " + format_double(res_norm) + ")");
    }

    const Eigen::MatrixXd j1 = eval_rhs_jacobian(model, s.z1);
    const Eigen::MatrixXd j2 = eval_rhs_jacobian(model, s.z2);
    newton.topLeftCorner(n, n) = Eigen::MatrixXd::Identity(n, n) - dt * kA11 * j1;
    newton.topRightCorner(n, n) = -dt * kA12 * j2;
    newton.bottomLeftCorner(n, n) = -dt * kA21 * j1;
    newton.bottomRightCorner(n, n) = Eigen::MatrixXd::Identity(n, n) - dt * kA22 * j2;

    const Eigen::VectorXd delta = newton.partialPivLu().solve(-residual);
    if (!delta.allFinite()) {
      throw NumericalError("irk_step: singular Newton matrix");
    }
    s.z1 += delta.head(n);
    s.z2 += delta.tail(n);
  }
  return s;
}

Eigen::VectorXd combine(const Eigen::Ref<const Eigen::VectorXd>& x, const StageSolution& s,
                        double dt) {
  return x + (dt / 4.0) * (s.f1 + 3.0 * s.f2);
}

Eigen::MatrixXd jacobian_from_stages(const Model& model,
                                     const Eigen::Ref<const Eigen::VectorXd>& x,
                                     const StageSolution& s, double dt) {
  const int n = static_cast<int>(x.size());
  const Eigen::MatrixXd j1 = eval_rhs_jacobian(model, s.z1);
  const Eigen::MatrixXd j2 = eval_rhs_jacobian(model, s.z2);

  Eigen::MatrixXd newton(2 * n, 2 * n);
  newton.topLeftCorner(n, n) = Eigen::MatrixXd::Identity(n, n) - dt * kA11 * j1;
  newton.topRightCorner(n, n) = -dt * kA12 * j2;
  newton.bottomLeftCorner(n, n) = -dt * kA21 * j1;
  newton.bottomRightCorner(n, n) = Eigen::MatrixXd::Identity(n, n) - dt * kA22 * j2;

  // The stage system G(z, x) = 0 has dG/dx = -[I; I], so dz/dx solves
  // newton * dz/dx = [I; I].
  Eigen::MatrixXd rhs(2 * n, n);
  rhs.topRows(n) = Eigen::MatrixXd::Identity(n, n);
  rhs.bottomRows(n) = Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd dz = newton.partialPivLu().solve(rhs);
  if (!dz.allFinite()) {
    throw NumericalError("step_jacobian: singular implicit-function system");
  }

  return Eigen::MatrixXd::Identity(n, n) +
         (dt / 4.0) * (j1 * dz.topRows(n) + 3.0 * (j2 * dz.bottomRows(n)));
}

}  // namespace

void IrkConfig::validate() const {
  if (!(dt > 0.0)) throw ValidationError("IrkConfig: dt must be > 0");
  if (!(stage_tol > 0.0)) throw ValidationError("IrkConfig: stage_tol must be > 0");
  if (max_newton_iters < 1) throw ValidationError("IrkConfig: max_newton_iters must be >= 1");
}

Eigen::VectorXd irk_step(const Model& model, const Eigen::Ref<const Eigen::VectorXd>& x_k,
                         const IrkConfig& cfg) {
  const StageSolution s = solve_stages(model, x_k, cfg);
  return combine(x_k, s, cfg.dt);
}

Eigen::MatrixXd step_jacobian(const Model& model,
                              const Eigen::Ref<const Eigen::VectorXd>& x_k,
                              const IrkConfig& cfg) {
  const StageSolution s = solve_stages(model, x_k, cfg);
  return jacobian_from_stages(model, x_k, s, cfg.dt);
}

StepWithJacobian irk_step_with_jacobian(const Model& model,
                                        const Eigen::Ref<const Eigen::VectorXd>& x_k,
                                        const IrkConfig& cfg) {
  const StageSolution s = solve_stages(model, x_k, cfg);
  return StepWithJacobian{combine(x_k, s, cfg.dt), jacobian_from_stages(model, x_k, s, cfg.dt)};
}

Trajectory simulate(const Model& model, const Eigen::Ref<const Eigen::VectorXd>& x0,
                    const IrkConfig& cfg, int steps) {
  cfg.validate();
  if (steps < 1) throw ValidationError("simulate: steps must be >= 1");
  if (x0.size() != model.dimension()) {
    throw ValidationError("simulate: x0 has length " + std::to_string(x0.size()) +
                          ", model dimension is " + std::to_string(model.dimension()));
  }
  if (!x0.allFinite()) throw ValidationError("simulate: non-finite initial state");

  Trajectory traj;
  traj.dt = cfg.dt;
  traj.states.resize(steps, x0.size());
  traj.states.row(0) = x0;

  for (int k = 0; k + 1 < steps; ++k) {
    Eigen::VectorXd next;
    try {
      next = irk_step(model, traj.states.row(k).transpose(), cfg);
    } catch (const NumericalError& e) {
      throw NumericalError("simulate: step " + std::to_string(k) + ": " + e.what());
    }
    if (!next.allFinite()) {
      throw NumericalError("simulate: non-finite state at step " + std::to_string(k + 1) +
                           " (trajectory left the feasible region)");
    }
    traj.states.row(k + 1) = next;
  }
  return traj;
}

void write_trajectory_csv(const Trajectory& traj, std::ostream& out) {
  out << "k";
  for (int i = 0; i < traj.dimension(); ++i) out << ",x_" << i;
  out << "\n";
  for (int k = 0; k < traj.steps(); ++k) {
    out << k;
    for (int i = 0; i < traj.dimension(); ++i) {
      out << "," << format_double(traj.states(k, i));
    }
    out << "\n";
  }
}

}  // namespace sns
