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

#include "sns/estimation.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "sns/errors.hpp"
#include "sns/io_util.hpp"
#include "sns/parallel.hpp"
#include "sns/rng.hpp"

namespace sns {

namespace {

std::vector<int> sorted_sensors(const std::vector<int>& sensors, const char* op) {
  if (sensors.empty()) throw ValidationError(std::string(op) + ": empty sensor set");
  std::vector<int> ids = sensors;
  std::sort(ids.begin(), ids.end());
  if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) {
    throw ValidationError(std::string(op) + ": duplicate sensor index");
  }
  return ids;
}

Eigen::VectorXd stack_rows(const Trajectory& traj, const std::vector<int>& sensors) {
  const int ny = static_cast<int>(sensors.size());
  Eigen::VectorXd y(static_cast<Eigen::Index>(traj.steps()) * ny);
  for (int k = 0; k < traj.steps(); ++k) {
    for (int j = 0; j < ny; ++j) {
      y[static_cast<Eigen::Index>(k) * ny + j] = traj.states(k, sensors[static_cast<size_t>(j)]);
    }
  }
  return y;
}

// Simulation plus the stacked prediction and, optionally, the residual
// Jacobian -Psi at the guess.
struct PredictState {
  Eigen::VectorXd predicted;
  Eigen::MatrixXd psi;  // empty unless requested
};

PredictState predict(const Model& model, const IrkConfig& cfg,
                     const std::vector<int>& sensors,
                     const Eigen::Ref<const Eigen::VectorXd>& x0, int steps,
                     bool with_jacobian) {
  const int n = model.dimension();
  const int ny = static_cast<int>(sensors.size());

  PredictState out;
  out.predicted.resize(static_cast<Eigen::Index>(steps) * ny);
  if (with_jacobian) out.psi.resize(static_cast<Eigen::Index>(steps) * ny, n);

  Eigen::VectorXd x = x0;
  Eigen::MatrixXd phi = Eigen::MatrixXd::Identity(n, n);
  for (int k = 0; k < steps; ++k) {
    for (int j = 0; j < ny; ++j) {
      out.predicted[static_cast<Eigen::Index>(k) * ny + j] = x[sensors[static_cast<size_t>(j)]];
      if (with_jacobian) {
        out.psi.row(static_cast<Eigen::Index>(k) * ny + j) = phi.row(sensors[static_cast<size_t>(j)]);
      }
    }
    if (k + 1 < steps) {
      if (with_jacobian) {
        StepWithJacobian step = irk_step_with_jacobian(model, x, cfg);
        x = std::move(step.x_next);
        phi = step.jacobian * phi;
      } else {
        x = irk_step(model, x, cfg);
      }
      if (!x.allFinite()) {
        throw NumericalError("estimation: non-finite state at step " + std::to_string(k + 1));
      }
    }
  }
  return out;
}

double quantile_sorted(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return 0.0;
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const size_t lo = static_cast<size_t>(pos);
  const size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

}  // namespace

LiftedObservation observe(const Trajectory& traj, const std::vector<int>& sensors) {
  const std::vector<int> ids = sorted_sensors(sensors, "observe");
  for (int j : ids) {
    if (j < 0 || j >= traj.dimension()) {
      throw ValidationError("observe: sensor index " + std::to_string(j) + " out of range");
    }
  }
  LiftedObservation obs;
  obs.sensors = ids;
  obs.dt = traj.dt;
  obs.steps = traj.steps();
  obs.y = stack_rows(traj, ids);
  return obs;
}

void Bounds::validate(int n) const {
  if (lower.size() != n || upper.size() != n) {
    throw ValidationError("Bounds: expected vectors of length " + std::to_string(n));
  }
  for (int i = 0; i < n; ++i) {
    if (!(lower[i] <= upper[i])) {
      throw ValidationError("Bounds: lower[" + std::to_string(i) + "] > upper[" +
                            std::to_string(i) + "]");
    }
  }
}

Eigen::VectorXd lifted_residual(const Model& model, const IrkConfig& cfg,
                                const std::vector<int>& sensors,
                                const Eigen::Ref<const Eigen::VectorXd>& x0_guess,
                                const LiftedObservation& obs) {
  const std::vector<int> ids = sorted_sensors(sensors, "lifted_residual");
  if (ids != obs.sensors) {
    throw ValidationError("lifted_residual: sensor set does not match the observation");
  }
  if (obs.y.size() != static_cast<Eigen::Index>(obs.steps) * static_cast<Eigen::Index>(ids.size())) {
    throw ValidationError("lifted_residual: observation length mismatch");
  }
  if (x0_guess.size() != model.dimension()) {
    throw ValidationError("lifted_residual: guess dimension mismatch");
  }
  return obs.y - predict(model, cfg, ids, x0_guess, obs.steps, false).predicted;
}

EstimateReport estimate_initial_state(const Model& model, const IrkConfig& cfg,
                                      const std::vector<int>& sensors,
                                      const LiftedObservation& obs, const Bounds& bounds,
                                      const Eigen::Ref<const Eigen::VectorXd>& x0_init,
                                      const EstimateOptions& opts) {
  const int n = model.dimension();
  const std::vector<int> ids = sorted_sensors(sensors, "estimate_initial_state");
  if (ids != obs.sensors) {
    throw ValidationError("estimate_initial_state: sensor set does not match the observation");
  }
  bounds.validate(n);
  if (x0_init.size() != n) {
    throw ValidationError("estimate_initial_state: starting guess dimension mismatch");
  }
  for (int i = 0; i < n; ++i) {
    if (x0_init[i] < bounds.lower[i] || x0_init[i] > bounds.upper[i]) {
      throw ValidationError("estimate_initial_state: starting guess outside bounds at " +
                            std::to_string(i));
    }
  }

  // Projected gradient of 0.5 ||g||^2: components pushing out of the box
  // at an active bound are zeroed.
  auto projected_gradient = [&](const Eigen::VectorXd& theta, const Eigen::VectorXd& grad) {
    Eigen::VectorXd pg = grad;
    for (int i = 0; i < n; ++i) {
      if (theta[i] <= bounds.lower[i] && grad[i] > 0.0) pg[i] = 0.0;
      if (theta[i] >= bounds.upper[i] && grad[i] < 0.0) pg[i] = 0.0;
    }
    return pg;
  };

  Eigen::VectorXd theta = x0_init;
  PredictState state = predict(model, cfg, ids, theta, obs.steps, true);
  Eigen::VectorXd g = obs.y - state.predicted;
  double cost = g.squaredNorm();

  EstimateReport report;
  double lambda = 1e-3;
  bool converged = false;
  int iter = 0;
  double pg_norm = 0.0;

  for (; iter < opts.max_iters; ++iter) {
    const Eigen::VectorXd grad = -state.psi.transpose() * g;  // of 0.5 ||g||^2
    pg_norm = projected_gradient(theta, grad).norm();
    if (pg_norm <= opts.gradient_tol) {
      converged = true;
      break;
    }

    const Eigen::MatrixXd hessian = state.psi.transpose() * state.psi;
    bool accepted = false;
    double step_norm = 0.0;
    while (!accepted) {
      Eigen::MatrixXd damped = hessian;
      damped.diagonal().array() += lambda;
      const Eigen::VectorXd delta = damped.ldlt().solve(state.psi.transpose() * g);
      if (!delta.allFinite()) {
        throw NumericalError("estimate_initial_state: singular damped normal equations");
      }
      const Eigen::VectorXd candidate = bounds.clamp(theta + delta);
      step_norm = (candidate - theta).norm();
      if (step_norm <= opts.step_tol) break;  // stalled at this damping

      bool candidate_ok = true;
      Eigen::VectorXd g_new;
      try {
        g_new = obs.y - predict(model, cfg, ids, candidate, obs.steps, false).predicted;
      } catch (const NumericalError&) {
        candidate_ok = false;  // infeasible point; damp harder
      }
      if (candidate_ok && g_new.squaredNorm() < cost) {
        theta = candidate;
        g = std::move(g_new);
        cost = g.squaredNorm();
        lambda = std::max(lambda / 3.0, 1e-14);
        accepted = true;
      } else {
        lambda *= 4.0;
        if (lambda > 1e12) break;  // no acceptable step at any damping
      }
    }

    if (!accepted) {
      // Step-size convergence: no improving move remains within the box.
      converged = step_norm <= opts.step_tol;
      if (converged) {
        state = predict(model, cfg, ids, theta, obs.steps, true);
        g = obs.y - state.predicted;
        pg_norm = projected_gradient(theta, -state.psi.transpose() * g).norm();
      }
      break;
    }
    state = predict(model, cfg, ids, theta, obs.steps, true);
    g = obs.y - state.predicted;
  }

  report.x0 = theta;
  report.converged = converged;
  report.iterations = iter;
  report.residual_norm = std::sqrt(cost);
  report.gradient_norm = pg_norm;
  for (int i = 0; i < n; ++i) {
    if (theta[i] <= bounds.lower[i]) report.active_lower.push_back(i);
    if (theta[i] >= bounds.upper[i]) report.active_upper.push_back(i);
  }
  return report;
}

double estimation_error(const Trajectory& truth, const Trajectory& estimate) {
  if (truth.steps() != estimate.steps() || truth.dimension() != estimate.dimension()) {
    throw ValidationError("estimation_error: trajectory shapes differ");
  }
  const double denom = truth.states.norm();
  if (denom == 0.0) throw ValidationError("estimation_error: zero-norm true trajectory");
  return (truth.states - estimate.states).norm() / denom;
}

ValidationReport validation_run(const Model& model, const IrkConfig& cfg, int steps,
                                const SelectionResult& selection, int trials,
                                double alpha_max, const Bounds& bounds,
                                const Eigen::Ref<const Eigen::VectorXd>& x0_base,
                                std::uint64_t seed, int threads) {
  if (trials < 1) throw ValidationError("validation_run: trials must be >= 1");
  bounds.validate(model.dimension());
  const std::vector<int> sensors = sorted_sensors(selection.selected, "validation_run");
  const Eigen::VectorXd x0 = x0_base;
  const Eigen::VectorXd guess = bounds.clamp(bounds.midpoint());

  ValidationReport report;
  report.method = selection.method;
  report.r = static_cast<int>(sensors.size());
  report.trials.resize(static_cast<size_t>(trials));

  parallel_for(trials, threads, [&](int t) {
    CounterRng rng(seed, static_cast<std::uint64_t>(t));
    const PerturbedState perturbed = perturb_initial_state(x0, alpha_max, rng);
    const Trajectory truth = simulate(model, perturbed.x, cfg, steps);
    const LiftedObservation obs = observe(truth, sensors);
    const EstimateReport est =
        estimate_initial_state(model, cfg, sensors, obs, bounds, guess);
    const Trajectory recovered = simulate(model, est.x0, cfg, steps);
    report.trials[static_cast<size_t>(t)] =
        TrialResult{perturbed.alpha, estimation_error(truth, recovered), est.converged};
  });

  std::vector<double> errors;
  errors.reserve(report.trials.size());
  for (const TrialResult& t : report.trials) errors.push_back(t.error);
  std::sort(errors.begin(), errors.end());
  report.median = quantile_sorted(errors, 0.5);
  report.q1 = quantile_sorted(errors, 0.25);
  report.q3 = quantile_sorted(errors, 0.75);
  return report;
}

void write_validation_json(const ValidationReport& report, std::ostream& out) {
  nlohmann::json doc;
  doc["method"] = report.method;
  doc["r"] = report.r;
  doc["median"] = report.median;
  doc["q1"] = report.q1;
  doc["q3"] = report.q3;
  nlohmann::json list = nlohmann::json::array();
  for (const TrialResult& t : report.trials) {
    nlohmann::json item;
    item["alpha_d"] = t.alpha;
    item["error"] = t.error;
    item["converged"] = t.converged;
    list.push_back(std::move(item));
  }
  doc["trials"] = std::move(list);
  out << doc.dump(2) << "\n";
}

void append_validation_csv(const ValidationReport& report, std::ostream& out) {
  for (size_t t = 0; t < report.trials.size(); ++t) {
    out << report.r << "," << t << "," << format_double(report.trials[t].error) << ","
        << report.method << "\n";
  }
}

}  // namespace sns
