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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "sns/estimation.hpp"
#include "sns/metrics.hpp"
#include "sns/select_greedy.hpp"
#include "support.hpp"

using namespace sns;

namespace {

IrkConfig config(double dt) {
  IrkConfig cfg;
  cfg.dt = dt;
  cfg.stage_tol = 1e-13;
  return cfg;
}

Bounds box(int n, double lo, double hi) {
  Bounds b;
  b.lower = Eigen::VectorXd::Constant(n, lo);
  b.upper = Eigen::VectorXd::Constant(n, hi);
  return b;
}

Eigen::VectorXd pools_state() {
  Eigen::VectorXd x0(15);
  x0 << 1.0, 0.55, 0.25, 1.1, 0.5, 0.32, 1.2, 0.45, 0.39, 1.3, 0.4, 0.46, 1.4, 0.35, 0.53;
  return x0;
}

std::vector<int> all_sensors(int n) {
  std::vector<int> v(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) v[static_cast<size_t>(i)] = i;
  return v;
}

}  // namespace

TEST_CASE("residual vanishes at the true initial state") {
  const Model model = load_model(test::data_file("h2o2_toy.json"));
  const IrkConfig cfg = config(0.02);
  Eigen::VectorXd x0(9);
  x0 << 1.0, 0.8, 0.15, 0.4, 0.05, 0.03, 0.02, 0.01, 0.3;
  const Trajectory traj = simulate(model, x0, cfg, 40);
  const std::vector<int> sensors = {1, 4, 6};
  const LiftedObservation obs = observe(traj, sensors);
  REQUIRE(obs.y.size() == 40 * 3);
  const Eigen::VectorXd g = lifted_residual(model, cfg, sensors, x0, obs);
  CHECK(g.lpNorm<Eigen::Infinity>() <= 1e-12);
}

TEST_CASE("scalar residual is computable by hand") {
  const double lambda = -1.0;
  const double dt = 0.1;
  const Model model = make_scalar_linear_model(lambda);
  const IrkConfig cfg = config(dt);
  Eigen::VectorXd x0(1);
  x0[0] = 2.0;
  const Trajectory traj = simulate(model, x0, cfg, 2);
  const LiftedObservation obs = observe(traj, {0});

  Eigen::VectorXd guess(1);
  guess[0] = 1.5;
  const Eigen::VectorXd g = lifted_residual(model, cfg, {0}, guess, obs);
  const double a = test::radau_stability(lambda * dt);
  CHECK(g[0] == doctest::Approx(2.0 - 1.5).epsilon(1e-14));
  CHECK(g[1] == doctest::Approx(2.0 * a - 1.5 * a).epsilon(1e-12));
}

TEST_CASE("residual equals an independent re-simulation") {
  const Model model = load_model(test::data_file("pools15.json"));
  const IrkConfig cfg = config(0.05);
  const Eigen::VectorXd x0 = pools_state();
  const Trajectory traj = simulate(model, x0, cfg, 30);
  const std::vector<int> sensors = {0, 7, 14};
  const LiftedObservation obs = observe(traj, sensors);

  CounterRng rng(81, 0);
  Eigen::VectorXd guess = x0;
  for (int i = 0; i < guess.size(); ++i) guess[i] *= 1.0 + 0.3 * rng.uniform();

  const Eigen::VectorXd g = lifted_residual(model, cfg, sensors, guess, obs);
  const Trajectory guessed = simulate(model, guess, cfg, 30);
  const LiftedObservation predicted = observe(guessed, sensors);
  CHECK((g - (obs.y - predicted.y)).lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("residual jacobian matches finite differences") {
  const Model model = load_model(test::data_file("h2o2_toy.json"));
  const IrkConfig cfg = config(0.02);
  Eigen::VectorXd x0(9);
  x0 << 1.0, 0.8, 0.15, 0.4, 0.05, 0.03, 0.02, 0.01, 0.3;
  const int steps = 25;
  const Trajectory traj = simulate(model, x0, cfg, steps);
  const std::vector<int> sensors = {0, 3, 8};
  const LiftedObservation obs = observe(traj, sensors);

  for (std::uint64_t trial = 0; trial < 5; ++trial) {
    CounterRng rng(91, trial);
    Eigen::VectorXd guess = x0;
    for (int i = 0; i < 9; ++i) guess[i] *= 1.0 + 0.2 * rng.uniform();

    // Analytic route: the residual Jacobian is minus the observability
    // matrix of the variational stack at the guess.
    const Trajectory guess_traj = simulate(model, guess, cfg, steps);
    const TransitionStack stack = transition_matrices(model, guess_traj, cfg);
    const Eigen::MatrixXd analytic = -observability_matrix(stack, sensors);

    Eigen::MatrixXd fd(static_cast<Eigen::Index>(steps) * 3, 9);
    for (int i = 0; i < 9; ++i) {
      const double h = 1e-6 * (1.0 + std::abs(guess[i]));
      Eigen::VectorXd hi = guess, lo = guess;
      hi[i] += h;
      lo[i] -= h;
      fd.col(i) = (lifted_residual(model, cfg, sensors, hi, obs) -
                   lifted_residual(model, cfg, sensors, lo, obs)) /
                  (2.0 * h);
    }
    CHECK((analytic - fd).lpNorm<Eigen::Infinity>() <=
          1e-5 * (1.0 + analytic.lpNorm<Eigen::Infinity>()));
  }
}

TEST_CASE("scalar initial state is recovered from noiseless data") {
  const Model model = make_scalar_linear_model(-0.7);
  const IrkConfig cfg = config(0.05);
  Eigen::VectorXd x0(1);
  x0[0] = 1.7;
  const Trajectory traj = simulate(model, x0, cfg, 30);
  const LiftedObservation obs = observe(traj, {0});

  const Bounds bounds = box(1, -10.0, 10.0);
  const EstimateReport report =
      estimate_initial_state(model, cfg, {0}, obs, bounds, bounds.midpoint());
  CHECK(report.converged);
  CHECK(std::abs(report.x0[0] - 1.7) <= 1e-8 * 1.7);
}

TEST_CASE("linear estimation lands on the least-squares solution") {
  const int n = 4;
  const Eigen::MatrixXd a = test::random_stable_matrix(n, 321);
  const Model model = make_linear_model(a);
  const IrkConfig cfg = config(0.1);
  const int steps = 20;

  Eigen::VectorXd x0(n);
  x0 << 0.8, -0.4, 1.2, 0.3;
  const Trajectory traj = simulate(model, x0, cfg, steps);
  const std::vector<int> sensors = {0, 2};
  LiftedObservation obs = observe(traj, sensors);
  // Deterministic distortion so the optimum is a genuine least-squares
  // point rather than an exact trajectory.
  for (Eigen::Index i = 0; i < obs.y.size(); ++i) {
    obs.y[i] += 1e-3 * std::sin(static_cast<double>(i));
  }

  const TransitionStack stack = transition_matrices(model, traj, cfg);
  const Eigen::MatrixXd psi = observability_matrix(stack, sensors);
  REQUIRE(Eigen::ColPivHouseholderQR<Eigen::MatrixXd>(psi).rank() == n);
  const Eigen::VectorXd direct =
      (psi.transpose() * psi).ldlt().solve(psi.transpose() * obs.y);

  const Bounds bounds = box(n, -20.0, 20.0);
  const EstimateReport report =
      estimate_initial_state(model, cfg, sensors, obs, bounds, bounds.midpoint());
  CHECK(report.converged);
  CHECK((report.x0 - direct).norm() <= 1e-6 * (1.0 + direct.norm()));
}

TEST_CASE("bounds excluding the truth pin the estimate to the boundary") {
  const Model model = make_scalar_linear_model(-0.5);
  const IrkConfig cfg = config(0.05);
  Eigen::VectorXd x0(1);
  x0[0] = 1.0;
  const Trajectory traj = simulate(model, x0, cfg, 25);
  const LiftedObservation obs = observe(traj, {0});

  const Bounds bounds = box(1, 2.0, 3.0);
  const EstimateReport report =
      estimate_initial_state(model, cfg, {0}, obs, bounds, bounds.midpoint());
  CHECK(report.x0[0] == 2.0);
  REQUIRE(report.active_lower.size() == 1);
  CHECK(report.active_lower[0] == 0);
}

TEST_CASE("estimation preconditions are validated") {
  const Model model = make_scalar_linear_model(-0.5);
  const IrkConfig cfg = config(0.05);
  Eigen::VectorXd x0(1);
  x0[0] = 1.0;
  const Trajectory traj = simulate(model, x0, cfg, 5);
  const LiftedObservation obs = observe(traj, {0});

  Bounds bad = box(1, 1.0, -1.0);
  CHECK_THROWS_AS(bad.validate(1), ValidationError);

  const Bounds bounds = box(1, 0.0, 2.0);
  Eigen::VectorXd outside(1);
  outside[0] = 5.0;
  CHECK_THROWS_AS(estimate_initial_state(model, cfg, {0}, obs, bounds, outside),
                  ValidationError);
  CHECK_THROWS_AS(lifted_residual(model, cfg, {0, 0}, x0, obs), ValidationError);
}

TEST_CASE("estimation error is a relative stacked norm") {
  const Model model = make_scalar_linear_model(-1.0);
  const IrkConfig cfg = config(0.1);
  Eigen::VectorXd x0(1);
  x0[0] = 1.0;
  const Trajectory traj = simulate(model, x0, cfg, 10);
  CHECK(estimation_error(traj, traj) == 0.0);

  Trajectory scaled = traj;
  scaled.states *= 1.1;
  CHECK(estimation_error(traj, scaled) == doctest::Approx(0.1).epsilon(1e-12));

  Trajectory zero = traj;
  zero.states.setZero();
  CHECK_THROWS_AS(estimation_error(zero, traj), ValidationError);

  // Direct recomputation.
  Trajectory other = traj;
  other.states.array() += 0.05;
  const double expected = (traj.states - other.states).norm() / traj.states.norm();
  CHECK(estimation_error(traj, other) == expected);
}

TEST_CASE("full sensing recovers every perturbed trial") {
  const Model model = load_model(test::data_file("h2o2_toy.json"));
  const IrkConfig cfg = config(0.02);
  Eigen::VectorXd x0(9);
  x0 << 1.0, 0.8, 0.15, 0.4, 0.05, 0.03, 0.02, 0.01, 0.3;
  const int steps = 120;

  SelectionResult everything;
  everything.method = "greedy";
  everything.selected = all_sensors(9);

  const Bounds bounds = box(9, 0.0, 10.0 * x0.maxCoeff());
  const ValidationReport report =
      validation_run(model, cfg, steps, everything, 5, 0.2, bounds, x0, 2024);

  REQUIRE(report.trials.size() == 5);
  for (const TrialResult& t : report.trials) {
    CHECK(t.converged);
    CHECK(t.error <= 1e-6);
    CHECK(t.alpha > 0.0);
    CHECK(t.alpha < 0.2);
  }
  CHECK(report.median <= 1e-6);
}

TEST_CASE("validation is deterministic given the seed") {
  const Model model = load_model(test::data_file("h2o2_toy.json"));
  const IrkConfig cfg = config(0.02);
  Eigen::VectorXd x0(9);
  x0 << 1.0, 0.8, 0.15, 0.4, 0.05, 0.03, 0.02, 0.01, 0.3;

  SelectionResult selection;
  selection.method = "greedy";
  selection.selected = {0, 3};

  const Bounds bounds = box(9, 0.0, 10.0);
  const ValidationReport a =
      validation_run(model, cfg, 60, selection, 4, 0.2, bounds, x0, 7);
  const ValidationReport b =
      validation_run(model, cfg, 60, selection, 4, 0.2, bounds, x0, 7);
  REQUIRE(a.trials.size() == b.trials.size());
  for (size_t t = 0; t < a.trials.size(); ++t) {
    CHECK(a.trials[t].alpha == b.trials[t].alpha);
    CHECK(a.trials[t].error == b.trials[t].error);
  }
  CHECK(a.median == b.median);

  // Thread count must not change the result either.
  const ValidationReport c =
      validation_run(model, cfg, 60, selection, 4, 0.2, bounds, x0, 7, 4);
  for (size_t t = 0; t < a.trials.size(); ++t) {
    CHECK(a.trials[t].error == c.trials[t].error);
  }
}

TEST_CASE("median error improves as coverage grows") {
  const Model model = load_model(test::data_file("pools15.json"));
  const IrkConfig cfg = config(0.05);
  const Eigen::VectorXd x0 = pools_state();
  const int steps = 150;
  const Bounds bounds = box(15, 0.0, 10.0 * x0.maxCoeff());

  const Trajectory traj = simulate(model, x0, cfg, steps);
  const TransitionStack stack = transition_matrices(model, traj, cfg);
  const GramianContributions contrib = sensor_contributions(stack, all_sensors(15));

  std::vector<double> medians;
  for (int r : {1, 3}) {
    const SelectionResult sel = greedy_select(Metric::logdet(1e-6), contrib, r);
    const ValidationReport report =
        validation_run(model, cfg, steps, sel, 6, 0.2, bounds, x0, 11);
    medians.push_back(report.median);
  }
  CHECK(medians[1] <= medians[0] * (1.0 + 1e-9));
}
