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
#include <cmath>
#include <sstream>

#include "sns/errors.hpp"
#include "sns/integrator.hpp"
#include "sns/model.hpp"
#include "support.hpp"

using namespace sns;

namespace {

IrkConfig tight(double dt) {
  IrkConfig cfg;
  cfg.dt = dt;
  cfg.stage_tol = 1e-14;
  return cfg;
}

Eigen::VectorXd scalar_state(double v) {
  Eigen::VectorXd x(1);
  x[0] = v;
  return x;
}

// Least-squares slope of log(err) against log(dt).
double fitted_order(const std::vector<double>& dts, const std::vector<double>& errs) {
  const auto n = static_cast<double>(dts.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < dts.size(); ++i) {
    const double lx = std::log(dts[i]);
    const double ly = std::log(errs[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

TEST_CASE("zero vector field leaves the state unchanged exactly") {
  const Model model = make_linear_model(Eigen::MatrixXd::Zero(3, 3));
  Eigen::Vector3d x(1.0, -2.0, 0.5);
  const Eigen::VectorXd next = irk_step(model, x, tight(0.1));
  CHECK(next == x);
  CHECK(step_jacobian(model, x, tight(0.1)) == Eigen::MatrixXd::Identity(3, 3));
}

TEST_CASE("scalar linear step reproduces the closed-form stability function") {
  const double lambda = -1.0;
  const double dt = 0.1;
  const Model model = make_scalar_linear_model(lambda);
  const Eigen::VectorXd next = irk_step(model, scalar_state(1.0), tight(dt));
  const double expected = test::radau_stability(lambda * dt);
  CHECK(next[0] == doctest::Approx(expected).epsilon(1e-13));

  // The step Jacobian of a linear system is the same amplification factor.
  const Eigen::MatrixXd phi = step_jacobian(model, scalar_state(0.3), tight(dt));
  CHECK(phi(0, 0) == doctest::Approx(expected).epsilon(1e-13));

  // Also at a stiff-side step size.
  const double z = -80.0 * dt;
  const Model stiff = make_scalar_linear_model(-80.0);
  const Eigen::VectorXd stiff_next = irk_step(stiff, scalar_state(1.0), tight(dt));
  CHECK(stiff_next[0] == doctest::Approx(test::radau_stability(z)).epsilon(1e-12));
}

TEST_CASE("one-step error on the logistic equation converges at third order") {
  const Model model = make_logistic_model();
  const std::vector<double> dts = {1e-1, 3e-2, 1e-2, 3e-3, 1e-3};
  std::vector<double> errs;
  for (double dt : dts) {
    const Eigen::VectorXd next = irk_step(model, scalar_state(0.2), tight(dt));
    errs.push_back(std::abs(next[0] - test::logistic_solution(0.2, dt)));
  }
  CHECK(fitted_order(dts, errs) >= 2.7);

  // At x = 0.5 the sigmoid inflection suppresses the leading error term
  // and the smallest steps land below double resolution, so check the
  // order only over the measurable step sizes.
  const std::vector<double> coarse = {1e-1, 3e-2, 1e-2};
  std::vector<double> errs_half;
  for (double dt : coarse) {
    const Eigen::VectorXd next = irk_step(model, scalar_state(0.5), tight(dt));
    errs_half.push_back(std::abs(next[0] - test::logistic_solution(0.5, dt)));
  }
  CHECK(fitted_order(coarse, errs_half) >= 2.7);
}

TEST_CASE("single-step trajectory is just the initial state") {
  const Model model = make_logistic_model();
  const Trajectory traj = simulate(model, scalar_state(0.5), tight(0.1), 1);
  CHECK(traj.steps() == 1);
  CHECK(traj.states(0, 0) == 0.5);
}

TEST_CASE("long scalar decay matches the exponential") {
  const Model model = make_scalar_linear_model(-1.0);
  const Trajectory traj = simulate(model, scalar_state(1.0), tight(0.01), 1001);
  const double expected = std::exp(-10.0);
  CHECK(std::abs(traj.states(1000, 0) - expected) <= 1e-6 * expected);
}

TEST_CASE("thousand-step horizon simulates cleanly on the bundled fixture") {
  const Model model = load_model(test::data_file("h2o2_toy.json"));
  Eigen::VectorXd x0(9);
  x0 << 1.0, 0.8, 0.15, 0.4, 0.05, 0.03, 0.02, 0.01, 0.3;
  IrkConfig cfg;
  cfg.dt = 0.02;
  const Trajectory traj = simulate(model, x0, cfg, 1000);
  CHECK(traj.steps() == 1000);
  CHECK(traj.states.row(0).transpose() == x0);
  CHECK(traj.states.allFinite());
}

TEST_CASE("identical inputs give bit-identical trajectories") {
  const Model model = load_model(test::data_file("pools15.json"));
  Eigen::VectorXd x0(15);
  x0 << 1.0, 0.55, 0.25, 1.1, 0.5, 0.32, 1.2, 0.45, 0.39, 1.3, 0.4, 0.46, 1.4, 0.35, 0.53;
  IrkConfig cfg;
  cfg.dt = 0.05;
  const Trajectory a = simulate(model, x0, cfg, 200);
  const Trajectory b = simulate(model, x0, cfg, 200);
  CHECK(a.states == b.states);
}

TEST_CASE("step jacobian matches finite differences of the step map") {
  for (const auto& [name, dt] : {std::pair<const char*, double>{"h2o2_toy.json", 0.02},
                                 std::pair<const char*, double>{"pools15.json", 0.05}}) {
    const Model model = load_model(test::data_file(name));
    const int n = model.dimension();
    const IrkConfig cfg = tight(dt);
    for (std::uint64_t trial = 0; trial < 100; ++trial) {
      CounterRng rng(5, trial);
      Eigen::VectorXd x(n);
      for (int i = 0; i < n; ++i) x[i] = test::uniform(rng, 0.05, 1.5);

      const Eigen::MatrixXd analytic = step_jacobian(model, x, cfg);
      Eigen::MatrixXd fd(n, n);
      for (int i = 0; i < n; ++i) {
        const double h = 1e-6 * (1.0 + std::abs(x[i]));
        Eigen::VectorXd hi = x, lo = x;
        hi[i] += h;
        lo[i] -= h;
        fd.col(i) = (irk_step(model, hi, cfg) - irk_step(model, lo, cfg)) / (2.0 * h);
      }
      const double tol = 1e-5 * (1.0 + analytic.lpNorm<Eigen::Infinity>());
      CHECK((analytic - fd).lpNorm<Eigen::Infinity>() <= tol);
    }
  }
}

TEST_CASE("combined step-and-jacobian agrees with the separate calls") {
  const Model model = load_model(test::data_file("h2o2_toy.json"));
  Eigen::VectorXd x0(9);
  x0 << 1.0, 0.8, 0.15, 0.4, 0.05, 0.03, 0.02, 0.01, 0.3;
  const IrkConfig cfg = tight(0.02);
  const StepWithJacobian both = irk_step_with_jacobian(model, x0, cfg);
  CHECK(both.x_next == irk_step(model, x0, cfg));
  CHECK(both.jacobian == step_jacobian(model, x0, cfg));
}

TEST_CASE("newton failures carry the step index") {
  // 2A -> 3A gives xdot = x^2, which blows up in finite time; the stage
  // equations eventually lose their solution and the step must fail
  // loudly rather than return garbage.
  Reaction rxn;
  rxn.reactants = {{0, 2}};
  rxn.products = {{0, 3}};
  rxn.rate_constant = 1.0;
  const Model model = make_network_model(make_reaction_network({"A"}, {rxn}, false));
  IrkConfig cfg;
  cfg.dt = 0.3;
  CHECK_THROWS_WITH_AS(simulate(model, scalar_state(5.0), cfg, 50),
                       doctest::Contains("step"), NumericalError);
}

TEST_CASE("newton iteration cap is enforced") {
  IrkConfig cfg;
  cfg.dt = 40.0;
  cfg.max_newton_iters = 1;
  const Model model = make_logistic_model();
  CHECK_THROWS_AS(irk_step(model, scalar_state(0.37), cfg), NumericalError);
}

TEST_CASE("config invariants are validated") {
  IrkConfig bad;
  bad.dt = 0.0;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  bad.dt = 0.1;
  bad.stage_tol = 0.0;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  bad.stage_tol = 1e-12;
  bad.max_newton_iters = 0;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  CHECK_THROWS_AS(simulate(make_logistic_model(), scalar_state(0.5), IrkConfig{0.1}, 0),
                  ValidationError);
}

TEST_CASE("trajectory csv has the documented layout") {
  const Model model = make_scalar_linear_model(-1.0);
  const Trajectory traj = simulate(model, scalar_state(0.5), tight(0.1), 3);
  std::ostringstream out;
  write_trajectory_csv(traj, out);
  std::istringstream lines(out.str());
  std::string line;
  std::getline(lines, line);
  CHECK(line == "k,x_0");
  std::getline(lines, line);
  CHECK(line == "0,0.5");
  std::getline(lines, line);
  CHECK(line.rfind("1,", 0) == 0);
  // The printed value round-trips to the stored double.
  CHECK(std::stod(line.substr(2)) == traj.states(1, 0));
}
