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

// Shared helpers for the test binaries: deterministic random instances,
// independent closed-form oracles, and small fixture builders.

#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "sns/model.hpp"
#include "sns/rng.hpp"
#include "sns/set_function.hpp"
#include "sns/variational.hpp"

namespace sns::test {

inline std::string data_dir() {
#ifdef SNS_DATA_DIR
  return SNS_DATA_DIR;
#else
  return "data";
#endif
}

inline std::string data_file(const std::string& name) {
  return (std::filesystem::path(data_dir()) / name).string();
}

/// Uniform double in [lo, hi) from a counter stream.
inline double uniform(CounterRng& rng, double lo, double hi) {
  return lo + (hi - lo) * rng.uniform();
}

/// A dyadic-lattice draw: k / 1024 with k an integer in [-1024, 1024].
/// Entries, their pairwise products, and sums of up to a few dozen of them
/// are exactly representable, so set-function identities that hold in
/// exact arithmetic hold bit-for-bit on these instances.
inline double dyadic(CounterRng& rng) {
  const int k = static_cast<int>(rng.uniform() * 2049.0) - 1024;
  return static_cast<double>(k) / 1024.0;
}

/// Random PSD per-sensor contributions: each sensor's matrix is a sum of
/// `rank` outer products. With `lattice` set, vector entries come from the
/// dyadic lattice.
inline GramianContributions random_contributions(int n_x, int ground, std::uint64_t seed,
                                                 int rank = 2, bool lattice = false) {
  GramianContributions contrib;
  contrib.n_x = n_x;
  for (int j = 0; j < ground; ++j) {
    contrib.ground_set.push_back(j);
    CounterRng rng(seed, static_cast<std::uint64_t>(j));
    Eigen::MatrixXd v = Eigen::MatrixXd::Zero(n_x, n_x);
    for (int l = 0; l < rank; ++l) {
      Eigen::VectorXd w(n_x);
      for (int i = 0; i < n_x; ++i) {
        w[i] = lattice ? dyadic(rng) : uniform(rng, -1.0, 1.0);
      }
      v.noalias() += w * w.transpose();
    }
    contrib.per_sensor.push_back(std::move(v));
  }
  return contrib;
}

/// Random Hurwitz matrix: uniform entries shifted left of the imaginary
/// axis by a random margin.
inline Eigen::MatrixXd random_stable_matrix(int n, std::uint64_t seed) {
  CounterRng rng(seed, 0);
  Eigen::MatrixXd a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = uniform(rng, -1.0, 1.0);
  const double max_real = Eigen::EigenSolver<Eigen::MatrixXd>(a).eigenvalues().real().maxCoeff();
  const double margin = uniform(rng, 0.2, 1.0);
  a.diagonal().array() -= max_real + margin;
  return a;
}

/// Closed-form stability function of the 2-stage Radau IIA method,
/// R(z) = (1 + z/3) / (1 - 2z/3 + z^2/6).
inline double radau_stability(double z) {
  return (1.0 + z / 3.0) / (1.0 - 2.0 * z / 3.0 + z * z / 6.0);
}

/// Matrix version of the stability function: the exact one-step map of the
/// method applied to xdot = A x with step dt.
inline Eigen::MatrixXd radau_step_map(const Eigen::MatrixXd& a, double dt) {
  const Eigen::MatrixXd m = dt * a;
  const int n = static_cast<int>(a.rows());
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd num = eye + m / 3.0;
  const Eigen::MatrixXd den = eye - 2.0 * m / 3.0 + m * m / 6.0;
  return den.partialPivLu().solve(num);
}

/// Analytic logistic solution for xdot = x (1 - x).
inline double logistic_solution(double x0, double t) {
  return 1.0 / (1.0 + (1.0 / x0 - 1.0) * std::exp(-t));
}

/// Naive greedy maximization: per round, a full scan with strict
/// improvement (first maximum wins, so ties break to the lowest position).
/// Oracle for the lazy implementation.
inline std::vector<int> naive_greedy(const SetFunction& f, int r) {
  std::uint64_t current = 0;
  std::vector<int> picks;
  for (int round = 0; round < r; ++round) {
    int best = -1;
    double best_gain = 0.0;
    const double base = f(current);
    for (int p = 0; p < f.ground_size; ++p) {
      if (current & (1ULL << p)) continue;
      const double gain = f(current | (1ULL << p)) - base;
      if (best < 0 || gain > best_gain) {
        best = p;
        best_gain = gain;
      }
    }
    current |= (1ULL << best);
    picks.push_back(best);
  }
  return picks;
}

/// Modular set function from per-position weights.
inline SetFunction modular_function(std::vector<double> weights) {
  SetFunction f;
  f.ground_size = static_cast<int>(weights.size());
  f.value = [w = std::move(weights)](std::uint64_t mask) {
    double total = 0.0;
    for (size_t p = 0; p < w.size(); ++p) {
      if (mask & (1ULL << p)) total += w[p];
    }
    return total;
  };
  return f;
}

/// Two-element coverage function: f({}) = 0, f({0}) = f({1}) = 1,
/// f({0,1}) = 1.5. Submodular and monotone with a strict overlap.
inline SetFunction coverage_pair() {
  SetFunction f;
  f.ground_size = 2;
  f.value = [](std::uint64_t mask) {
    switch (mask) {
      case 0: return 0.0;
      case 1: return 1.0;
      case 2: return 1.0;
      default: return 1.5;
    }
  };
  return f;
}

/// Supermodular test double f(S) = |S|^2; fails the diminishing-returns
/// inequality as soon as the ground set has three elements.
inline SetFunction supermodular_square(int n) {
  SetFunction f;
  f.ground_size = n;
  f.value = [](std::uint64_t mask) {
    const double c = static_cast<double>(popcount64(mask));
    return c * c;
  };
  return f;
}

/// Writes text to a unique temp file and returns its path.
inline std::string write_temp_file(const std::string& stem, const std::string& text) {
  static int counter = 0;
  const auto path = std::filesystem::temp_directory_path() /
                    (stem + "_" + std::to_string(++counter) + ".json");
  std::ofstream out(path);
  out << text;
  out.close();
  return path.string();
}

}  // namespace sns::test
