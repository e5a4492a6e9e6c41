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
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "sns/rng.hpp"

namespace sns {

/// One mass-action reaction. Reactant and product orders are sparse maps
/// species-index -> non-negative integer order; the rate is
/// kappa * prod_i x_i^{q_i} with the 0^0 = 1 convention.
struct Reaction {
  std::map<int, int> reactants;  // species index -> order q
  std::map<int, int> products;   // species index -> order w
  double rate_constant = 0.0;    // kappa >= 0, unitless scalar
};

/// A mass-action reaction network with stoichiometric matrix
/// theta[i][j] = w_ji - q_ji, always derived from the reaction records.
struct ReactionNetwork {
  std::vector<std::string> species;
  std::vector<Reaction> reactions;
  Eigen::MatrixXd theta;  // n_x x N_r
  bool closed = false;    // every reaction conserves total species count

  int num_species() const { return static_cast<int>(species.size()); }
  int num_reactions() const { return static_cast<int>(reactions.size()); }
};

/// Linear dynamics xdot = A x. A 1x1 matrix gives the scalar test system.
struct LinearSystem {
  Eigen::MatrixXd coeff;
};

/// Logistic growth xdot = x (1 - x), one-dimensional.
struct Logistic {};

/// A dynamical-system model: either a reaction network loaded from a file
/// or one of the built-in analytic systems used for exact test oracles.
/// Models are immutable after construction; all evaluation functions are
/// pure and safe to call concurrently.
struct Model {
  std::variant<ReactionNetwork, LinearSystem, Logistic> kind;

  int dimension() const;
  bool is_network() const { return std::holds_alternative<ReactionNetwork>(kind); }
  const ReactionNetwork* network() const { return std::get_if<ReactionNetwork>(&kind); }
};

/// Validates reactions, derives theta, and assembles the network.
/// Throws ValidationError naming the offending field.
ReactionNetwork make_reaction_network(std::vector<std::string> species,
                                      std::vector<Reaction> reactions, bool closed);

Model make_network_model(ReactionNetwork network);
Model make_linear_model(Eigen::MatrixXd coeff);
Model make_scalar_linear_model(double lambda);
Model make_logistic_model();

/// Loads a reaction-network model from its JSON file format:
///   { "species": [...], "reactions": [ { "reactants": {"0": 1},
///     "products": {"1": 1}, "rate_constant": 2.0 }, ... ], "closed": false }
/// Throws ParseError on malformed input and ValidationError on invariant
/// violations; messages name the offending field.
Model load_model(const std::string& path);

/// Parses a built-in model name of the form "builtin:logistic",
/// "builtin:scalar:<lambda>", or "builtin:linear:<n>:<row-major entries>".
Model make_builtin_model(const std::string& name);

/// Reaction rate vector psi(x) in R^{N_r}: psi_j = kappa_j prod_i x_i^{q_ji}.
/// Defined for network models only.
Eigen::VectorXd eval_rates(const Model& model, const Eigen::Ref<const Eigen::VectorXd>& x);

/// Continuous-time right-hand side f(x): theta * psi(x) for networks, the
/// named closed form for builtins.
Eigen::VectorXd eval_rhs(const Model& model, const Eigen::Ref<const Eigen::VectorXd>& x);

/// Analytic Jacobian df/dx, by monomial differentiation for networks.
Eigen::MatrixXd eval_rhs_jacobian(const Model& model,
                                  const Eigen::Ref<const Eigen::VectorXd>& x);

struct PerturbedState {
  Eigen::VectorXd x;
  double alpha;  // the realized disturbance magnitude
};

/// Scales the initial state to (1 + alpha) * x0 with alpha drawn uniformly
/// from the open interval (0, alpha_max). The draw is recorded for audit.
PerturbedState perturb_initial_state(const Eigen::Ref<const Eigen::VectorXd>& x0,
                                     double alpha_max, CounterRng& rng);

}  // namespace sns
