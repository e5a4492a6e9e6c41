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

#include "sns/model.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "sns/errors.hpp"

namespace sns {

namespace {

// x^q for non-negative integer q, with 0^0 = 1.
double pow_int(double x, int q) {
  double p = 1.0;
  for (int i = 0; i < q; ++i) p *= x;
  return p;
}

void check_dimension(const Model& model, const Eigen::Ref<const Eigen::VectorXd>& x,
                     const char* op) {
  if (x.size() != model.dimension()) {
    throw ValidationError(std::string(op) + ": state has length " +
                          std::to_string(x.size()) + ", model dimension is " +
                          std::to_string(model.dimension()));
  }
}

void validate_order_map(const std::map<int, int>& orders, int n_species,
                        const std::string& field) {
  for (const auto& [idx, order] : orders) {
    if (idx < 0 || idx >= n_species) {
      throw ValidationError(field + ": species index " + std::to_string(idx) +
                            " out of range [0, " + std::to_string(n_species) + ")");
    }
    if (order <= 0) {
      throw ValidationError(field + "[" + std::to_string(idx) +
                            "]: order must be a positive integer, got " +
                            std::to_string(order));
    }
  }
}

}  // namespace

int Model::dimension() const {
  if (const auto* net = std::get_if<ReactionNetwork>(&kind)) return net->num_species();
  if (const auto* lin = std::get_if<LinearSystem>(&kind))
    return static_cast<int>(lin->coeff.rows());
  return 1;  // logistic
}

ReactionNetwork make_reaction_network(std::vector<std::string> species,
                                      std::vector<Reaction> reactions, bool closed) {
  const int n = static_cast<int>(species.size());
  if (n == 0) throw ValidationError("species: list must be non-empty");
  const int nr = static_cast<int>(reactions.size());

  Eigen::MatrixXd theta = Eigen::MatrixXd::Zero(n, nr);
  for (int j = 0; j < nr; ++j) {
    const Reaction& rxn = reactions[j];
    const std::string field = "reactions[" + std::to_string(j) + "]";
    if (rxn.reactants.empty() && rxn.products.empty()) {
      throw ValidationError(field + ": reactants and products both empty");
    }
    if (!(rxn.rate_constant >= 0.0)) {
      throw ValidationError(field + ".rate_constant: must be >= 0, got " +
                            std::to_string(rxn.rate_constant));
    }
    validate_order_map(rxn.reactants, n, field + ".reactants");
    validate_order_map(rxn.products, n, field + ".products");
    for (const auto& [i, q] : rxn.reactants) theta(i, j) -= q;
    for (const auto& [i, w] : rxn.products) theta(i, j) += w;
  }

  ReactionNetwork net;
  net.species = std::move(species);
  net.reactions = std::move(reactions);
  net.theta = std::move(theta);
  net.closed = closed;
  return net;
}

Model make_network_model(ReactionNetwork network) { return Model{std::move(network)}; }

Model make_linear_model(Eigen::MatrixXd coeff) {
  if (coeff.rows() != coeff.cols() || coeff.rows() == 0) {
    throw ValidationError("linear model: coefficient matrix must be square and non-empty");
  }
  return Model{LinearSystem{std::move(coeff)}};
}

Model make_scalar_linear_model(double lambda) {
  Eigen::MatrixXd a(1, 1);
  a(0, 0) = lambda;
  return Model{LinearSystem{std::move(a)}};
}

Model make_logistic_model() { return Model{Logistic{}}; }

Model load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open model file: " + path);

  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }

  try {
    if (!doc.is_object()) throw ParseError(path + ": top level must be an object");
    if (!doc.contains("species") || !doc["species"].is_array()) {
      throw ParseError(path + ": missing or non-array field \"species\"");
    }
    std::vector<std::string> species;
    for (const auto& s : doc["species"]) {
      if (!s.is_string()) throw ParseError(path + ": species entries must be strings");
      species.push_back(s.get<std::string>());
    }

    if (!doc.contains("reactions") || !doc["reactions"].is_array()) {
      throw ParseError(path + ": missing or non-array field \"reactions\"");
    }
    auto parse_orders = [&](const nlohmann::json& obj,
                            const std::string& field) -> std::map<int, int> {
      if (!obj.is_object()) throw ParseError(path + ": " + field + " must be an object");
      std::map<int, int> out;
      for (const auto& [key, val] : obj.items()) {
        int idx = 0;
        try {
          size_t pos = 0;
          idx = std::stoi(key, &pos);
          if (pos != key.size()) throw std::invalid_argument(key);
        } catch (const std::exception&) {
          throw ParseError(path + ": " + field + ": key \"" + key +
                           "\" is not a decimal species index");
        }
        if (!val.is_number_integer()) {
          throw ParseError(path + ": " + field + "[" + key + "]: order must be an integer");
        }
        out[idx] = val.get<int>();
      }
      return out;
    };

    std::vector<Reaction> reactions;
    int j = 0;
    for (const auto& r : doc["reactions"]) {
      const std::string field = "reactions[" + std::to_string(j) + "]";
      if (!r.is_object()) throw ParseError(path + ": " + field + " must be an object");
      Reaction rxn;
      if (r.contains("reactants")) rxn.reactants = parse_orders(r["reactants"], field + ".reactants");
      if (r.contains("products")) rxn.products = parse_orders(r["products"], field + ".products");
      if (!r.contains("rate_constant") || !r["rate_constant"].is_number()) {
        throw ParseError(path + ": " + field + ".rate_constant: missing or non-numeric");
      }
      rxn.rate_constant = r["rate_constant"].get<double>();
      reactions.push_back(std::move(rxn));
      ++j;
    }

    bool closed = false;
    if (doc.contains("closed")) {
      if (!doc["closed"].is_boolean()) throw ParseError(path + ": \"closed\" must be a boolean");
      closed = doc["closed"].get<bool>();
    }

    return make_network_model(make_reaction_network(std::move(species),
                                                    std::move(reactions), closed));
  } catch (const ValidationError& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

Model make_builtin_model(const std::string& name) {
  const std::string prefix = "builtin:";
  if (name.rfind(prefix, 0) != 0) {
    throw ValidationError("builtin model name must start with \"builtin:\": " + name);
  }
  std::string rest = name.substr(prefix.size());
  if (rest == "logistic") return make_logistic_model();

  auto split = [](const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) parts.push_back(item);
    return parts;
  };

  try {
    if (rest.rfind("scalar:", 0) == 0) {
      return make_scalar_linear_model(std::stod(rest.substr(7)));
    }
    if (rest.rfind("linear:", 0) == 0) {
      auto parts = split(rest.substr(7), ':');
      if (parts.size() != 2) throw std::invalid_argument(rest);
      const int n = std::stoi(parts[0]);
      auto entries = split(parts[1], ',');
      if (n <= 0 || static_cast<int>(entries.size()) != n * n) {
        throw ValidationError("builtin:linear: expected " + std::to_string(n * n) +
                              " row-major entries");
      }
      Eigen::MatrixXd a(n, n);
      for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) a(i, k) = std::stod(entries[i * n + k]);
      return make_linear_model(std::move(a));
    }
  } catch (const std::invalid_argument&) {
    throw ValidationError("cannot parse builtin model name: " + name);
  } catch (const std::out_of_range&) {
    throw ValidationError("cannot parse builtin model name: " + name);
  }
  throw ValidationError("unknown builtin model: " + name);
}

Eigen::VectorXd eval_rates(const Model& model, const Eigen::Ref<const Eigen::VectorXd>& x) {
  const ReactionNetwork* net = model.network();
  if (net == nullptr) throw ValidationError("eval_rates: model has no reaction rates");
  check_dimension(model, x, "eval_rates");

  Eigen::VectorXd psi(net->num_reactions());
  for (int j = 0; j < net->num_reactions(); ++j) {
    double rate = net->reactions[j].rate_constant;
    for (const auto& [i, q] : net->reactions[j].reactants) rate *= pow_int(x[i], q);
    psi[j] = rate;
  }
  return psi;
}

Eigen::VectorXd eval_rhs(const Model& model, const Eigen::Ref<const Eigen::VectorXd>& x) {
  check_dimension(model, x, "eval_rhs");
  if (const auto* net = model.network()) {
    return net->theta * eval_rates(model, x);
  }
  if (const auto* lin = std::get_if<LinearSystem>(&model.kind)) {
    return lin->coeff * x;
  }
  Eigen::VectorXd f(1);
  f[0] = x[0] * (1.0 - x[0]);
  return f;
}

Eigen::MatrixXd eval_rhs_jacobian(const Model& model,
                                  const Eigen::Ref<const Eigen::VectorXd>& x) {
  check_dimension(model, x, "eval_rhs_jacobian");
  if (const auto* lin = std::get_if<LinearSystem>(&model.kind)) return lin->coeff;
  if (std::holds_alternative<Logistic>(model.kind)) {
    Eigen::MatrixXd j(1, 1);
    j(0, 0) = 1.0 - 2.0 * x[0];
    return j;
  }

  const ReactionNetwork& net = *model.network();
  const int n = net.num_species();
  Eigen::MatrixXd dpsi = Eigen::MatrixXd::Zero(net.num_reactions(), n);
  for (int j = 0; j < net.num_reactions(); ++j) {
    const Reaction& rxn = net.reactions[j];
    for (const auto& [i, q] : rxn.reactants) {
      if (x[i] != 0.0) {
        // d/dx_i of kappa prod x^q = q * psi_j / x_i.
        double rate = rxn.rate_constant;
        for (const auto& [l, ql] : rxn.reactants) rate *= pow_int(x[l], ql);
        dpsi(j, i) = q * rate / x[i];
      } else {
        // Monomial rebuild at x_i = 0: q * x_i^{q-1} * prod_{l != i} x_l^{q_l}.
        double rate = rxn.rate_constant * q * pow_int(x[i], q - 1);
        for (const auto& [l, ql] : rxn.reactants) {
          if (l != i) rate *= pow_int(x[l], ql);
        }
        dpsi(j, i) = rate;
      }
    }
  }
  return net.theta * dpsi;
}

PerturbedState perturb_initial_state(const Eigen::Ref<const Eigen::VectorXd>& x0,
                                     double alpha_max, CounterRng& rng) {
  if (!(alpha_max > 0.0)) {
    throw ValidationError("perturb_initial_state: alpha_max must be > 0, got " +
                          std::to_string(alpha_max));
  }
  const double alpha = alpha_max * rng.uniform_open();
  return PerturbedState{(1.0 + alpha) * x0, alpha};
}

}  // namespace sns
