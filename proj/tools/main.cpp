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

// Command-line driver: simulate models, build observability Gramians,
// select sensing nodes by greedy or continuous-greedy maximization, and
// validate selections with the state-estimation harness. All outputs are
// UTF-8 JSON/CSV with LF endings and full double precision; every command
// is deterministic given its configuration and seed.

#include <CLI11.hpp>
#include <json.hpp>

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "sns/errors.hpp"
#include "sns/estimation.hpp"
#include "sns/integrator.hpp"
#include "sns/io_util.hpp"
#include "sns/metrics.hpp"
#include "sns/model.hpp"
#include "sns/select_continuous.hpp"
#include "sns/select_greedy.hpp"
#include "sns/variational.hpp"

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitNumerical = 3;

struct Options {
  std::string model;
  std::string x0_spec;
  double dt = 0.01;
  int steps = 1000;
  std::string metric = "logdet";
  double rank_tol = 1e-9;
  double eps = 1e-6;
  std::vector<int> r_grid;
  std::string method = "greedy";
  int samples = 64;
  std::uint64_t seed = 0;
  bool exact_f = false;
  int trials = 20;
  double alpha_max = 0.2;
  std::string out = ".";
  int threads = 0;

  int worker_threads() const {
    if (threads > 0) return threads;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
  }
};

void add_common_options(CLI::App* cmd, Options& opt) {
  cmd->add_option("--model", opt.model,
                  "model JSON file, or builtin:{logistic|scalar:<l>|linear:<n>:<entries>}")
      ->required();
  cmd->add_option("--x0", opt.x0_spec, "initial state: comma-separated values or a JSON array file");
  cmd->add_option("--dt", opt.dt, "integration step size");
  cmd->add_option("--steps", opt.steps, "observation horizon N");
  cmd->add_option("--out", opt.out, "output directory");
  cmd->add_option("--threads", opt.threads, "worker thread cap (0 = machine parallelism)");
  cmd->set_config("--config", "", "key=value configuration file; flags take precedence");
}

void add_metric_options(CLI::App* cmd, Options& opt) {
  cmd->add_option("--metric", opt.metric, "observability metric")
      ->check(CLI::IsMember({"trace", "rank", "logdet"}));
  cmd->add_option("--rank-tol", opt.rank_tol, "relative eigenvalue cutoff for rank");
  cmd->add_option("--eps", opt.eps, "logdet regularizer epsilon");
}

void add_selection_options(CLI::App* cmd, Options& opt, const char* method_default) {
  cmd->add_option("--r", opt.r_grid, "cardinality (list allowed for validate/compare)")
      ->delimiter(',')
      ->required();
  cmd->add_option("--method", opt.method, "selection method")
      ->check(CLI::IsMember({"greedy", "continuous", "both"}))
      ->default_val(method_default);
  cmd->add_option("--samples", opt.samples, "Monte-Carlo samples per estimate (K)");
  cmd->add_option("--seed", opt.seed, "root seed for sampling substreams");
  cmd->add_flag("--exact-f", opt.exact_f, "force exact extension enumeration in rounding");
}

void add_validation_options(CLI::App* cmd, Options& opt) {
  cmd->add_option("--trials", opt.trials, "perturbed estimation trials per run");
  cmd->add_option("--alpha-max", opt.alpha_max, "disturbance magnitude upper bound");
}

Eigen::VectorXd parse_x0(const Options& opt, int dimension) {
  if (opt.x0_spec.empty()) {
    throw sns::ValidationError("--x0 is required for this command");
  }
  std::vector<double> values;
  if (std::filesystem::exists(opt.x0_spec)) {
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(sns::read_text_file(opt.x0_spec));
    } catch (const nlohmann::json::exception& e) {
      throw sns::ParseError(opt.x0_spec + ": " + e.what());
    }
    if (!doc.is_array()) throw sns::ParseError(opt.x0_spec + ": expected a JSON array");
    for (const auto& v : doc) {
      if (!v.is_number()) throw sns::ParseError(opt.x0_spec + ": non-numeric entry");
      values.push_back(v.get<double>());
    }
  } else {
    std::stringstream ss(opt.x0_spec);
    std::string item;
    while (std::getline(ss, item, ',')) {
      try {
        values.push_back(std::stod(item));
      } catch (const std::exception&) {
        throw sns::ParseError("--x0: cannot parse \"" + item + "\" as a number");
      }
    }
  }
  if (static_cast<int>(values.size()) != dimension) {
    throw sns::ValidationError("--x0 has " + std::to_string(values.size()) +
                               " entries, model dimension is " + std::to_string(dimension));
  }
  return Eigen::Map<Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

sns::Model load_any_model(const std::string& spec) {
  if (spec.rfind("builtin:", 0) == 0) return sns::make_builtin_model(spec);
  if (!std::filesystem::exists(spec)) {
    throw sns::ValidationError("model file does not exist: " + spec);
  }
  return sns::load_model(spec);
}

sns::Metric make_metric(const Options& opt) {
  switch (sns::parse_metric_kind(opt.metric)) {
    case sns::Metric::Kind::Trace: return sns::Metric::trace();
    case sns::Metric::Kind::Rank: return sns::Metric::rank(opt.rank_tol);
    case sns::Metric::Kind::LogDet: return sns::Metric::logdet(opt.eps);
  }
  throw sns::ValidationError("unknown metric");
}

sns::IrkConfig make_irk(const Options& opt) {
  sns::IrkConfig cfg;
  cfg.dt = opt.dt;
  cfg.validate();
  return cfg;
}

std::filesystem::path prepare_out_dir(const Options& opt) {
  std::filesystem::path dir(opt.out);
  std::filesystem::create_directories(dir);
  return dir;
}

std::vector<int> full_ground_set(int n) {
  std::vector<int> v(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) v[static_cast<size_t>(i)] = i;
  return v;
}

sns::GramianContributions build_contributions(const sns::Model& model,
                                              const Eigen::VectorXd& x0,
                                              const sns::IrkConfig& cfg, int steps) {
  const sns::Trajectory traj = sns::simulate(model, x0, cfg, steps);
  const sns::TransitionStack stack = sns::transition_matrices(model, traj, cfg);
  return sns::sensor_contributions(stack, full_ground_set(model.dimension()));
}

sns::Bounds default_bounds(const sns::Model& model, const Eigen::VectorXd& x0) {
  const int n = model.dimension();
  sns::Bounds b;
  if (model.is_network()) {
    // Concentrations are non-negative; cap at ten times the largest
    // nominal value.
    const double top = 10.0 * x0.maxCoeff();
    if (!(top > 0.0)) {
      throw sns::ValidationError("default bounds need a positive initial state");
    }
    b.lower = Eigen::VectorXd::Zero(n);
    b.upper = Eigen::VectorXd::Constant(n, top);
  } else {
    const double top = 10.0 * std::max(1.0, x0.cwiseAbs().maxCoeff());
    b.lower = Eigen::VectorXd::Constant(n, -top);
    b.upper = Eigen::VectorXd::Constant(n, top);
  }
  return b;
}

std::vector<std::string> methods_to_run(const Options& opt) {
  if (opt.method == "both") return {"greedy", "continuous"};
  return {opt.method};
}

sns::SelectionResult run_selection(const std::string& method, const sns::Metric& metric,
                                   const sns::GramianContributions& contrib, int r,
                                   const Options& opt) {
  if (method == "greedy") return sns::greedy_select(metric, contrib, r);
  sns::SamplerConfig cfg;
  cfg.samples = opt.samples;
  cfg.seed = opt.seed;
  return sns::continuous_select(metric, contrib, r, cfg, opt.exact_f);
}

int cmd_simulate(const Options& opt) {
  const sns::Model model = load_any_model(opt.model);
  const Eigen::VectorXd x0 = parse_x0(opt, model.dimension());
  const sns::Trajectory traj = sns::simulate(model, x0, make_irk(opt), opt.steps);
  std::ostringstream csv;
  sns::write_trajectory_csv(traj, csv);
  const auto dir = prepare_out_dir(opt);
  sns::write_text_file((dir / "trajectory.csv").string(), csv.str());
  std::cout << "wrote " << (dir / "trajectory.csv").string() << " (" << traj.steps()
            << " rows)\n";
  return 0;
}

int cmd_gramian(const Options& opt) {
  const sns::Model model = load_any_model(opt.model);
  const Eigen::VectorXd x0 = parse_x0(opt, model.dimension());
  const sns::GramianContributions contrib =
      build_contributions(model, x0, make_irk(opt), opt.steps);
  std::ostringstream json;
  sns::write_gramian_json(contrib, json);
  const auto dir = prepare_out_dir(opt);
  sns::write_text_file((dir / "gramian.json").string(), json.str());
  std::cout << "wrote " << (dir / "gramian.json").string() << "\n";
  return 0;
}

int cmd_select(const Options& opt) {
  if (opt.r_grid.size() != 1) {
    throw sns::ValidationError("select expects a single --r value");
  }
  const sns::Model model = load_any_model(opt.model);
  const Eigen::VectorXd x0 = parse_x0(opt, model.dimension());
  const sns::Metric metric = make_metric(opt);
  const sns::GramianContributions contrib =
      build_contributions(model, x0, make_irk(opt), opt.steps);

  const auto dir = prepare_out_dir(opt);
  for (const std::string& method : methods_to_run(opt)) {
    const sns::SelectionResult result =
        run_selection(method, metric, contrib, opt.r_grid[0], opt);
    std::ostringstream json;
    sns::write_selection_json(result, json);
    const std::string path = (dir / ("selection_" + method + ".json")).string();
    sns::write_text_file(path, json.str());
    std::cout << method << ": objective " << sns::format_double(result.objective)
              << ", wrote " << path << "\n";
  }
  return 0;
}

int cmd_check(const Options& opt) {
  const sns::Model model = load_any_model(opt.model);
  const Eigen::VectorXd x0 = parse_x0(opt, model.dimension());
  const sns::Metric metric = make_metric(opt);
  const sns::GramianContributions contrib =
      build_contributions(model, x0, make_irk(opt), opt.steps);
  const sns::PropertyReport report = sns::check_properties(metric, contrib);

  std::ostringstream json;
  sns::write_property_report_json(report, json);
  const auto dir = prepare_out_dir(opt);
  sns::write_text_file((dir / "properties.json").string(), json.str());
  std::cout << "properties: " << (report.pass() ? "pass" : "FAIL") << ", wrote "
            << (dir / "properties.json").string() << "\n";
  return 0;
}

struct ValidationRow {
  std::string method;
  int r = 0;
  double objective = 0.0;
  sns::ValidationReport report;
};

std::vector<ValidationRow> run_validation_rows(const Options& opt) {
  const sns::Model model = load_any_model(opt.model);
  const Eigen::VectorXd x0 = parse_x0(opt, model.dimension());
  const sns::Metric metric = make_metric(opt);
  const sns::IrkConfig cfg = make_irk(opt);
  const sns::GramianContributions contrib = build_contributions(model, x0, cfg, opt.steps);
  const sns::Bounds bounds = default_bounds(model, x0);

  std::vector<ValidationRow> rows;
  for (const std::string& method : methods_to_run(opt)) {
    for (int r : opt.r_grid) {
      ValidationRow row;
      row.method = method;
      row.r = r;
      const sns::SelectionResult selection = run_selection(method, metric, contrib, r, opt);
      row.objective = selection.objective;
      row.report = sns::validation_run(model, cfg, opt.steps, selection, opt.trials,
                                       opt.alpha_max, bounds, x0, opt.seed,
                                       opt.worker_threads());
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

int cmd_validate(const Options& opt) {
  const std::vector<ValidationRow> rows = run_validation_rows(opt);
  const auto dir = prepare_out_dir(opt);

  std::ostringstream csv;
  csv << "r,trial,error,method\n";
  nlohmann::json summary = nlohmann::json::array();
  for (const ValidationRow& row : rows) {
    sns::append_validation_csv(row.report, csv);
    nlohmann::json item;
    item["method"] = row.method;
    item["r"] = row.r;
    item["objective"] = row.objective;
    item["median"] = row.report.median;
    item["q1"] = row.report.q1;
    item["q3"] = row.report.q3;
    summary.push_back(std::move(item));
  }
  sns::write_text_file((dir / "validation.csv").string(), csv.str());
  nlohmann::json doc;
  doc["seed"] = opt.seed;
  doc["trials"] = opt.trials;
  doc["alpha_max"] = opt.alpha_max;
  doc["runs"] = std::move(summary);
  sns::write_text_file((dir / "validation_summary.json").string(), doc.dump(2) + "\n");
  std::cout << "wrote " << (dir / "validation.csv").string() << " and "
            << (dir / "validation_summary.json").string() << "\n";
  return 0;
}

int cmd_compare(const Options& opt) {
  const std::vector<ValidationRow> rows = run_validation_rows(opt);
  const auto dir = prepare_out_dir(opt);

  std::ostringstream csv;
  csv << "method,r,objective,median,q1,q3\n";
  nlohmann::json runs = nlohmann::json::array();
  for (const ValidationRow& row : rows) {
    csv << row.method << "," << row.r << "," << sns::format_double(row.objective) << ","
        << sns::format_double(row.report.median) << ","
        << sns::format_double(row.report.q1) << "," << sns::format_double(row.report.q3)
        << "\n";
    nlohmann::json item;
    item["method"] = row.method;
    item["r"] = row.r;
    item["objective"] = row.objective;
    item["median"] = row.report.median;
    item["q1"] = row.report.q1;
    item["q3"] = row.report.q3;
    runs.push_back(std::move(item));
  }
  sns::write_text_file((dir / "compare.csv").string(), csv.str());
  nlohmann::json doc;
  doc["seed"] = opt.seed;
  doc["trials"] = opt.trials;
  doc["alpha_max"] = opt.alpha_max;
  doc["runs"] = std::move(runs);
  sns::write_text_file((dir / "compare.json").string(), doc.dump(2) + "\n");
  std::cout << "wrote " << (dir / "compare.csv").string() << " and "
            << (dir / "compare.json").string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sensing-node selection for nonlinear dynamical networks"};
  app.require_subcommand(1);

  Options opt;
  CLI::App* sim = app.add_subcommand("simulate", "integrate a model and export the trajectory");
  add_common_options(sim, opt);

  CLI::App* gram = app.add_subcommand("gramian", "export per-sensor Gramian contributions");
  add_common_options(gram, opt);

  CLI::App* sel = app.add_subcommand("select", "select sensing nodes");
  add_common_options(sel, opt);
  add_metric_options(sel, opt);
  add_selection_options(sel, opt, "greedy");

  CLI::App* val = app.add_subcommand("validate", "validate selections by state estimation");
  add_common_options(val, opt);
  add_metric_options(val, opt);
  add_selection_options(val, opt, "both");
  add_validation_options(val, opt);

  CLI::App* chk = app.add_subcommand("check", "exhaustively check metric set-function properties");
  add_common_options(chk, opt);
  add_metric_options(chk, opt);

  CLI::App* cmp = app.add_subcommand("compare", "compare greedy and continuous selections");
  add_common_options(cmp, opt);
  add_metric_options(cmp, opt);
  add_selection_options(cmp, opt, "both");
  add_validation_options(cmp, opt);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (sim->parsed()) return cmd_simulate(opt);
    if (gram->parsed()) return cmd_gramian(opt);
    if (sel->parsed()) return cmd_select(opt);
    if (val->parsed()) return cmd_validate(opt);
    if (chk->parsed()) return cmd_check(opt);
    if (cmp->parsed()) return cmd_compare(opt);
  } catch (const sns::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const sns::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return 0;
}
