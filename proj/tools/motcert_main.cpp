// motcert: solve, certify, discretize, and run experiments on discrete
// multi-marginal transport instances over the JSON formats of the library.
//
// Exit codes: 0 success / PASS, 1 FAIL verdict (a violation certificate where
// none was expected, a positive audit gap, an unmet expectation), 2 usage or
// parse errors, 3 guard refusal.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "motcert/json_io.hpp"

namespace {

using motcert::io::json;

struct ParseFailure {
  std::string path;
  std::size_t byte;
  std::string message;
};

json load_json(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw motcert::validation_error("cannot open file '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseFailure{path, e.byte, e.what()};
  }
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw motcert::validation_error("cannot write file '" + path + "'");
  out << text;
}

void write_json(const std::string& path, const json& j) { write_file(path, j.dump(2) + "\n"); }

std::optional<motcert::WeightMode> parse_mode(const std::string& mode) {
  if (mode.empty()) return std::nullopt;
  if (mode == "rational") return motcert::WeightMode::rational;
  if (mode == "float") return motcert::WeightMode::floating;
  throw motcert::validation_error("--mode must be 'rational' or 'float'");
}

motcert::Objective parse_objective(const std::string& objective) {
  if (objective == "sum") return motcert::Objective::sum;
  if (objective == "max") return motcert::Objective::max;
  throw motcert::validation_error("--objective must be 'sum' or 'max'");
}

motcert::DiscreteCoupling load_plan(const std::string& path, const std::string& mode) {
  auto plan = motcert::io::coupling_from_json(load_json(path));
  if (auto m = parse_mode(mode)) return motcert::io::coupling_with_mode(plan, *m);
  return plan;
}

struct Options {
  std::string instance, plan, plan_b, cost, out, partition_out, config;
  std::string objective = "sum";
  std::string mode;
  std::string alpha = "sqrt2m1";
  std::string eps = "1/100";
  std::vector<int> levels{1, 2, 3, 4};
  int kmax = 3;
  std::size_t m = 30;
  std::size_t trials = 20;
  std::size_t l_max = 4;
  std::uint64_t seed = 0;
  motcert::GuardConfig guard;
};

int cmd_solve(const Options& opt) {
  auto inst = motcert::io::instance_from_json(load_json(opt.instance));
  if (auto m = parse_mode(opt.mode))
    for (auto& marginal : inst.marginals) marginal = motcert::io::measure_with_mode(marginal, *m);
  motcert::Solution sol = inst.objective == motcert::Objective::sum
                              ? motcert::solve_integral_mot(inst, opt.guard)
                              : motcert::solve_sup_mot(inst, opt.guard);
  write_json(opt.out, motcert::io::solution_to_json(sol));
  return 0;
}

int cmd_check(const Options& opt, bool icm) {
  auto plan = load_plan(opt.plan, opt.mode);
  auto cost = motcert::io::cost_from_json(load_json(opt.cost));
  auto cert = icm ? motcert::check_icm(plan.support(), cost, opt.kmax, opt.guard)
                  : motcert::check_cm(plan.support(), cost, opt.kmax, opt.guard);
  json out{{"found", cert.has_value()},
           {"certificate", cert ? motcert::io::certificate_to_json(*cert) : json(nullptr)}};
  if (!opt.out.empty()) write_json(opt.out, out);
  std::cout << (cert ? "certificate found\n" : "no certificate\n");
  return cert ? 1 : 0;
}

int cmd_audit(const Options& opt) {
  auto plan = load_plan(opt.plan, opt.mode);
  auto cost = motcert::io::cost_from_json(load_json(opt.cost));
  auto report = motcert::check_finite_optimality(plan, cost, parse_objective(opt.objective),
                                                 opt.trials, opt.l_max, opt.seed, opt.guard);
  if (!opt.out.empty()) write_json(opt.out, motcert::io::finite_optimality_to_json(report));
  std::cout << (report.all_pass ? "all gaps zero\n" : "positive gap found\n");
  return report.all_pass ? 0 : 1;
}

int cmd_rationalize(const Options& opt) {
  auto a = load_plan(opt.plan, "");
  auto b = load_plan(opt.plan_b, "");
  auto pair = motcert::rationalize_pair(a, b, motcert::parse_rational(opt.eps));
  write_json(opt.out, motcert::io::rationalized_to_json(pair));
  return 0;
}

int cmd_discretize(const Options& opt) {
  auto plan = load_plan(opt.plan, opt.mode);
  auto cost = motcert::io::cost_from_json(load_json(opt.cost));
  auto rows =
      motcert::convergence_report(plan, cost, parse_objective(opt.objective), opt.levels);
  write_file(opt.out, motcert::io::convergence_csv(rows));
  if (!opt.partition_out.empty()) {
    std::vector<std::vector<motcert::Point>> supports;
    for (std::size_t k = 0; k < plan.n_marginals(); ++k) {
      std::vector<motcert::Point> pts;
      motcert::DiscreteMeasure mk = motcert::marginal(plan, k);
      for (const auto& atom : mk.atoms()) pts.push_back(atom.point);
      supports.push_back(std::move(pts));
    }
    for (int level : opt.levels) {
      auto part = motcert::build_partition(plan.spaces(), supports, level);
      write_json(opt.partition_out + ".level" + std::to_string(level) + ".json",
                 motcert::io::partition_to_json(part));
    }
  }
  return 0;
}

int cmd_gamma(const Options& opt) {
  if (opt.config.empty() && (opt.plan.empty() || opt.cost.empty()))
    throw motcert::validation_error("gamma: pass --config or both --plan and --cost");
  motcert::DiscreteCoupling plan = [&] {
    if (opt.config.empty()) return load_plan(opt.plan, opt.mode);
    return motcert::io::coupling_from_json(load_json(opt.config).at("plan"));
  }();
  motcert::CostSpec cost = motcert::io::cost_from_json(
      opt.config.empty() ? load_json(opt.cost) : load_json(opt.config).at("cost"));
  motcert::Objective objective = parse_objective(opt.objective);
  std::vector<int> levels = opt.levels;
  int kmax = opt.kmax;
  if (!opt.config.empty()) {
    json cfg = load_json(opt.config);
    objective = parse_objective(cfg.at("objective").get<std::string>());
    levels = cfg.at("levels").get<std::vector<int>>();
    kmax = cfg.at("k_max").get<int>();
  }
  auto verdict = motcert::verify_optimality_theorem(plan, cost, objective, kmax, levels,
                                                    opt.trials, opt.seed, opt.guard);
  write_json(opt.out, motcert::io::verdict_to_json(verdict));
  if (verdict.gamma) {
    std::string csv_path = opt.out;
    if (csv_path.size() > 5 && csv_path.substr(csv_path.size() - 5) == ".json")
      csv_path.resize(csv_path.size() - 5);
    write_file(csv_path + ".csv", motcert::io::gamma_csv(*verdict.gamma));
  }
  std::cout << (verdict.pass ? "PASS\n" : "FAIL: " + verdict.detail + "\n");
  return verdict.pass ? 0 : 1;
}

int cmd_counterexample(const Options& opt) {
  auto alpha = motcert::AlphaSpec::parse(opt.alpha);
  auto run = motcert::run_counterexample(alpha, opt.m, opt.kmax, opt.guard);
  if (!opt.out.empty()) write_json(opt.out, motcert::io::counterexample_to_json(run));
  std::cout << (run.matches_expectation ? "expectation met: " : "expectation NOT met: ") << run.note
            << "\n";
  return run.matches_expectation ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"discrete multi-marginal optimal transport: solving, cyclical-monotonicity "
               "certification, dyadic discretization, and convergence experiments"};
  app.require_subcommand(1);
  app.fallthrough();  // let subcommands hand --guard-* back to the app
  Options opt;

  app.add_option("--guard-cells", opt.guard.max_product_cells,
                 "max product-support cells a solver may materialize");
  app.add_option("--guard-evals", opt.guard.max_certificate_evals,
                 "max cost evaluations per certificate search");

  auto* solve = app.add_subcommand("solve", "solve an instance file for either objective");
  solve->add_option("--instance", opt.instance, "instance JSON")->required();
  solve->add_option("--out", opt.out, "solution JSON path")->required();
  solve->add_option("--mode", opt.mode, "override weight mode: rational|float");

  auto* check_cm = app.add_subcommand("check-cm", "sum-aggregate monotonicity certification");
  auto* check_icm = app.add_subcommand("check-icm", "max-aggregate monotonicity certification");
  for (auto* cmd : {check_cm, check_icm}) {
    cmd->add_option("--plan", opt.plan, "plan coupling JSON")->required();
    cmd->add_option("--cost", opt.cost, "cost spec JSON")->required();
    cmd->add_option("--kmax", opt.kmax, "largest reassignment size searched");
    cmd->add_option("--out", opt.out, "certificate report JSON path");
    cmd->add_option("--mode", opt.mode, "override weight mode: rational|float");
  }

  auto* audit = app.add_subcommand("audit-finite", "finite-optimality audit by submeasure re-solve");
  audit->add_option("--plan", opt.plan, "plan coupling JSON")->required();
  audit->add_option("--cost", opt.cost, "cost spec JSON")->required();
  audit->add_option("--objective", opt.objective, "sum|max")->required();
  audit->add_option("--trials", opt.trials, "number of sampled submeasures");
  audit->add_option("--l-max", opt.l_max, "largest submeasure size");
  audit->add_option("--seed", opt.seed, "sampling seed");
  audit->add_option("--out", opt.out, "report JSON path");
  audit->add_option("--mode", opt.mode, "override weight mode: rational|float");

  auto* rationalize =
      app.add_subcommand("rationalize", "replace two equal-marginal couplings' weights by rationals");
  rationalize->add_option("--plan", opt.plan, "first coupling JSON")->required();
  rationalize->add_option("--plan-b", opt.plan_b, "second coupling JSON")->required();
  rationalize->add_option("--eps", opt.eps, "componentwise bound, e.g. 1/100");
  rationalize->add_option("--out", opt.out, "output JSON path")->required();

  auto* discretize = app.add_subcommand("discretize", "per-level discretization convergence report");
  discretize->add_option("--plan", opt.plan, "plan coupling JSON")->required();
  discretize->add_option("--cost", opt.cost, "cost spec JSON")->required();
  discretize->add_option("--objective", opt.objective, "sum|max");
  discretize->add_option("--levels", opt.levels, "refinement levels")->delimiter(',');
  discretize->add_option("--out", opt.out, "CSV report path")->required();
  discretize->add_option("--partition-out", opt.partition_out, "prefix for per-level partition JSON");
  discretize->add_option("--mode", opt.mode, "override weight mode: rational|float");

  auto* gamma = app.add_subcommand("gamma", "three-stage optimality verification with level solves");
  auto* gamma_config = gamma->add_option("--config", opt.config,
                                         "experiment config JSON (plan, cost, objective, levels, k_max)");
  gamma->add_option("--plan", opt.plan, "plan coupling JSON")->excludes(gamma_config);
  gamma->add_option("--cost", opt.cost, "cost spec JSON")->excludes(gamma_config);
  gamma->add_option("--objective", opt.objective, "sum|max");
  gamma->add_option("--levels", opt.levels, "refinement levels")->delimiter(',');
  gamma->add_option("--kmax", opt.kmax, "certification depth");
  gamma->add_option("--trials", opt.trials, "audit trials");
  gamma->add_option("--seed", opt.seed, "audit seed");
  gamma->add_option("--out", opt.out, "verdict JSON path")->required();
  gamma->add_option("--mode", opt.mode, "override weight mode: rational|float");

  auto* counter = app.add_subcommand("counterexample", "irrational-rotation study under the "
                                                       "equality-indicator cost");
  counter->add_option("--alpha", opt.alpha, "sqrt2m1 | golden | p/q");
  counter->add_option("--m", opt.m, "rotation sample count");
  counter->add_option("--kmax", opt.kmax, "certification depth")->default_val(4);
  counter->add_option("--out", opt.out, "report JSON path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (solve->parsed()) return cmd_solve(opt);
    if (check_cm->parsed()) return cmd_check(opt, false);
    if (check_icm->parsed()) return cmd_check(opt, true);
    if (audit->parsed()) return cmd_audit(opt);
    if (rationalize->parsed()) return cmd_rationalize(opt);
    if (discretize->parsed()) return cmd_discretize(opt);
    if (gamma->parsed()) return cmd_gamma(opt);
    if (counter->parsed()) return cmd_counterexample(opt);
  } catch (const ParseFailure& e) {
    std::cerr << "parse error: file '" << e.path << "' byte " << e.byte << ": " << e.message
              << "\n";
    return 2;
  } catch (const motcert::guard_exceeded& e) {
    std::cerr << "guard refusal: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
