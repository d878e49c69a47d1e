#include "motcert/json_io.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace motcert::io {

namespace {

json value_or_inf(double v) {
  if (std::isinf(v)) return v > 0 ? json("inf") : json("-inf");
  return json(v);
}

double value_from(const json& j, const char* what) {
  if (j.is_string()) {
    const auto& s = j.get_ref<const std::string&>();
    if (s == "inf") return kInfiniteCost;
    if (s == "-inf") return -kInfiniteCost;
    throw validation_error(std::string(what) + ": unknown sentinel '" + s + "'");
  }
  return j.get<double>();
}

json weight_to_json(const Weight& w) {
  if (w.mode() == WeightMode::rational) return json(format_rational(w.rat()));
  return json(w.flt());
}

Weight weight_from_json(const json& j, WeightMode mode) {
  if (mode == WeightMode::rational) {
    if (!j.is_string())
      throw validation_error("weight: rational mode expects \"p/q\" strings");
    return Weight::rational(parse_rational(j.get<std::string>()));
  }
  if (!j.is_number()) throw validation_error("weight: float mode expects numbers");
  return Weight::floating(j.get<double>());
}

WeightMode mode_from_json(const json& j) {
  const auto s = j.get<std::string>();
  if (s == "rational") return WeightMode::rational;
  if (s == "float") return WeightMode::floating;
  throw validation_error("mode: expected \"rational\" or \"float\"");
}

const char* mode_name(WeightMode m) { return m == WeightMode::rational ? "rational" : "float"; }

json space_to_json(const FactorSpace& s) {
  json bounds = json::array();
  for (const auto& [lo, hi] : s.bounds) bounds.push_back(json::array({lo, hi}));
  return json{{"dim", s.dim}, {"bounds", bounds}};
}

FactorSpace space_from_json(const json& j) {
  std::vector<std::array<double, 2>> bounds;
  for (const auto& b : j.at("bounds")) bounds.push_back({b.at(0).get<double>(), b.at(1).get<double>()});
  return FactorSpace(j.at("dim").get<std::size_t>(), std::move(bounds));
}

json point_to_json(const Point& p) { return json(p.coords); }

Point point_from_json(const json& j) { return Point(j.get<std::vector<double>>()); }

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

json measure_to_json(const DiscreteMeasure& m) {
  json atoms = json::array();
  for (const auto& a : m.atoms())
    atoms.push_back(json{{"point", point_to_json(a.point)}, {"weight", weight_to_json(a.weight)}});
  return json{{"space", space_to_json(m.space())}, {"mode", mode_name(m.mode())}, {"atoms", atoms}};
}

DiscreteMeasure measure_from_json(const json& j) {
  WeightMode mode = mode_from_json(j.at("mode"));
  std::vector<WeightedPoint> atoms;
  for (const auto& a : j.at("atoms"))
    atoms.push_back({point_from_json(a.at("point")), weight_from_json(a.at("weight"), mode)});
  return DiscreteMeasure(space_from_json(j.at("space")), mode, std::move(atoms));
}

json coupling_to_json(const DiscreteCoupling& c) {
  json spaces = json::array();
  for (const auto& s : c.spaces()) spaces.push_back(space_to_json(s));
  json atoms = json::array();
  for (const auto& a : c.atoms()) {
    json tuple = json::array();
    for (const auto& p : a.tuple) tuple.push_back(point_to_json(p));
    atoms.push_back(json{{"tuple", tuple}, {"weight", weight_to_json(a.weight)}});
  }
  return json{{"spaces", spaces}, {"mode", mode_name(c.mode())}, {"atoms", atoms}};
}

DiscreteCoupling coupling_from_json(const json& j, MassPolicy policy) {
  WeightMode mode = mode_from_json(j.at("mode"));
  std::vector<FactorSpace> spaces;
  for (const auto& s : j.at("spaces")) spaces.push_back(space_from_json(s));
  std::vector<CouplingAtom> atoms;
  for (const auto& a : j.at("atoms")) {
    std::vector<Point> tuple;
    for (const auto& p : a.at("tuple")) tuple.push_back(point_from_json(p));
    atoms.push_back({std::move(tuple), weight_from_json(a.at("weight"), mode)});
  }
  return DiscreteCoupling(std::move(spaces), mode, std::move(atoms), policy);
}

namespace {

json tensor_values_to_json(const std::vector<CostValue>& values,
                           const std::vector<std::vector<Point>>& supports, std::size_t k,
                           std::size_t& cursor) {
  json arr = json::array();
  for (std::size_t i = 0; i < supports[k].size(); ++i) {
    if (k + 1 == supports.size())
      arr.push_back(value_or_inf(values[cursor++]));
    else
      arr.push_back(tensor_values_to_json(values, supports, k + 1, cursor));
  }
  return arr;
}

void tensor_values_from_json(const json& j, std::size_t depth, std::size_t n,
                             std::vector<CostValue>& out) {
  if (depth + 1 == n) {
    for (const auto& v : j) out.push_back(value_from(v, "tensor value"));
    return;
  }
  for (const auto& sub : j) tensor_values_from_json(sub, depth + 1, n, out);
}

}  // namespace

json cost_to_json(const CostSpec& c) {
  switch (c.kind()) {
    case CostKind::power_distance:
      return json{{"kind", "power_distance"}, {"p", c.power()}};
    case CostKind::squared_sum_barycenter:
      return json{{"kind", "squared_sum_barycenter"}, {"n_marginals", c.n_marginals()}};
    case CostKind::equality_indicator:
      return json{{"kind", "equality_indicator"},
                  {"equal_value", c.equal_value()},
                  {"unequal_value", c.unequal_value()}};
    case CostKind::tensor: {
      json supports = json::array();
      for (const auto& sup : c.tensor_supports()) {
        json pts = json::array();
        for (const auto& p : sup) pts.push_back(point_to_json(p));
        supports.push_back(pts);
      }
      std::size_t cursor = 0;
      return json{{"kind", "tensor"},
                  {"supports", supports},
                  {"values", tensor_values_to_json(c.tensor_values(), c.tensor_supports(), 0, cursor)}};
    }
  }
  throw validation_error("cost_to_json: unknown kind");
}

CostSpec cost_from_json(const json& j) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "power_distance") return CostSpec::power_distance(j.at("p").get<double>());
  if (kind == "squared_sum_barycenter")
    return CostSpec::squared_sum_barycenter(j.at("n_marginals").get<std::size_t>());
  if (kind == "equality_indicator")
    return CostSpec::equality_indicator(j.at("equal_value").get<double>(),
                                        j.at("unequal_value").get<double>());
  if (kind == "tensor") {
    std::vector<std::vector<Point>> supports;
    for (const auto& sup : j.at("supports")) {
      std::vector<Point> pts;
      for (const auto& p : sup) pts.push_back(point_from_json(p));
      supports.push_back(std::move(pts));
    }
    std::vector<CostValue> values;
    tensor_values_from_json(j.at("values"), 0, supports.size(), values);
    return CostSpec::tensor(std::move(supports), std::move(values));
  }
  throw validation_error("cost_from_json: unknown kind '" + kind + "'");
}

json instance_to_json(const MotInstance& inst) {
  json marginals = json::array();
  for (const auto& m : inst.marginals) marginals.push_back(measure_to_json(m));
  return json{{"marginals", marginals},
              {"cost", cost_to_json(inst.cost)},
              {"objective", inst.objective == Objective::sum ? "sum" : "max"}};
}

MotInstance instance_from_json(const json& j) {
  MotInstance inst{{}, cost_from_json(j.at("cost")), Objective::sum};
  for (const auto& m : j.at("marginals")) inst.marginals.push_back(measure_from_json(m));
  const auto obj = j.at("objective").get<std::string>();
  if (obj == "sum")
    inst.objective = Objective::sum;
  else if (obj == "max")
    inst.objective = Objective::max;
  else
    throw validation_error("instance: objective must be \"sum\" or \"max\"");
  return inst;
}

json solution_to_json(const Solution& sol) {
  json out{{"plan", coupling_to_json(sol.plan)},
           {"value", value_or_inf(sol.value)},
           {"status", sol.status == SolutionStatus::optimal ? "optimal" : "infeasible_guard"}};
  if (sol.exact_value) out["exact_value"] = format_rational(*sol.exact_value);
  return out;
}

json certificate_to_json(const Certificate& cert) {
  json tuples = json::array();
  for (const auto& t : cert.tuples) {
    json tuple = json::array();
    for (const auto& p : t) tuple.push_back(point_to_json(p));
    tuples.push_back(tuple);
  }
  json perms = json::array();
  for (const auto& perm : cert.permutations) {
    json p = json::array();
    for (auto i : perm) p.push_back(i + 1);  // external format is 1-based
    perms.push_back(p);
  }
  return json{{"k", cert.tuples.size()},
              {"tuples", tuples},
              {"permutations", perms},
              {"before", value_or_inf(cert.before)},
              {"after", value_or_inf(cert.after)},
              {"aggregate", cert.aggregate == AggregateKind::sum ? "sum" : "max"}};
}

Certificate certificate_from_json(const json& j) {
  Certificate cert;
  for (const auto& t : j.at("tuples")) {
    std::vector<Point> tuple;
    for (const auto& p : t) tuple.push_back(point_from_json(p));
    cert.tuples.push_back(std::move(tuple));
  }
  for (const auto& perm : j.at("permutations")) {
    std::vector<std::size_t> p;
    for (const auto& i : perm) {
      std::size_t v = i.get<std::size_t>();
      if (v == 0 || v > cert.tuples.size())
        throw validation_error("certificate: permutation entry out of range");
      p.push_back(v - 1);
    }
    cert.permutations.push_back(std::move(p));
  }
  cert.before = value_from(j.at("before"), "certificate before");
  cert.after = value_from(j.at("after"), "certificate after");
  const auto agg = j.at("aggregate").get<std::string>();
  if (agg == "sum")
    cert.aggregate = AggregateKind::sum;
  else if (agg == "max")
    cert.aggregate = AggregateKind::max;
  else
    throw validation_error("certificate: aggregate must be \"sum\" or \"max\"");
  return cert;
}

json partition_to_json(const Partition& part) {
  json marginals = json::array();
  for (const auto& mp : part.marginals) {
    json cells = json::array();
    for (const auto& cell : mp.cells) {
      json box = json::array();
      for (const auto& [lo, hi] : cell.box) box.push_back(json::array({lo, hi}));
      cells.push_back(json{{"id", cell.id},
                           {"box", box},
                           {"representative", point_to_json(cell.representative)}});
    }
    marginals.push_back(json{{"space", space_to_json(mp.space)},
                             {"subdivisions", mp.subdivisions},
                             {"cells", cells}});
  }
  json nesting = json::array();
  for (const auto& per_marginal : part.nesting) {
    json pairs = json::array();
    for (const auto& [child, parent] : per_marginal) pairs.push_back(json::array({child, parent}));
    nesting.push_back(pairs);
  }
  return json{
      {"level", part.level}, {"delta", part.delta}, {"marginals", marginals}, {"nesting", nesting}};
}

json finite_optimality_to_json(const FiniteOptimalityReport& report) {
  json trials = json::array();
  for (const auto& t : report.trials)
    trials.push_back(json{{"l", t.l},
                          {"submeasure_value", value_or_inf(t.submeasure_value)},
                          {"optimal_value", value_or_inf(t.optimal_value)},
                          {"gap", value_or_inf(t.gap)},
                          {"pass", t.pass}});
  return json{{"all_pass", report.all_pass}, {"trials", trials}};
}

json gamma_run_to_json(const GammaRun& run) {
  json levels = json::array();
  for (const auto& row : run.levels) {
    json level{{"level", row.level},
               {"delta", row.delta},
               {"guard_refused", row.guard_refused}};
    if (!row.guard_refused) {
      level["alpha_support_size"] = row.alpha_support_size;
      level["min_value"] = value_or_inf(row.min_value);
      if (row.min_exact) level["min_exact"] = format_rational(*row.min_exact);
      level["objective"] = value_or_inf(row.objective_alpha);
      level["gap"] = value_or_inf(row.gap);
      level["gap_zero"] = row.gap_zero;
      level["minimizer_discrepancy"] = row.minimizer_discrepancy;
      json marginals = json::array();
      for (const auto& m : row.discretized_marginals) marginals.push_back(measure_to_json(m));
      level["discretized_marginals"] = marginals;
      if (row.minimizer) level["minimizer"] = coupling_to_json(*row.minimizer);
    }
    levels.push_back(std::move(level));
  }
  return json{{"complete", run.complete}, {"levels", levels}};
}

json verdict_to_json(const OptimalityVerdict& verdict) {
  const char* stage = "none";
  switch (verdict.failed_stage) {
    case VerdictStage::none: stage = "none"; break;
    case VerdictStage::monotonicity: stage = "monotonicity"; break;
    case VerdictStage::finite_optimality: stage = "finite_optimality"; break;
    case VerdictStage::gamma_gap: stage = "gamma_gap"; break;
  }
  json out{{"pass", verdict.pass}, {"failed_stage", stage}, {"detail", verdict.detail}};
  if (verdict.certificate) out["certificate"] = certificate_to_json(*verdict.certificate);
  if (verdict.audit) out["audit"] = finite_optimality_to_json(*verdict.audit);
  if (verdict.gamma) out["gamma"] = gamma_run_to_json(*verdict.gamma);
  return out;
}

json counterexample_to_json(const CounterexampleRun& run) {
  json out{{"alpha", run.alpha.label},
           {"alpha_value", run.alpha.value},
           {"m", run.m},
           {"k_max", run.k_max},
           {"sup_cost_rotation", value_or_inf(run.sup_cost_rotation)},
           {"solver_value_rotation_marginals", value_or_inf(run.solver_value_rotation_marginals)},
           {"solver_value_identity_fixture", value_or_inf(run.solver_value_identity_fixture)},
           {"expected_certificate", run.expected_certificate},
           {"matches_expectation", run.matches_expectation},
           {"note", run.note}};
  out["certificate"] = run.certificate ? certificate_to_json(*run.certificate) : json(nullptr);
  if (run.alpha.exact) out["alpha_exact"] = format_rational(*run.alpha.exact);
  return out;
}

json rationalized_to_json(const RationalizedPair& pair) {
  return json{{"a", coupling_to_json(pair.a)}, {"b", coupling_to_json(pair.b)}};
}

std::string convergence_csv(const std::vector<ConvergenceRow>& rows) {
  std::ostringstream out;
  out << "n,delta_n,discrepancy,objective,epsilon_envelope\n";
  for (const auto& r : rows)
    out << r.level << ',' << fmt(r.delta) << ',' << fmt(r.discrepancy) << ',' << fmt(r.objective)
        << ',' << fmt(r.epsilon_envelope) << '\n';
  return out.str();
}

std::string gamma_csv(const GammaRun& run) {
  std::ostringstream out;
  out << "level,delta,min_value,objective,gap,gap_zero,minimizer_discrepancy,guard_refused\n";
  for (const auto& row : run.levels)
    out << row.level << ',' << fmt(row.delta) << ',' << fmt(row.min_value) << ','
        << fmt(row.objective_alpha) << ',' << fmt(row.gap) << ',' << (row.gap_zero ? 1 : 0) << ','
        << fmt(row.minimizer_discrepancy) << ',' << (row.guard_refused ? 1 : 0) << '\n';
  return out.str();
}

DiscreteMeasure measure_with_mode(const DiscreteMeasure& m, WeightMode mode) {
  if (m.mode() == mode) return m;
  std::vector<WeightedPoint> atoms;
  atoms.reserve(m.size());
  if (mode == WeightMode::rational) {
    // Exact conversion, then renormalized so the mass is exactly 1.
    Rational total = 0;
    for (const auto& a : m.atoms()) total += rational_from_double(a.weight.flt());
    for (const auto& a : m.atoms())
      atoms.push_back({a.point, Weight::rational(rational_from_double(a.weight.flt()) / total)});
  } else {
    for (const auto& a : m.atoms()) atoms.push_back({a.point, Weight::floating(a.weight.as_double())});
  }
  return DiscreteMeasure(m.space(), mode, std::move(atoms));
}

DiscreteCoupling coupling_with_mode(const DiscreteCoupling& c, WeightMode mode) {
  if (c.mode() == mode) return c;
  std::vector<CouplingAtom> atoms;
  atoms.reserve(c.size());
  if (mode == WeightMode::rational) {
    Rational total = 0;
    for (const auto& a : c.atoms()) total += rational_from_double(a.weight.flt());
    if (c.mass_policy() == MassPolicy::positive_only) total = 1;
    for (const auto& a : c.atoms())
      atoms.push_back({a.tuple, Weight::rational(rational_from_double(a.weight.flt()) / total)});
  } else {
    for (const auto& a : c.atoms()) atoms.push_back({a.tuple, Weight::floating(a.weight.as_double())});
  }
  return DiscreteCoupling(c.spaces(), mode, std::move(atoms), c.mass_policy());
}

}  // namespace motcert::io
