#include "motcert/experiments.hpp"

#include <cmath>
#include <numeric>

namespace motcert {

GammaRun run_gamma_experiment(const DiscreteCoupling& gamma, const CostSpec& cost,
                              Objective objective, const std::vector<int>& levels,
                              const GuardConfig& guard) {
  if (levels.empty()) throw validation_error("run_gamma_experiment: levels must be nonempty");
  const bool exact = gamma.mode() == WeightMode::rational;

  std::vector<std::vector<Point>> supports;
  for (std::size_t k = 0; k < gamma.n_marginals(); ++k) {
    DiscreteMeasure m = marginal(gamma, k);
    std::vector<Point> pts;
    pts.reserve(m.size());
    for (const auto& a : m.atoms()) pts.push_back(a.point);
    supports.push_back(std::move(pts));
  }

  GammaRun run;
  run.complete = true;
  for (int n : levels) {
    GammaLevel row;
    row.level = n;
    try {
      Partition part = build_partition(gamma.spaces(), supports, n);
      row.delta = part.delta;
      DiscreteCoupling alpha = discretize_plan(gamma, part);
      row.alpha_support_size = alpha.size();
      MotInstance inst{{}, cost, objective};
      for (std::size_t k = 0; k < gamma.n_marginals(); ++k)
        inst.marginals.push_back(marginal(alpha, k));
      row.discretized_marginals = inst.marginals;

      Solution sol =
          objective == Objective::sum ? solve_integral_mot(inst, guard) : solve_sup_mot(inst, guard);
      row.min_value = sol.value;
      row.min_exact = sol.exact_value;
      if (objective == Objective::sum) {
        if (exact) {
          ExactCost alpha_val = integral_cost_exact(cost, alpha);
          row.objective_alpha = alpha_val.as_double();
          if (alpha_val.infinite || !sol.exact_value) {
            row.gap_zero = alpha_val.infinite && std::isinf(sol.value);
            row.gap = row.gap_zero ? 0.0 : kInfiniteCost;
          } else {
            Rational g = alpha_val.finite - *sol.exact_value;
            row.gap = rational_to_double(g);
            row.gap_zero = g == 0;
          }
        } else {
          row.objective_alpha = integral_cost(cost, alpha);
          row.gap = row.objective_alpha - row.min_value;
          row.gap_zero = std::abs(row.gap) <= 1e-9;
        }
      } else {
        row.objective_alpha = sup_cost(cost, alpha);
        row.gap = row.objective_alpha - row.min_value;
        row.gap_zero = exact ? row.objective_alpha == row.min_value : std::abs(row.gap) <= 1e-9;
      }
      row.minimizer_discrepancy = bl_discrepancy(sol.plan, gamma, 16);
      row.minimizer = std::move(sol.plan);
    } catch (const guard_exceeded&) {
      row.guard_refused = true;
      run.levels.push_back(std::move(row));
      run.complete = false;
      break;  // finer levels would refuse as well
    }
    run.levels.push_back(std::move(row));
  }
  return run;
}

OptimalityVerdict verify_optimality_theorem(const DiscreteCoupling& gamma, const CostSpec& cost,
                                            Objective objective, int k_max,
                                            const std::vector<int>& levels, std::size_t trials,
                                            std::uint64_t seed, const GuardConfig& guard) {
  OptimalityVerdict verdict;

  auto support = gamma.support();
  verdict.certificate = objective == Objective::sum ? check_cm(support, cost, k_max, guard)
                                                    : check_icm(support, cost, k_max, guard);
  if (verdict.certificate) {
    verdict.pass = false;
    verdict.failed_stage = VerdictStage::monotonicity;
    verdict.detail = "violation certificate with k = " +
                     std::to_string(verdict.certificate->tuples.size());
    return verdict;
  }

  verdict.audit = check_finite_optimality(gamma, cost, objective, trials,
                                          static_cast<std::size_t>(k_max), seed, guard);
  if (!verdict.audit->all_pass) {
    verdict.pass = false;
    verdict.failed_stage = VerdictStage::finite_optimality;
    for (const auto& t : verdict.audit->trials)
      if (!t.pass) {
        verdict.detail = "positive audit gap " + std::to_string(t.gap) +
                         " at submeasure size " + std::to_string(t.l);
        break;
      }
    return verdict;
  }

  verdict.gamma = run_gamma_experiment(gamma, cost, objective, levels, guard);
  if (!verdict.gamma->complete)
    throw guard_exceeded("verify_optimality_theorem: discretized solve refused by guard");
  for (const auto& row : verdict.gamma->levels) {
    if (!row.gap_zero) {
      verdict.pass = false;
      verdict.failed_stage = VerdictStage::gamma_gap;
      verdict.detail = "level " + std::to_string(row.level) + " gap " + std::to_string(row.gap);
      return verdict;
    }
  }
  verdict.pass = true;
  verdict.failed_stage = VerdictStage::none;
  verdict.detail = "all stages passed";
  return verdict;
}

AlphaSpec AlphaSpec::rational(const Rational& r) {
  AlphaSpec a;
  a.exact = r;
  a.value = rational_to_double(r);
  a.label = format_rational(r);
  return a;
}

AlphaSpec AlphaSpec::sqrt2_minus_one() {
  AlphaSpec a;
  a.value = std::sqrt(2.0) - 1.0;
  a.label = "sqrt2m1";
  return a;
}

AlphaSpec AlphaSpec::golden_conjugate() {
  AlphaSpec a;
  a.value = (std::sqrt(5.0) - 1.0) / 2.0;
  a.label = "golden";
  return a;
}

AlphaSpec AlphaSpec::parse(const std::string& token) {
  if (token == "sqrt2m1") return sqrt2_minus_one();
  if (token == "golden") return golden_conjugate();
  return rational(parse_rational(token));
}

DiscreteCoupling make_rotation_plan(const AlphaSpec& alpha, std::size_t m) {
  if (m < 2) throw validation_error("make_rotation_plan: m must be at least 2");
  std::vector<double> x(m);
  for (std::size_t i = 0; i < m; ++i) x[i] = static_cast<double>(i) / static_cast<double>(m);

  std::vector<double> y(m);
  if (alpha.exact) {
    Rational frac = *alpha.exact - Rational(rational_floor(*alpha.exact));
    BigInt p = numerator(frac), q = denominator(frac);
    BigInt shift_num = BigInt(m) * p;
    if (shift_num % q == 0) {
      auto s = static_cast<std::size_t>(BigInt((shift_num / q) % m).template convert_to<unsigned long long>());
      for (std::size_t i = 0; i < m; ++i) y[i] = x[(i + s) % m];
    } else {
      BigInt den = BigInt(m) * q;
      for (std::size_t i = 0; i < m; ++i) {
        BigInt num = (BigInt(i) * q + p * BigInt(m)) % den;
        y[i] = rational_to_double(Rational(num, den));
      }
    }
  } else {
    for (std::size_t i = 0; i < m; ++i) {
      long double v = std::fmod(static_cast<long double>(i) / static_cast<long double>(m) +
                                    static_cast<long double>(alpha.value),
                                1.0L);
      y[i] = static_cast<double>(v);
    }
  }

  Weight w = Weight::rational(Rational(1, static_cast<long>(m)));
  std::vector<CouplingAtom> atoms;
  atoms.reserve(m);
  for (std::size_t i = 0; i < m; ++i) atoms.push_back({{Point{x[i]}, Point{y[i]}}, w});
  return DiscreteCoupling({FactorSpace::unit_interval(), FactorSpace::unit_interval()},
                          WeightMode::rational, std::move(atoms));
}

CounterexampleRun run_counterexample(const AlphaSpec& alpha, std::size_t m, int k_max,
                                     const GuardConfig& guard) {
  if (m < 2) throw validation_error("run_counterexample: m must be at least 2");
  if (k_max < 2) throw validation_error("run_counterexample: k_max must be at least 2");

  CounterexampleRun run;
  run.alpha = alpha;
  run.m = m;
  run.k_max = k_max;

  DiscreteCoupling plan = make_rotation_plan(alpha, m);
  CostSpec cost = CostSpec::equality_indicator(1.0, 2.0);
  run.certificate = check_icm(plan.support(), cost, k_max, guard);
  run.sup_cost_rotation = sup_cost(cost, plan);

  DiscreteMeasure mu = marginal(plan, 0);
  DiscreteMeasure nu = marginal(plan, 1);
  run.solver_value_rotation_marginals =
      solve_sup_mot({{mu, nu}, cost, Objective::max}, guard).value;
  run.solver_value_identity_fixture = solve_sup_mot({{mu, mu}, cost, Objective::max}, guard).value;

  // When does a cycle close? Only a whole-grid-step rational shift can ever
  // bring second coordinates back onto the grid.
  bool identity_rotation = false;
  std::size_t cycle = 0;
  if (alpha.exact) {
    Rational frac = *alpha.exact - Rational(rational_floor(*alpha.exact));
    BigInt p = numerator(frac), q = denominator(frac);
    BigInt shift_num = BigInt(m) * p;
    if (shift_num % q == 0) {
      auto s = static_cast<std::size_t>(BigInt((shift_num / q) % m).template convert_to<unsigned long long>());
      if (s == 0)
        identity_rotation = true;
      else
        cycle = m / std::gcd(m, s);
    }
  }
  run.expected_certificate = cycle > 0 && cycle <= static_cast<std::size_t>(k_max);

  bool ok = run.certificate.has_value() == run.expected_certificate;
  if (run.expected_certificate && run.certificate)
    ok = ok && run.certificate->before == 2.0 && run.certificate->after == 1.0 &&
         run.certificate->tuples.size() == cycle;
  double expected_sup = identity_rotation ? 1.0 : 2.0;
  ok = ok && run.sup_cost_rotation == expected_sup;
  run.matches_expectation = ok;
  run.note = identity_rotation ? "rotation is the identity"
             : run.expected_certificate
                 ? "cycle closes at k = " + std::to_string(cycle)
                 : (alpha.exact ? "cycle longer than k_max or off-grid shift" : "irrational angle");
  return run;
}

}  // namespace motcert
