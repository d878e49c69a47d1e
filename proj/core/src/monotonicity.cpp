#include "motcert/monotonicity.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <queue>

namespace motcert {

namespace {

/// Cost lookup on reassembled tuples, indexed by one support index per slot.
/// Eagerly cached when the table fits; the caches stay small under the
/// exhaustive-search guards (support <= 60, N <= 3).
class ReassignedCost {
 public:
  ReassignedCost(const std::vector<std::vector<Point>>& support, const CostSpec& cost)
      : support_(support), cost_(cost), n_(support[0].size()), s_(support.size()) {
    std::size_t cells = 1;
    bool fits = true;
    for (std::size_t k = 0; k < n_; ++k) {
      if (cells > kCacheLimit / s_) {
        fits = false;
        break;
      }
      cells *= s_;
    }
    if (fits) {
      cache_.resize(cells, std::numeric_limits<double>::quiet_NaN());
      cached_ = true;
    }
  }

  double operator()(const std::vector<std::size_t>& pick) const {
    if (cached_) {
      std::size_t flat = 0;
      for (std::size_t k = 0; k < n_; ++k) flat = flat * s_ + pick[k];
      double& slot = cache_[flat];
      if (std::isnan(slot)) slot = evaluate(pick);
      return slot;
    }
    return evaluate(pick);
  }

 private:
  static constexpr std::size_t kCacheLimit = 1u << 22;

  double evaluate(const std::vector<std::size_t>& pick) const {
    std::vector<Point> tuple(n_);
    for (std::size_t k = 0; k < n_; ++k) tuple[k] = support_[pick[k]][k];
    return eval_cost(cost_, tuple, WeightMode::rational);
  }

  const std::vector<std::vector<Point>>& support_;
  const CostSpec& cost_;
  std::size_t n_, s_;
  mutable std::vector<double> cache_;
  bool cached_ = false;
};

struct Aggregate {
  bool infinite = false;
  double value = 0.0;
};

Aggregate aggregate_of(const std::vector<double>& costs, AggregateKind kind) {
  Aggregate out;
  if (kind == AggregateKind::max) {
    out.value = -std::numeric_limits<double>::infinity();
    for (double c : costs) out.value = std::max(out.value, c);
    if (std::isinf(out.value) && out.value > 0) out.infinite = true;
    return out;
  }
  for (double c : costs) {
    if (std::isinf(c)) {
      out.infinite = true;
      out.value = std::numeric_limits<double>::infinity();
      return out;
    }
    out.value += c;
  }
  return out;
}

Rational exact_sum(const std::vector<double>& costs) {
  Rational s = 0;
  for (double c : costs) s += rational_from_double(c);
  return s;
}

/// Strict after < before, exact for sum aggregates: a floating screen with a
/// margin, exact rational tie-break inside the margin band.
bool strictly_improves(const std::vector<double>& before, const std::vector<double>& after,
                       AggregateKind kind) {
  Aggregate b = aggregate_of(before, kind);
  Aggregate a = aggregate_of(after, kind);
  if (a.infinite) return false;
  if (b.infinite) return true;
  if (kind == AggregateKind::max) return a.value < b.value;
  double margin = 1e-12 * std::max(1.0, std::abs(a.value) + std::abs(b.value));
  double diff = a.value - b.value;
  if (diff < -margin) return exact_sum(after) < exact_sum(before);
  if (diff > margin) return false;
  return exact_sum(after) < exact_sum(before);
}

std::pair<double, double> stored_aggregates(const std::vector<double>& before,
                                            const std::vector<double>& after, AggregateKind kind) {
  Aggregate b = aggregate_of(before, kind);
  Aggregate a = aggregate_of(after, kind);
  if (kind == AggregateKind::max || b.infinite || a.infinite) return {b.value, a.value};
  return {rational_to_double(exact_sum(before)), rational_to_double(exact_sum(after))};
}

/// Advances a non-decreasing index sequence (a multiset over 0..s-1) to its
/// lexicographic successor.
bool next_multiset(std::vector<std::size_t>& idx, std::size_t s) {
  std::size_t k = idx.size();
  for (std::size_t p = k; p-- > 0;) {
    if (idx[p] + 1 < s) {
      ++idx[p];
      for (std::size_t q = p + 1; q < k; ++q) idx[q] = idx[p];
      return true;
    }
  }
  return false;
}

bool next_permutation_tuple(std::vector<std::vector<std::size_t>>& perms) {
  for (std::size_t slot = perms.size(); slot-- > 0;) {
    if (std::next_permutation(perms[slot].begin(), perms[slot].end())) return true;
    // wrapped back to identity; carry into the previous slot
  }
  return false;
}

std::optional<Certificate> search_violation(const std::vector<std::vector<Point>>& support,
                                            const CostSpec& cost, int k_max, AggregateKind kind,
                                            const GuardConfig& guard) {
  if (k_max < 2) throw validation_error("monotonicity check: k_max must be at least 2");
  if (support.empty()) throw validation_error("monotonicity check: empty support");
  const std::size_t n = support[0].size();
  if (n < 2) throw validation_error("monotonicity check: tuples need at least two components");
  for (const auto& t : support)
    if (t.size() != n) throw validation_error("monotonicity check: ragged support tuples");
  if (cost.n_marginals() != n)
    throw validation_error("monotonicity check: cost marginal count mismatch");
  if (n > guard.max_search_marginals)
    throw guard_exceeded("monotonicity check: marginal count beyond exhaustive-search guard");
  if (support.size() > guard.max_search_support)
    throw guard_exceeded("monotonicity check: support size beyond exhaustive-search guard");
  if (k_max > guard.max_cycle_length)
    throw guard_exceeded("monotonicity check: k_max beyond exhaustive-search guard");

  const std::size_t s = support.size();
  ReassignedCost cost_of(support, cost);
  std::uint64_t evals = 0;

  std::vector<std::size_t> pick(n);
  for (int k = 1; k <= k_max; ++k) {
    std::vector<std::size_t> chosen(static_cast<std::size_t>(k), 0);
    do {
      std::vector<double> before(static_cast<std::size_t>(k));
      for (int i = 0; i < k; ++i) {
        std::fill(pick.begin(), pick.end(), chosen[static_cast<std::size_t>(i)]);
        before[static_cast<std::size_t>(i)] = cost_of(pick);
      }
      evals += static_cast<std::uint64_t>(k);

      std::vector<std::vector<std::size_t>> perms(n - 1, std::vector<std::size_t>(k));
      for (auto& p : perms)
        for (int i = 0; i < k; ++i) p[static_cast<std::size_t>(i)] = static_cast<std::size_t>(i);
      std::vector<double> after(static_cast<std::size_t>(k));
      do {
        for (int i = 0; i < k; ++i) {
          pick[0] = chosen[static_cast<std::size_t>(i)];
          for (std::size_t slot = 1; slot < n; ++slot)
            pick[slot] = chosen[perms[slot - 1][static_cast<std::size_t>(i)]];
          after[static_cast<std::size_t>(i)] = cost_of(pick);
        }
        evals += static_cast<std::uint64_t>(k);
        if (evals > guard.max_certificate_evals)
          throw guard_exceeded("monotonicity check: evaluation cap exceeded");
        if (strictly_improves(before, after, kind)) {
          Certificate cert;
          cert.aggregate = kind;
          for (int i = 0; i < k; ++i) cert.tuples.push_back(support[chosen[static_cast<std::size_t>(i)]]);
          cert.permutations = perms;
          auto [b, a] = stored_aggregates(before, after, kind);
          cert.before = b;
          cert.after = a;
          return cert;
        }
      } while (next_permutation_tuple(perms));
    } while (next_multiset(chosen, s));
  }
  return std::nullopt;
}

}  // namespace

std::optional<Certificate> check_cm(const std::vector<std::vector<Point>>& support,
                                    const CostSpec& cost, int k_max, const GuardConfig& guard) {
  return search_violation(support, cost, k_max, AggregateKind::sum, guard);
}

std::optional<Certificate> check_icm(const std::vector<std::vector<Point>>& support,
                                     const CostSpec& cost, int k_max, const GuardConfig& guard) {
  return search_violation(support, cost, k_max, AggregateKind::max, guard);
}

std::pair<double, double> recompute_certificate(const Certificate& cert, const CostSpec& cost) {
  const std::size_t k = cert.tuples.size();
  const std::size_t n = cert.tuples.empty() ? 0 : cert.tuples[0].size();
  if (cert.permutations.size() + 1 != n)
    throw validation_error("recompute_certificate: permutation count != N-1");
  std::vector<double> before(k), after(k);
  std::vector<Point> tuple(n);
  for (std::size_t i = 0; i < k; ++i)
    before[i] = eval_cost(cost, cert.tuples[i], WeightMode::rational);
  for (std::size_t i = 0; i < k; ++i) {
    tuple[0] = cert.tuples[i][0];
    for (std::size_t slot = 1; slot < n; ++slot) {
      std::size_t j = cert.permutations[slot - 1][i];
      if (j >= k) throw validation_error("recompute_certificate: permutation entry out of range");
      tuple[slot] = cert.tuples[j][slot];
    }
    after[i] = eval_cost(cost, tuple, WeightMode::rational);
  }
  return stored_aggregates(before, after, cert.aggregate);
}

IntegerTable expand_to_table(const DiscreteCoupling& m) {
  IntegerTable table;
  for (std::size_t a = 0; a < m.size(); ++a) {
    const auto& atom = m.atoms()[a];
    if (!atom.weight.is_integer() || !atom.weight.is_positive())
      throw validation_error("expand_to_table: weights must be positive integers");
    std::size_t mult;
    if (atom.weight.mode() == WeightMode::rational)
      mult = numerator(atom.weight.rat()).template convert_to<std::size_t>();
    else
      mult = static_cast<std::size_t>(std::llround(atom.weight.flt()));
    for (std::size_t r = 0; r < mult; ++r) {
      table.rows.push_back(atom.tuple);
      table.atom_index.push_back(a);
    }
  }
  return table;
}

std::optional<std::vector<std::vector<std::size_t>>> find_permutations(const IntegerTable& a,
                                                                       const IntegerTable& b) {
  const std::size_t rows = a.rows.size();
  if (b.rows.size() != rows) throw validation_error("find_permutations: row-count mismatch");
  if (rows == 0) return std::vector<std::vector<std::size_t>>{};
  const std::size_t n = a.rows[0].size();

  // Align B's rows with A's first column by occurrence order.
  std::map<Point, std::queue<std::size_t>> by_first;
  for (std::size_t i = 0; i < rows; ++i) by_first[b.rows[i][0]].push(i);
  std::vector<std::size_t> b_order(rows);
  for (std::size_t i = 0; i < rows; ++i) {
    auto it = by_first.find(a.rows[i][0]);
    if (it == by_first.end() || it->second.empty()) return std::nullopt;
    b_order[i] = it->second.front();
    it->second.pop();
  }

  // Column k >= 1: match each aligned B value to an unused A row carrying it.
  std::vector<std::vector<std::size_t>> perms;
  perms.reserve(n - 1);
  for (std::size_t k = 1; k < n; ++k) {
    std::map<Point, std::queue<std::size_t>> pool;
    for (std::size_t i = 0; i < rows; ++i) pool[a.rows[i][k]].push(i);
    std::vector<std::size_t> sigma(rows);
    for (std::size_t i = 0; i < rows; ++i) {
      const Point& want = b.rows[b_order[i]][k];
      auto it = pool.find(want);
      if (it == pool.end() || it->second.empty()) return std::nullopt;
      sigma[i] = it->second.front();
      it->second.pop();
    }
    perms.push_back(std::move(sigma));
  }
  return perms;
}

std::vector<std::vector<Point>> reassigned_rows(const IntegerTable& a,
                                                const std::vector<std::vector<std::size_t>>& perms) {
  const std::size_t rows = a.rows.size();
  const std::size_t n = rows == 0 ? perms.size() + 1 : a.rows[0].size();
  std::vector<std::vector<Point>> out(rows, std::vector<Point>(n));
  for (std::size_t i = 0; i < rows; ++i) {
    out[i][0] = a.rows[i][0];
    for (std::size_t k = 1; k < n; ++k) out[i][k] = a.rows[perms[k - 1][i]][k];
  }
  return out;
}

FiniteOptimalityReport check_finite_optimality(const DiscreteCoupling& plan, const CostSpec& cost,
                                               Objective objective, std::size_t trials,
                                               std::size_t l_max, std::uint64_t seed,
                                               const GuardConfig& guard) {
  if (trials == 0) throw validation_error("check_finite_optimality: needs at least one trial");
  if (l_max < 1) throw validation_error("check_finite_optimality: l_max must be positive");
  FiniteOptimalityReport report;
  report.all_pass = true;
  const std::size_t n_atoms = plan.size();
  const bool exact = plan.mode() == WeightMode::rational;
  for (std::size_t t = 0; t < trials; ++t) {
    std::size_t l = l_max < 2 ? l_max : 2 + (t % (l_max - 1));
    l = std::min(l, n_atoms);
    DiscreteCoupling sub = sample_submeasure(plan, l, seed + t);

    MotInstance inst{{}, cost, objective};
    std::size_t cells = 1;
    for (std::size_t k = 0; k < sub.n_marginals(); ++k) {
      inst.marginals.push_back(marginal(sub, k));
      cells *= inst.marginals.back().size();
    }
    if (cells > guard.max_audit_cells)
      throw guard_exceeded("check_finite_optimality: per-trial product support too large");

    FiniteOptimalityTrial trial;
    trial.l = l;
    if (objective == Objective::sum) {
      Solution sol = solve_integral_mot(inst, guard);
      trial.optimal_value = sol.value;
      if (exact) {
        ExactCost sub_val = integral_cost_exact(cost, sub);
        trial.submeasure_value = sub_val.as_double();
        if (sub_val.infinite || !sol.exact_value.has_value()) {
          trial.pass = sub_val.infinite && std::isinf(sol.value);
          trial.gap = trial.pass ? 0.0 : kInfiniteCost;
        } else {
          Rational gap = sub_val.finite - *sol.exact_value;
          trial.gap = rational_to_double(gap);
          trial.pass = gap <= 0;
        }
      } else {
        trial.submeasure_value = integral_cost(cost, sub);
        trial.gap = trial.submeasure_value - trial.optimal_value;
        trial.pass = trial.gap <= 1e-9;
      }
    } else {
      Solution sol = solve_sup_mot(inst, guard);
      trial.optimal_value = sol.value;
      trial.submeasure_value = sup_cost(cost, sub);
      trial.gap = trial.submeasure_value - trial.optimal_value;
      trial.pass = exact ? trial.submeasure_value <= trial.optimal_value : trial.gap <= 1e-9;
    }
    report.all_pass = report.all_pass && trial.pass;
    report.trials.push_back(trial);
  }
  return report;
}

}  // namespace motcert
