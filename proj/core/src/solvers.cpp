#include "motcert/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "maxflow.hpp"
#include "simplex.hpp"

namespace motcert {

namespace {

struct ProductCells {
  std::vector<std::vector<std::size_t>> index;  // cell -> per-marginal atom index
  std::vector<CostValue> cost;                  // aligned with index
};

WeightMode common_mode(const MotInstance& inst) {
  if (inst.marginals.size() < 2) throw validation_error("MotInstance: needs at least two marginals");
  WeightMode mode = inst.marginals[0].mode();
  for (const auto& m : inst.marginals)
    if (m.mode() != mode) throw mode_mismatch("MotInstance: marginals mix weight modes");
  return mode;
}

std::size_t cell_count_guarded(const MotInstance& inst, const GuardConfig& guard) {
  std::size_t cells = 1;
  for (const auto& m : inst.marginals) {
    if (cells > guard.max_product_cells / std::max<std::size_t>(m.size(), 1))
      throw guard_exceeded("solver: product support exceeds max_product_cells");
    cells *= m.size();
  }
  if (cells > guard.max_product_cells)
    throw guard_exceeded("solver: product support exceeds max_product_cells");
  return cells;
}

ProductCells enumerate_cells(const MotInstance& inst, WeightMode mode, std::size_t cells) {
  const std::size_t n = inst.marginals.size();
  ProductCells out;
  out.index.reserve(cells);
  out.cost.reserve(cells);
  std::vector<std::size_t> idx(n, 0);
  std::vector<Point> tuple(n);
  for (std::size_t k = 0; k < n; ++k) tuple[k] = inst.marginals[k].atoms()[0].point;
  while (true) {
    out.index.push_back(idx);
    out.cost.push_back(eval_cost(inst.cost, tuple, mode));
    // odometer, last marginal fastest
    std::size_t k = n;
    while (k > 0) {
      --k;
      if (++idx[k] < inst.marginals[k].size()) {
        tuple[k] = inst.marginals[k].atoms()[idx[k]].point;
        break;
      }
      idx[k] = 0;
      tuple[k] = inst.marginals[k].atoms()[0].point;
      if (k == 0) return out;
    }
  }
}

std::vector<Point> cell_tuple(const MotInstance& inst, const std::vector<std::size_t>& idx) {
  std::vector<Point> tuple(idx.size());
  for (std::size_t k = 0; k < idx.size(); ++k) tuple[k] = inst.marginals[k].atoms()[idx[k]].point;
  return tuple;
}

/// Independent product coupling; always feasible, used as the witness when the
/// optimum is +infinity.
DiscreteCoupling product_coupling(const MotInstance& inst, WeightMode mode) {
  std::size_t cells = 1;
  for (const auto& m : inst.marginals) cells *= m.size();
  std::vector<CouplingAtom> atoms;
  atoms.reserve(cells);
  const std::size_t n = inst.marginals.size();
  std::vector<std::size_t> idx(n, 0);
  while (true) {
    Weight w = mode == WeightMode::rational ? Weight::rational(Rational(1)) : Weight::floating(1.0);
    for (std::size_t k = 0; k < n; ++k) w = w * inst.marginals[k].atoms()[idx[k]].weight;
    atoms.push_back({cell_tuple(inst, idx), w});
    std::size_t k = n;
    bool done = true;
    while (k > 0) {
      --k;
      if (++idx[k] < inst.marginals[k].size()) {
        done = false;
        break;
      }
      idx[k] = 0;
    }
    if (done) break;
  }
  std::vector<FactorSpace> spaces;
  for (const auto& m : inst.marginals) spaces.push_back(m.space());
  return DiscreteCoupling(std::move(spaces), mode, std::move(atoms));
}

template <class T>
T weight_as(const Weight& w);

template <>
Rational weight_as<Rational>(const Weight& w) {
  return w.rat();
}

template <>
double weight_as<double>(const Weight& w) {
  return w.flt();
}

template <class T>
Weight make_weight(const T& v);

template <>
Weight make_weight<Rational>(const Rational& v) {
  return Weight::rational(v);
}

template <>
Weight make_weight<double>(const double& v) {
  return Weight::floating(v);
}

/// Marginal constraint system over the listed cells: one row per (marginal,
/// atom), one column per cell.
template <class T>
void marginal_system(const MotInstance& inst, const ProductCells& cells,
                     const std::vector<std::size_t>& active,
                     std::vector<std::vector<T>>& a, std::vector<T>& b) {
  const std::size_t n = inst.marginals.size();
  std::size_t rows = 0;
  for (const auto& m : inst.marginals) rows += m.size();
  a.assign(rows, std::vector<T>(active.size(), T{}));
  b.clear();
  b.reserve(rows);
  std::size_t row0 = 0;
  for (std::size_t k = 0; k < n; ++k) {
    for (const auto& atom : inst.marginals[k].atoms()) b.push_back(weight_as<T>(atom.weight));
    for (std::size_t col = 0; col < active.size(); ++col)
      a[row0 + cells.index[active[col]][k]][col] = T{1};
    row0 += inst.marginals[k].size();
  }
}

template <class T>
DiscreteCoupling plan_from_solution(const MotInstance& inst, const ProductCells& cells,
                                    const std::vector<std::size_t>& active, const std::vector<T>& x,
                                    WeightMode mode) {
  std::vector<CouplingAtom> atoms;
  for (std::size_t col = 0; col < active.size(); ++col) {
    bool keep;
    if constexpr (detail::FieldTraits<T>::exact)
      keep = x[col] > 0;
    else
      keep = x[col] > 1e-12;
    if (keep) atoms.push_back({cell_tuple(inst, cells.index[active[col]]), make_weight<T>(x[col])});
  }
  if constexpr (!detail::FieldTraits<T>::exact) {
    // Renormalize floating solutions so the probability invariant holds exactly
    // at the 1e-12 validation tolerance.
    double total = 0.0;
    for (const auto& a : atoms) total += a.weight.flt();
    for (auto& a : atoms) a.weight = Weight::floating(a.weight.flt() / total);
  }
  std::vector<FactorSpace> spaces;
  for (const auto& m : inst.marginals) spaces.push_back(m.space());
  return DiscreteCoupling(std::move(spaces), mode, std::move(atoms));
}

template <class T>
Solution solve_integral_impl(const MotInstance& inst, const ProductCells& cells, WeightMode mode) {
  std::vector<std::size_t> active;
  for (std::size_t i = 0; i < cells.cost.size(); ++i)
    if (!std::isinf(cells.cost[i])) active.push_back(i);

  if (!active.empty()) {
    std::vector<std::vector<T>> a;
    std::vector<T> b;
    marginal_system<T>(inst, cells, active, a, b);
    std::vector<T> c;
    c.reserve(active.size());
    for (auto i : active) {
      if constexpr (detail::FieldTraits<T>::exact)
        c.push_back(rational_from_double(cells.cost[i]));
      else
        c.push_back(cells.cost[i]);
    }
    auto res = detail::solve_equality_lp<T>(std::move(a), std::move(b), std::move(c));
    if (res.status == detail::LpStatus::optimal) {
      Solution sol{plan_from_solution<T>(inst, cells, active, res.x, mode)};
      if constexpr (detail::FieldTraits<T>::exact) {
        sol.exact_value = res.value;
        sol.value = rational_to_double(res.value);
      } else {
        sol.value = res.value;
      }
      sol.status = SolutionStatus::optimal;
      return sol;
    }
  }
  // Every coupling must charge an infinite-cost cell.
  Solution sol{product_coupling(inst, mode)};
  sol.value = kInfiniteCost;
  sol.status = SolutionStatus::optimal;
  return sol;
}

template <class T>
struct FeasibilityVector {
  bool feasible = false;
  std::vector<T> x;  // over the allowed columns
};

template <class T>
FeasibilityVector<T> feasibility_vector(const MotInstance& inst, const ProductCells& cells,
                                        const std::vector<std::size_t>& allowed) {
  if (allowed.empty()) return {false, {}};
  const std::size_t n = inst.marginals.size();
  if (n == 2) {
    // Bipartite saturation check: feasible iff max flow moves the whole unit
    // mass, the finite analogue of a Hall condition.
    const std::size_t m1 = inst.marginals[0].size();
    const std::size_t m2 = inst.marginals[1].size();
    detail::MaxFlow<T> flow(m1 + m2 + 2);
    const std::size_t src = m1 + m2, snk = m1 + m2 + 1;
    for (std::size_t i = 0; i < m1; ++i)
      flow.add_edge(src, i, weight_as<T>(inst.marginals[0].atoms()[i].weight));
    for (std::size_t j = 0; j < m2; ++j)
      flow.add_edge(m1 + j, snk, weight_as<T>(inst.marginals[1].atoms()[j].weight));
    std::vector<std::size_t> edge_ids(allowed.size());
    for (std::size_t col = 0; col < allowed.size(); ++col) {
      const auto& idx = cells.index[allowed[col]];
      edge_ids[col] = flow.add_edge(idx[0], m1 + idx[1], T{1});
    }
    T value = flow.run(src, snk);
    bool feasible;
    if constexpr (detail::FieldTraits<T>::exact)
      feasible = value == Rational(1);
    else
      feasible = value >= 1.0 - 1e-9;
    if (!feasible) return {false, {}};
    std::vector<T> x(allowed.size());
    for (std::size_t col = 0; col < allowed.size(); ++col) x[col] = flow.flow_on(edge_ids[col]);
    return {true, std::move(x)};
  }
  std::vector<std::vector<T>> a;
  std::vector<T> b;
  marginal_system<T>(inst, cells, allowed, a, b);
  std::vector<T> zero(allowed.size(), T{});
  auto res = detail::solve_equality_lp<T>(std::move(a), std::move(b), std::move(zero));
  if (res.status != detail::LpStatus::optimal) return {false, {}};
  return {true, std::move(res.x)};
}

template <class T>
FeasibilityResult feasibility_impl(const MotInstance& inst, const ProductCells& cells,
                                   const std::vector<std::size_t>& allowed, WeightMode mode) {
  auto vec = feasibility_vector<T>(inst, cells, allowed);
  if (!vec.feasible) return {false, std::nullopt};
  return {true, plan_from_solution<T>(inst, cells, allowed, vec.x, mode)};
}

/// Lexicographic profile refinement inside {c <= t*}: walking the distinct
/// levels downward, pin the minimal achievable mass at each level. The result
/// admits no reassignment lowering the max over any selected subset. Levels
/// the incumbent already avoids entirely pin to zero without an LP, so the
/// number of solves is bounded by the incumbents' support levels.
template <class T>
DiscreteCoupling refine_bottleneck_plan(const MotInstance& inst, const ProductCells& cells,
                                        const std::vector<std::size_t>& allowed, WeightMode mode,
                                        std::vector<T> incumbent, const GuardConfig& guard) {
  std::vector<double> levels;
  for (auto i : allowed) levels.push_back(cells.cost[i]);
  std::sort(levels.begin(), levels.end(), std::greater<>());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  // The lowest level's mass is forced once every higher level is pinned, so
  // its round is redundant; a single-level set needs no refinement at all.
  if (!levels.empty()) levels.pop_back();

  const T zero_tol = detail::FieldTraits<T>::exact ? T{} : T(1e-12);
  std::vector<double> fixed_levels;
  std::vector<T> fixed_mass;
  std::size_t solves = 0;
  for (double v : levels) {
    T incumbent_mass{};
    for (std::size_t col = 0; col < allowed.size(); ++col)
      if (cells.cost[allowed[col]] == v) incumbent_mass += incumbent[col];
    if (incumbent_mass <= zero_tol) {
      // the incumbent certifies the minimum is zero here
      fixed_levels.push_back(v);
      fixed_mass.push_back(T{});
      continue;
    }
    if (++solves > guard.max_level_refinements) break;
    std::vector<std::vector<T>> a;
    std::vector<T> b;
    marginal_system<T>(inst, cells, allowed, a, b);
    for (std::size_t f = 0; f < fixed_levels.size(); ++f) {
      std::vector<T> row(allowed.size(), T{});
      for (std::size_t col = 0; col < allowed.size(); ++col)
        if (cells.cost[allowed[col]] == fixed_levels[f]) row[col] = T{1};
      a.push_back(std::move(row));
      b.push_back(fixed_mass[f]);
    }
    std::vector<T> c(allowed.size(), T{});
    for (std::size_t col = 0; col < allowed.size(); ++col)
      if (cells.cost[allowed[col]] == v) c[col] = T{1};
    auto res = detail::solve_equality_lp<T>(std::move(a), std::move(b), std::move(c));
    if (res.status != detail::LpStatus::optimal) break;  // cannot happen on a feasible level set
    fixed_levels.push_back(v);
    fixed_mass.push_back(res.value);
    incumbent = std::move(res.x);
  }
  return plan_from_solution<T>(inst, cells, allowed, incumbent, mode);
}

std::vector<std::size_t> cells_at_most(const ProductCells& cells, CostValue t) {
  std::vector<std::size_t> allowed;
  for (std::size_t i = 0; i < cells.cost.size(); ++i)
    if (cells.cost[i] <= t) allowed.push_back(i);
  return allowed;
}

}  // namespace

Solution solve_integral_mot(const MotInstance& inst, const GuardConfig& guard) {
  if (inst.objective != Objective::sum)
    throw validation_error("solve_integral_mot: instance objective must be sum");
  WeightMode mode = common_mode(inst);
  std::size_t n_cells = cell_count_guarded(inst, guard);
  ProductCells cells = enumerate_cells(inst, mode, n_cells);
  return mode == WeightMode::rational ? solve_integral_impl<Rational>(inst, cells, mode)
                                      : solve_integral_impl<double>(inst, cells, mode);
}

FeasibilityResult feasibility_at_level(const MotInstance& inst, CostValue t,
                                       const GuardConfig& guard) {
  WeightMode mode = common_mode(inst);
  std::size_t n_cells = cell_count_guarded(inst, guard);
  ProductCells cells = enumerate_cells(inst, mode, n_cells);
  auto allowed = cells_at_most(cells, t);
  return mode == WeightMode::rational ? feasibility_impl<Rational>(inst, cells, allowed, mode)
                                      : feasibility_impl<double>(inst, cells, allowed, mode);
}

Solution solve_sup_mot(const MotInstance& inst, const GuardConfig& guard) {
  if (inst.objective != Objective::max)
    throw validation_error("solve_sup_mot: instance objective must be max");
  WeightMode mode = common_mode(inst);
  std::size_t n_cells = cell_count_guarded(inst, guard);
  ProductCells cells = enumerate_cells(inst, mode, n_cells);

  std::vector<double> levels;
  for (double v : cells.cost)
    if (!std::isinf(v)) levels.push_back(v);
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());

  auto feasible_at = [&](CostValue t) {
    auto allowed = cells_at_most(cells, t);
    return mode == WeightMode::rational
               ? feasibility_vector<Rational>(inst, cells, allowed).feasible
               : feasibility_vector<double>(inst, cells, allowed).feasible;
  };

  bool top_feasible = false;
  if (!levels.empty()) top_feasible = feasible_at(levels.back());
  if (!top_feasible) {
    // Only plans charging infinite-cost cells exist.
    Solution sol{product_coupling(inst, mode)};
    sol.value = kInfiniteCost;
    sol.status = SolutionStatus::optimal;
    return sol;
  }

  std::size_t lo = 0, hi = levels.size() - 1;
  while (lo < hi) {
    std::size_t mid = lo + (hi - lo) / 2;
    if (feasible_at(levels[mid]))
      hi = mid;
    else
      lo = mid + 1;
  }
  CostValue t_star = levels[lo];
  auto allowed = cells_at_most(cells, t_star);
  auto refined = [&]() -> DiscreteCoupling {
    if (mode == WeightMode::rational) {
      auto witness = feasibility_vector<Rational>(inst, cells, allowed);
      return refine_bottleneck_plan<Rational>(inst, cells, allowed, mode, std::move(witness.x),
                                              guard);
    }
    auto witness = feasibility_vector<double>(inst, cells, allowed);
    return refine_bottleneck_plan<double>(inst, cells, allowed, mode, std::move(witness.x), guard);
  };
  Solution sol{refined()};
  sol.value = t_star;
  if (mode == WeightMode::rational) sol.exact_value = rational_from_double(t_star);
  sol.status = SolutionStatus::optimal;
  return sol;
}

Solution brute_force_oracle(const MotInstance& inst) {
  WeightMode mode = common_mode(inst);
  if (inst.marginals.size() != 2)
    throw validation_error("brute_force_oracle: two-marginal instances only");
  const auto& mu = inst.marginals[0];
  const auto& nu = inst.marginals[1];
  const std::size_t m = mu.size();
  if (nu.size() != m) throw validation_error("brute_force_oracle: marginals must have equal size");
  if (m > 7) throw validation_error("brute_force_oracle: supports larger than 7 atoms");
  for (const auto& meas : inst.marginals)
    for (const auto& atom : meas.atoms()) {
      if (mode == WeightMode::rational) {
        if (atom.weight.rat() != Rational(1, static_cast<long>(m)))
          throw validation_error("brute_force_oracle: weights must be uniform 1/m");
      } else if (std::abs(atom.weight.flt() - 1.0 / static_cast<double>(m)) > kFloatMassTol) {
        throw validation_error("brute_force_oracle: weights must be uniform 1/m");
      }
    }

  std::vector<std::size_t> perm(m);
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<std::size_t> best_perm;
  bool best_infinite = false;
  Rational best_sum;
  double best_max = 0.0;
  bool have_best = false;
  std::vector<Point> tuple(2);
  do {
    bool infinite = false;
    Rational sum = 0;
    double worst = -kInfiniteCost;
    for (std::size_t i = 0; i < m; ++i) {
      tuple[0] = mu.atoms()[i].point;
      tuple[1] = nu.atoms()[perm[i]].point;
      CostValue v = eval_cost(inst.cost, tuple, mode);
      if (std::isinf(v)) {
        infinite = true;
        break;
      }
      if (inst.objective == Objective::sum)
        sum += rational_from_double(v);
      else
        worst = std::max(worst, v);
    }
    bool better;
    if (!have_best)
      better = true;
    else if (inst.objective == Objective::sum)
      better = !infinite && (best_infinite || sum < best_sum);
    else
      better = !infinite && (best_infinite || worst < best_max);
    if (better) {
      have_best = true;
      best_infinite = infinite;
      best_sum = sum;
      best_max = worst;
      best_perm = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));

  Weight w = mode == WeightMode::rational ? Weight::rational(Rational(1, static_cast<long>(m)))
                                          : Weight::floating(1.0 / static_cast<double>(m));
  std::vector<CouplingAtom> atoms;
  for (std::size_t i = 0; i < m; ++i)
    atoms.push_back({{mu.atoms()[i].point, nu.atoms()[best_perm[i]].point}, w});
  Solution sol{DiscreteCoupling({mu.space(), nu.space()}, mode, std::move(atoms))};
  if (best_infinite) {
    sol.value = kInfiniteCost;
  } else if (inst.objective == Objective::sum) {
    Rational v = best_sum / Rational(static_cast<long>(m));
    sol.value = rational_to_double(v);
    if (mode == WeightMode::rational) sol.exact_value = v;
  } else {
    sol.value = best_max;
    if (mode == WeightMode::rational) sol.exact_value = rational_from_double(best_max);
  }
  sol.status = SolutionStatus::optimal;
  return sol;
}

bool plan_matches_marginals(const DiscreteCoupling& plan, const MotInstance& inst) {
  if (plan.n_marginals() != inst.marginals.size()) return false;
  for (std::size_t k = 0; k < inst.marginals.size(); ++k)
    if (!measures_equal(marginal(plan, k), inst.marginals[k])) return false;
  return true;
}

}  // namespace motcert
