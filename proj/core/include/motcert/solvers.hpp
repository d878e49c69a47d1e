#pragma once

#include <optional>

#include "motcert/costs.hpp"
#include "motcert/measures.hpp"

namespace motcert {

enum class Objective { sum, max };

/// A discrete multi-marginal transport instance. The product support size is
/// bounded by a resource guard; the solvers refuse beyond it.
struct MotInstance {
  std::vector<DiscreteMeasure> marginals;
  CostSpec cost;
  Objective objective;
};

enum class SolutionStatus { optimal, infeasible_guard };

struct Solution {
  DiscreteCoupling plan;
  double value = 0.0;
  /// Exact objective in rational mode; conversion of the finite double cost
  /// values is exact, so equality comparisons against oracles are exact too.
  std::optional<Rational> exact_value;
  SolutionStatus status = SolutionStatus::optimal;
};

/// Vertex-optimal solution of the integral objective over the transport
/// polytope. Exact rational pivoting (Bland's rule) in rational mode, a
/// floating tableau with 1e-9 tolerances otherwise.
Solution solve_integral_mot(const MotInstance& inst, const GuardConfig& guard = {});

/// Smallest cost level t admitting a coupling supported in {c <= t}, found by
/// bisection over the sorted distinct support costs. The returned plan is the
/// level-t witness refined to a lexicographically minimal cost profile, which
/// keeps its support free of max-aggregate reassignment improvements.
Solution solve_sup_mot(const MotInstance& inst, const GuardConfig& guard = {});

struct FeasibilityResult {
  bool feasible = false;
  std::optional<DiscreteCoupling> witness;
};

/// Decides whether some coupling lives on {c <= t}: max-flow saturation for
/// two marginals, LP phase-1 feasibility in general.
FeasibilityResult feasibility_at_level(const MotInstance& inst, CostValue t,
                                       const GuardConfig& guard = {});

/// Permutation enumeration for two-marginal instances with m <= 7 uniform
/// atoms per side. Exists purely to validate the LP and bisection solvers.
Solution brute_force_oracle(const MotInstance& inst);

/// True when plan's marginals coincide with the instance's (exactly in
/// rational mode, within tolerance otherwise).
bool plan_matches_marginals(const DiscreteCoupling& plan, const MotInstance& inst);

}  // namespace motcert
