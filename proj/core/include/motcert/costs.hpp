#pragma once

#include <limits>
#include <span>
#include <vector>

#include "motcert/measures.hpp"

namespace motcert {

/// Cost of one support tuple; +infinity allowed, NaN never.
using CostValue = double;

inline constexpr CostValue kInfiniteCost = std::numeric_limits<double>::infinity();

enum class CostKind { power_distance, squared_sum_barycenter, equality_indicator, tensor };

/// Declarative cost function evaluated on support tuples. The built-in
/// families are finite; only tensor mode may carry +infinity entries.
class CostSpec {
 public:
  static CostSpec power_distance(double p);
  static CostSpec squared_sum_barycenter(std::size_t n_marginals);
  static CostSpec equality_indicator(double equal_value, double unequal_value);
  /// Values are row-major over per-marginal atom indices; each marginal's
  /// support list defines its index order.
  static CostSpec tensor(std::vector<std::vector<Point>> supports, std::vector<CostValue> values);

  CostKind kind() const { return kind_; }
  std::size_t n_marginals() const { return n_marginals_; }
  double power() const { return power_; }
  double equal_value() const { return equal_value_; }
  double unequal_value() const { return unequal_value_; }
  const std::vector<std::vector<Point>>& tensor_supports() const { return tensor_supports_; }
  const std::vector<CostValue>& tensor_values() const { return tensor_values_; }

  bool is_continuous_family() const {
    return kind_ == CostKind::power_distance || kind_ == CostKind::squared_sum_barycenter;
  }

 private:
  CostSpec() = default;
  CostKind kind_ = CostKind::power_distance;
  std::size_t n_marginals_ = 2;
  double power_ = 2.0;
  double equal_value_ = 1.0;
  double unequal_value_ = 2.0;
  std::vector<std::vector<Point>> tensor_supports_;
  std::vector<CostValue> tensor_values_;
};

/// Evaluates the cost on one tuple. Equality-indicator point comparison is
/// exact in rational mode and tolerance-based in floating mode.
CostValue eval_cost(const CostSpec& c, std::span<const Point> tuple,
                    WeightMode mode = WeightMode::rational);

/// Integral objective: sum of weight * cost over atoms; +infinity as soon as a
/// positively weighted atom has infinite cost.
CostValue integral_cost(const CostSpec& c, const DiscreteCoupling& plan);

/// Sup objective: max cost over the (positively weighted) support.
CostValue sup_cost(const CostSpec& c, const DiscreteCoupling& plan);

/// Exact aggregate used by rational-mode solvers and audits. Cost values are
/// doubles; converting each to a rational is exact, so sums compare exactly.
struct ExactCost {
  bool infinite = false;
  Rational finite = 0;

  friend bool operator==(const ExactCost& a, const ExactCost& b) {
    return a.infinite == b.infinite && (a.infinite || a.finite == b.finite);
  }
  friend bool operator<(const ExactCost& a, const ExactCost& b) {
    if (a.infinite) return false;
    if (b.infinite) return true;
    return a.finite < b.finite;
  }
  double as_double() const { return infinite ? kInfiniteCost : rational_to_double(finite); }
};

ExactCost integral_cost_exact(const CostSpec& c, const DiscreteCoupling& plan);

}  // namespace motcert
