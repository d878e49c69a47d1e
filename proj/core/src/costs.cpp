#include "motcert/costs.hpp"

#include <cmath>

namespace motcert {

CostSpec CostSpec::power_distance(double p) {
  if (!(p > 0.0)) throw validation_error("CostSpec: power must be positive");
  CostSpec c;
  c.kind_ = CostKind::power_distance;
  c.n_marginals_ = 2;
  c.power_ = p;
  return c;
}

CostSpec CostSpec::squared_sum_barycenter(std::size_t n_marginals) {
  if (n_marginals < 2) throw validation_error("CostSpec: needs at least two marginals");
  CostSpec c;
  c.kind_ = CostKind::squared_sum_barycenter;
  c.n_marginals_ = n_marginals;
  return c;
}

CostSpec CostSpec::equality_indicator(double equal_value, double unequal_value) {
  if (!(equal_value <= unequal_value))
    throw validation_error("CostSpec: equality_indicator requires equal_value <= unequal_value");
  if (!std::isfinite(equal_value) || !std::isfinite(unequal_value))
    throw validation_error("CostSpec: equality_indicator values must be finite");
  CostSpec c;
  c.kind_ = CostKind::equality_indicator;
  c.n_marginals_ = 2;
  c.equal_value_ = equal_value;
  c.unequal_value_ = unequal_value;
  return c;
}

CostSpec CostSpec::tensor(std::vector<std::vector<Point>> supports, std::vector<CostValue> values) {
  if (supports.size() < 2) throw validation_error("CostSpec: tensor needs at least two marginals");
  std::size_t cells = 1;
  for (const auto& s : supports) {
    if (s.empty()) throw validation_error("CostSpec: tensor marginal support is empty");
    cells *= s.size();
  }
  if (values.size() != cells) throw validation_error("CostSpec: tensor value count mismatch");
  for (double v : values)
    if (std::isnan(v)) throw validation_error("CostSpec: tensor values must not be NaN");
  CostSpec c;
  c.kind_ = CostKind::tensor;
  c.n_marginals_ = supports.size();
  c.tensor_supports_ = std::move(supports);
  c.tensor_values_ = std::move(values);
  return c;
}

namespace {

double checked(double v) {
  if (std::isnan(v)) throw validation_error("eval_cost: produced NaN");
  return v;
}

}  // namespace

CostValue eval_cost(const CostSpec& c, std::span<const Point> tuple, WeightMode mode) {
  if (tuple.size() != c.n_marginals())
    throw validation_error("eval_cost: tuple length != cost marginal count");
  switch (c.kind()) {
    case CostKind::power_distance: {
      double d = factor_distance(tuple[0], tuple[1]);
      return checked(std::pow(d, c.power()));
    }
    case CostKind::squared_sum_barycenter: {
      double s = 0.0;
      for (std::size_t i = 0; i < tuple.size(); ++i)
        for (std::size_t j = i + 1; j < tuple.size(); ++j) {
          double d = factor_distance(tuple[i], tuple[j]);
          s += d * d;
        }
      return checked(s);
    }
    case CostKind::equality_indicator:
      return points_equal(tuple[0], tuple[1], mode) ? c.equal_value() : c.unequal_value();
    case CostKind::tensor: {
      std::size_t flat = 0;
      for (std::size_t k = 0; k < tuple.size(); ++k) {
        const auto& sup = c.tensor_supports()[k];
        std::size_t idx = sup.size();
        for (std::size_t i = 0; i < sup.size(); ++i) {
          if (sup[i] == tuple[k]) {
            idx = i;
            break;
          }
        }
        if (idx == sup.size())
          throw validation_error("eval_cost: tensor lookup point not in marginal support");
        flat = flat * sup.size() + idx;
      }
      return c.tensor_values()[flat];
    }
  }
  throw validation_error("eval_cost: unknown cost kind");
}

CostValue integral_cost(const CostSpec& c, const DiscreteCoupling& plan) {
  if (plan.mode() == WeightMode::rational) return integral_cost_exact(c, plan).as_double();
  double s = 0.0;
  for (const auto& a : plan.atoms()) {
    CostValue v = eval_cost(c, a.tuple, plan.mode());
    if (std::isinf(v)) return kInfiniteCost;
    s += a.weight.as_double() * v;
  }
  return s;
}

CostValue sup_cost(const CostSpec& c, const DiscreteCoupling& plan) {
  CostValue worst = -kInfiniteCost;
  for (const auto& a : plan.atoms()) worst = std::max(worst, eval_cost(c, a.tuple, plan.mode()));
  return worst;
}

ExactCost integral_cost_exact(const CostSpec& c, const DiscreteCoupling& plan) {
  if (plan.mode() != WeightMode::rational)
    throw mode_mismatch("integral_cost_exact: plan must be in rational mode");
  ExactCost out;
  for (const auto& a : plan.atoms()) {
    CostValue v = eval_cost(c, a.tuple, plan.mode());
    if (std::isinf(v)) {
      out.infinite = true;
      out.finite = 0;
      return out;
    }
    out.finite += a.weight.rat() * rational_from_double(v);
  }
  return out;
}

}  // namespace motcert
