#pragma once

// Independent oracles for the solver suites. Nothing here shares code with
// the LP or bisection paths: the quantile coupling is built by mass-matching
// sorted supports, the cylinder mass by direct summation.

#include <algorithm>
#include <vector>

#include "motcert/costs.hpp"
#include "motcert/measures.hpp"

namespace motcert::testing {

/// Exact integral cost of the monotone (quantile / north-west corner) coupling
/// of two one-dimensional rational measures. Optimal for convex translation
/// costs |x-y|^p, p >= 1, by the classic rearrangement argument.
inline Rational quantile_coupling_value(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                        double p) {
  auto sorted = [](const DiscreteMeasure& m) {
    std::vector<std::pair<double, Rational>> atoms;
    for (const auto& a : m.atoms()) atoms.push_back({a.point.coords[0], a.weight.rat()});
    std::sort(atoms.begin(), atoms.end());
    return atoms;
  };
  auto left = sorted(mu), right = sorted(nu);
  Rational value = 0;
  std::size_t i = 0, j = 0;
  Rational ri = left[0].second, rj = right[0].second;
  while (i < left.size() && j < right.size()) {
    Rational mass = std::min(ri, rj);
    double cost = std::pow(std::abs(left[i].first - right[j].first), p);
    value += mass * rational_from_double(cost);
    ri -= mass;
    rj -= mass;
    if (ri == 0 && ++i < left.size()) ri = left[i].second;
    if (rj == 0 && ++j < right.size()) rj = right[j].second;
  }
  return value;
}

/// Plan mass of the cylinder {atoms whose k-th component lies in `points`},
/// summed directly over the plan's atoms.
inline Rational cylinder_mass(const DiscreteCoupling& plan, std::size_t k,
                              const std::vector<Point>& points) {
  Rational mass = 0;
  for (const auto& atom : plan.atoms())
    for (const auto& p : points)
      if (atom.tuple[k] == p) {
        mass += atom.weight.rat();
        break;
      }
  return mass;
}

/// Measure mass on a point set by direct summation.
inline Rational measure_mass(const DiscreteMeasure& m, const std::vector<Point>& points) {
  Rational mass = 0;
  for (const auto& atom : m.atoms())
    for (const auto& p : points)
      if (atom.point == p) {
        mass += atom.weight.rat();
        break;
      }
  return mass;
}

}  // namespace motcert::testing
