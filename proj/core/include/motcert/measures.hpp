#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <vector>

#include "motcert/errors.hpp"
#include "motcert/rational.hpp"

namespace motcert {

enum class WeightMode { rational, floating };

/// Coordinate tolerance used wherever floating-mode objects compare points.
/// Rational-mode objects always compare coordinates exactly.
inline constexpr double kFloatPointTol = 1e-12;

/// Tolerance for floating-mode mass checks (probability sums, equal marginals).
inline constexpr double kFloatMassTol = 1e-12;

struct Point {
  std::vector<double> coords;

  Point() = default;
  Point(std::initializer_list<double> c) : coords(c) {}
  explicit Point(std::vector<double> c) : coords(std::move(c)) {}

  std::size_t dim() const { return coords.size(); }
  double operator[](std::size_t i) const { return coords[i]; }

  friend bool operator==(const Point& a, const Point& b) { return a.coords == b.coords; }
  friend auto operator<=>(const Point& a, const Point& b) {
    return std::lexicographical_compare_three_way(a.coords.begin(), a.coords.end(),
                                                  b.coords.begin(), b.coords.end());
  }
};

bool points_equal(const Point& a, const Point& b, WeightMode mode);

/// Euclidean distance between two points of the same factor space.
double factor_distance(const Point& a, const Point& b);

/// Compact axis-aligned box in a Euclidean factor space.
struct FactorSpace {
  std::size_t dim = 0;
  std::vector<std::array<double, 2>> bounds;  // [lo, hi] per axis, lo < hi

  FactorSpace() = default;
  FactorSpace(std::size_t d, std::vector<std::array<double, 2>> b);
  static FactorSpace unit_interval() { return FactorSpace(1, {{0.0, 1.0}}); }

  bool contains(const Point& p) const;
  double diameter() const;  // Euclidean diameter of the box

  friend bool operator==(const FactorSpace& a, const FactorSpace& b) {
    return a.dim == b.dim && a.bounds == b.bounds;
  }
};

/// A strictly positive mass, exact rational or floating. The mode is fixed per
/// measure; arithmetic across modes throws mode_mismatch.
class Weight {
 public:
  Weight() : mode_(WeightMode::rational), rat_(0) {}

  static Weight rational(Rational v) { return Weight(WeightMode::rational, std::move(v), 0.0); }
  static Weight rational(long num, long den) { return rational(Rational(num, den)); }
  static Weight floating(double v) { return Weight(WeightMode::floating, Rational(0), v); }

  WeightMode mode() const { return mode_; }
  const Rational& rat() const;
  double flt() const;
  double as_double() const { return mode_ == WeightMode::rational ? rational_to_double(rat_) : flt_; }

  bool is_positive() const;
  bool is_integer() const;  // rational with denominator 1, or an integral double

  Weight& operator+=(const Weight& o);
  friend Weight operator+(Weight a, const Weight& b) { return a += b; }
  friend Weight operator*(const Weight& a, const Weight& b);
  friend Weight operator/(const Weight& a, const Weight& b);

 private:
  Weight(WeightMode m, Rational r, double f) : mode_(m), rat_(std::move(r)), flt_(f) {}
  WeightMode mode_;
  Rational rat_;
  double flt_;
};

struct WeightedPoint {
  Point point;
  Weight weight;
};

/// Finitely supported probability measure on a compact box.
class DiscreteMeasure {
 public:
  DiscreteMeasure(FactorSpace space, WeightMode mode, std::vector<WeightedPoint> atoms);

  const FactorSpace& space() const { return space_; }
  WeightMode mode() const { return mode_; }
  const std::vector<WeightedPoint>& atoms() const { return atoms_; }
  std::size_t size() const { return atoms_.size(); }

 private:
  FactorSpace space_;
  WeightMode mode_;
  std::vector<WeightedPoint> atoms_;
};

struct CouplingAtom {
  std::vector<Point> tuple;
  Weight weight;
};

/// Couplings are probability measures; positive_only admits the unnormalized
/// integer-weight measures used by the table/permutation machinery.
enum class MassPolicy { probability, positive_only };

/// Finitely supported measure on a product of N >= 2 factor spaces.
class DiscreteCoupling {
 public:
  DiscreteCoupling(std::vector<FactorSpace> spaces, WeightMode mode, std::vector<CouplingAtom> atoms,
                   MassPolicy policy = MassPolicy::probability);

  const std::vector<FactorSpace>& spaces() const { return spaces_; }
  std::size_t n_marginals() const { return spaces_.size(); }
  WeightMode mode() const { return mode_; }
  const std::vector<CouplingAtom>& atoms() const { return atoms_; }
  std::size_t size() const { return atoms_.size(); }
  MassPolicy mass_policy() const { return policy_; }

  std::vector<std::vector<Point>> support() const;

 private:
  std::vector<FactorSpace> spaces_;
  WeightMode mode_;
  std::vector<CouplingAtom> atoms_;
  MassPolicy policy_;
};

/// k-th pushforward (0-based). Atoms with coinciding k-coordinates are merged.
DiscreteMeasure marginal(const DiscreteCoupling& plan, std::size_t k);

/// Uniform probability measure on l distinct support tuples of the plan,
/// chosen deterministically from the seed.
DiscreteCoupling sample_submeasure(const DiscreteCoupling& plan, std::size_t l, std::uint64_t seed);

/// Max over a fixed dictionary of dict_size clipped test functions (coordinate
/// monomials of degree <= 2, then sinusoids of frequencies 1..ceil(dict/2)) of
/// |int f da - int f db|. A numerical proxy for tight convergence.
double bl_discrepancy(const DiscreteMeasure& a, const DiscreteMeasure& b, std::size_t dict_size);
double bl_discrepancy(const DiscreteCoupling& a, const DiscreteCoupling& b, std::size_t dict_size);

/// Equality after merging coinciding atoms, with mode-appropriate tolerances.
bool measures_equal(const DiscreteMeasure& a, const DiscreteMeasure& b);

namespace detail {
/// Sorts and merges (point, weight) pairs under the mode's coincidence rule.
std::vector<WeightedPoint> merge_atoms(std::vector<WeightedPoint> atoms, WeightMode mode);
}  // namespace detail

}  // namespace motcert
