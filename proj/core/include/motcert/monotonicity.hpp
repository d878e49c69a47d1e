#pragma once

#include <cstdint>
#include <optional>
#include <utility>

#include "motcert/costs.hpp"
#include "motcert/measures.hpp"
#include "motcert/solvers.hpp"

namespace motcert {

enum class AggregateKind { sum, max };

/// Witness of a cyclical-monotonicity violation: k support tuples and N-1
/// permutations whose reassignment strictly lowers the aggregate cost.
struct Certificate {
  std::vector<std::vector<Point>> tuples;              // k tuples, each of N points
  std::vector<std::vector<std::size_t>> permutations;  // N-1 permutations of {0..k-1}
  double before = 0.0;
  double after = 0.0;
  AggregateKind aggregate = AggregateKind::sum;
};

/// Exhaustive search over all multisets of up to k_max support tuples
/// (repetition allowed) and all (N-1)-tuples of permutations. Returns the
/// lexicographically first violation (ordered by k, then tuple index
/// sequence, then permutation sequence) or nothing when the support complies.
/// Sum aggregates are compared in exact rational arithmetic.
std::optional<Certificate> check_cm(const std::vector<std::vector<Point>>& support,
                                    const CostSpec& cost, int k_max, const GuardConfig& guard = {});

/// Same search with the max aggregate; a violation still requires a strict
/// decrease.
std::optional<Certificate> check_icm(const std::vector<std::vector<Point>>& support,
                                     const CostSpec& cost, int k_max, const GuardConfig& guard = {});

/// Recomputes (before, after) from a certificate's own fields; reproduces the
/// stored values bit-for-bit.
std::pair<double, double> recompute_certificate(const Certificate& cert, const CostSpec& cost);

/// Row-expanded form of an integer-weight coupling: each atom of multiplicity
/// m contributes m consecutive identical rows.
struct IntegerTable {
  std::vector<std::vector<Point>> rows;
  std::vector<std::size_t> atom_index;  // row -> originating atom
};

IntegerTable expand_to_table(const DiscreteCoupling& m);

/// For tables arising from equal-marginal measures, returns permutations
/// sigma^2..sigma^N such that the rows (A[i][0], A[sigma^2(i)][1], ...) form
/// the same multiset as B's rows; nothing iff some column multiset differs.
std::optional<std::vector<std::vector<std::size_t>>> find_permutations(const IntegerTable& a,
                                                                       const IntegerTable& b);

/// The reassembled rows (A[i][0], A[sigma^2(i)][1], ..., A[sigma^N(i)][N-1]).
std::vector<std::vector<Point>> reassigned_rows(const IntegerTable& a,
                                                const std::vector<std::vector<std::size_t>>& perms);

struct RationalizedPair {
  DiscreteCoupling a;
  DiscreteCoupling b;
};

/// Replaces the weights of two equal-marginal couplings by nearby rationals on
/// the same supports, with marginal equality restored exactly: the integer
/// marginal-matching system is solved in exact arithmetic and the remaining
/// free coordinates are rounded by continued fractions. Componentwise the
/// outputs stay within eps of the inputs and remain strictly positive.
RationalizedPair rationalize_pair(const DiscreteCoupling& a, const DiscreteCoupling& b,
                                  const Rational& eps);

struct FiniteOptimalityTrial {
  std::size_t l = 0;
  double submeasure_value = 0.0;
  double optimal_value = 0.0;
  double gap = 0.0;
  bool pass = false;
};

struct FiniteOptimalityReport {
  std::vector<FiniteOptimalityTrial> trials;
  bool all_pass = false;
};

/// Samples finitely supported submeasures of the plan and re-solves each one
/// exactly against its own marginals; a positive gap falsifies finite
/// optimality at that submeasure size.
FiniteOptimalityReport check_finite_optimality(const DiscreteCoupling& plan, const CostSpec& cost,
                                               Objective objective, std::size_t trials,
                                               std::size_t l_max, std::uint64_t seed,
                                               const GuardConfig& guard = {});

}  // namespace motcert
