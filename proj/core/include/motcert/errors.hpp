#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace motcert {

/// Input or state fails a documented precondition or invariant.
class validation_error : public std::invalid_argument {
 public:
  explicit validation_error(const std::string& what) : std::invalid_argument(what) {}
};

/// Arithmetic mixing exact-rational and floating weights.
class mode_mismatch : public validation_error {
 public:
  explicit mode_mismatch(const std::string& what) : validation_error(what) {}
};

/// A resource guard refused the computation. Refusal is deliberate: the
/// exhaustive searches and exact solvers do not silently degrade to sampling.
class guard_exceeded : public std::runtime_error {
 public:
  explicit guard_exceeded(const std::string& what) : std::runtime_error(what) {}
};

struct GuardConfig {
  /// Max product-support cells an exact solver will materialize.
  std::size_t max_product_cells = 200'000;
  /// Max cost evaluations for one certificate search.
  std::uint64_t max_certificate_evals = 50'000'000;
  /// Structural caps for the exhaustive monotonicity search.
  int max_cycle_length = 5;
  std::size_t max_search_marginals = 3;
  std::size_t max_search_support = 60;
  /// Per-trial product-cell cap in the finite-optimality audit.
  std::size_t max_audit_cells = 1'000'000;
  /// Cap on lexicographic refinement rounds in the bottleneck solver.
  std::size_t max_level_refinements = 256;
};

}  // namespace motcert
