#pragma once

#include <string>

#include "motcert/discretization.hpp"
#include "motcert/monotonicity.hpp"
#include "motcert/solvers.hpp"

namespace motcert {

struct GammaLevel {
  int level = 0;
  double delta = 0.0;
  std::size_t alpha_support_size = 0;
  std::vector<DiscreteMeasure> discretized_marginals;
  std::optional<DiscreteCoupling> minimizer;
  double min_value = 0.0;
  std::optional<Rational> min_exact;
  double objective_alpha = 0.0;
  double gap = 0.0;      // objective(alpha^n) - min value
  bool gap_zero = false;  // exact in rational mode, 1e-9 otherwise
  double minimizer_discrepancy = 0.0;
  bool guard_refused = false;
};

struct GammaRun {
  std::vector<GammaLevel> levels;
  bool complete = false;
};

/// For each level: discretize the base plan, extract its marginals, solve the
/// restricted transport problem exactly, and record the minimum next to the
/// discretized plan's own objective. A zero gap at every level is the
/// executable shadow of finite optimality.
GammaRun run_gamma_experiment(const DiscreteCoupling& gamma, const CostSpec& cost,
                              Objective objective, const std::vector<int>& levels,
                              const GuardConfig& guard = {});

enum class VerdictStage { none, monotonicity, finite_optimality, gamma_gap };

struct OptimalityVerdict {
  bool pass = false;
  VerdictStage failed_stage = VerdictStage::none;
  std::string detail;
  std::optional<Certificate> certificate;
  std::optional<FiniteOptimalityReport> audit;
  std::optional<GammaRun> gamma;
};

/// Three-stage pipeline: monotonicity certification of the support, the
/// finite-optimality audit, then the per-level zero-gap check of the gamma
/// experiment. The verdict names the first failing stage.
OptimalityVerdict verify_optimality_theorem(const DiscreteCoupling& gamma, const CostSpec& cost,
                                            Objective objective, int k_max,
                                            const std::vector<int>& levels,
                                            std::size_t trials = 20, std::uint64_t seed = 0,
                                            const GuardConfig& guard = {});

/// Rotation angle: exact rational or a symbolic irrational.
struct AlphaSpec {
  double value = 0.0;
  std::optional<Rational> exact;
  std::string label;

  static AlphaSpec rational(const Rational& r);
  static AlphaSpec sqrt2_minus_one();
  static AlphaSpec golden_conjugate();
  /// Accepts "sqrt2m1", "golden", "p/q", or a decimal treated as exact.
  static AlphaSpec parse(const std::string& token);
};

/// Uniform plan on {(i/m, i/m + alpha mod 1)}. For rational alpha whose shift
/// is a whole number of grid steps the second coordinates reuse the first
/// grid's doubles, so point coincidences are exact by construction.
DiscreteCoupling make_rotation_plan(const AlphaSpec& alpha, std::size_t m);

struct CounterexampleRun {
  AlphaSpec alpha;
  std::size_t m = 0;
  int k_max = 0;
  std::optional<Certificate> certificate;
  double sup_cost_rotation = 0.0;
  /// Bottleneck optimum among couplings of the rotation plan's own marginals.
  double solver_value_rotation_marginals = 0.0;
  /// Bottleneck optimum when both marginals equal the base grid; the
  /// identity-feasible contrast.
  double solver_value_identity_fixture = 0.0;
  bool expected_certificate = false;
  bool matches_expectation = false;
  std::string note;
};

/// The discontinuous-cost rotation study: certify the rotation support, then
/// compare its sup cost against the solver on its own marginals and on the
/// identity-feasible fixture. Rational angles with a short enough cycle must
/// produce a certificate; irrational angles must not.
CounterexampleRun run_counterexample(const AlphaSpec& alpha, std::size_t m, int k_max,
                                     const GuardConfig& guard = {});

}  // namespace motcert
