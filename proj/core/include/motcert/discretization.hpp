#pragma once

#include <functional>
#include <optional>

#include "motcert/costs.hpp"
#include "motcert/measures.hpp"
#include "motcert/solvers.hpp"

namespace motcert {

struct PartitionCell {
  std::size_t id = 0;  // flattened grid index, deterministic across runs
  std::vector<std::array<double, 2>> box;  // half-open per axis, closed at the top edge
  Point representative;                    // lexicographically smallest atom inside
};

/// Dyadic grid over one marginal's box, truncated to the cells that contain
/// at least one support atom.
struct MarginalPartition {
  FactorSpace space;
  std::size_t subdivisions = 1;  // per axis, a power of two
  std::vector<PartitionCell> cells;  // ascending id

  std::size_t grid_index(const Point& p) const;
  /// Occupied-cell id containing p, or nothing.
  std::optional<std::size_t> locate(const Point& p) const;
  const PartitionCell* find_cell(std::size_t id) const;
};

/// Per-marginal partitions at one refinement level, diameters below delta/2,
/// each cell nested inside a unique cell of the previous level.
struct Partition {
  int level = 1;
  double delta = 0.0;
  std::vector<MarginalPartition> marginals;
  /// Per marginal: (child cell id, parent cell id at level-1); empty at level 1.
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> nesting;
};

/// delta per level; must be strictly decreasing and positive.
using DeltaSchedule = std::function<double(int)>;

/// Default schedule: diam(K) halved per level.
DeltaSchedule default_delta_schedule(const std::vector<FactorSpace>& spaces);

Partition build_partition(const std::vector<FactorSpace>& spaces,
                          const std::vector<std::vector<Point>>& supports, int level,
                          const DeltaSchedule& schedule = {});

enum class RepresentativeRule { lexicographic, centroid_nearest };

/// Collapses the plan onto one support tuple per charged product cell, the
/// cell's plan mass as its weight. Marginal cell masses are preserved exactly
/// in rational mode.
DiscreteCoupling discretize_plan(const DiscreteCoupling& plan, const Partition& part,
                                 RepresentativeRule rule = RepresentativeRule::lexicographic);

/// Product gluing: each charged product cell distributes its beta-mass over
/// the targets' atoms in the component cells, proportionally to the target
/// weights. The result's marginals equal the targets.
DiscreteCoupling recovery_sequence(const DiscreteCoupling& beta, const Partition& part,
                                   const std::vector<DiscreteMeasure>& targets);

struct ConvergenceRow {
  int level = 0;
  double delta = 0.0;
  double discrepancy = 0.0;
  double objective = 0.0;
  double epsilon_envelope = 0.0;  // NaN when no continuity modulus applies
};

std::vector<ConvergenceRow> convergence_report(const DiscreteCoupling& plan, const CostSpec& cost,
                                               Objective objective, const std::vector<int>& levels,
                                               std::size_t dict_size = 16);

/// Worst objective drift when every tuple component moves by at most delta/2,
/// for the continuous built-in families; NaN for the discontinuous ones.
double continuity_envelope(const CostSpec& cost, const std::vector<FactorSpace>& spaces,
                           double delta);

}  // namespace motcert
