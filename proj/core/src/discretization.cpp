#include "motcert/discretization.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace motcert {

namespace {

std::size_t pow_size(std::size_t base, std::size_t exp) {
  std::size_t v = 1;
  for (std::size_t i = 0; i < exp; ++i) v *= base;
  return v;
}

/// Smallest power-of-two subdivision count making the cell diameter strictly
/// smaller than delta/2.
std::size_t subdivisions_for(const FactorSpace& space, double delta) {
  if (!(delta > 0)) throw validation_error("build_partition: delta must be positive");
  std::size_t s = 1;
  while (!(space.diameter() / static_cast<double>(s) < delta / 2.0)) {
    s *= 2;
    if (s > (std::size_t{1} << 40)) throw validation_error("build_partition: delta too small");
  }
  return s;
}

std::vector<std::size_t> axis_indices(const FactorSpace& space, std::size_t s, const Point& p) {
  std::vector<std::size_t> idx(space.dim);
  for (std::size_t d = 0; d < space.dim; ++d) {
    double lo = space.bounds[d][0], hi = space.bounds[d][1];
    double rel = (p.coords[d] - lo) / (hi - lo) * static_cast<double>(s);
    auto i = static_cast<long long>(std::floor(rel));
    i = std::clamp(i, 0ll, static_cast<long long>(s) - 1);
    idx[d] = static_cast<std::size_t>(i);
  }
  return idx;
}

std::size_t flatten(const std::vector<std::size_t>& idx, std::size_t s) {
  std::size_t flat = 0;
  for (auto i : idx) flat = flat * s + i;
  return flat;
}

MarginalPartition build_marginal(const FactorSpace& space, const std::vector<Point>& support,
                                 double delta) {
  if (support.empty()) throw validation_error("build_partition: empty marginal support");
  MarginalPartition part;
  part.space = space;
  part.subdivisions = subdivisions_for(space, delta);
  std::map<std::size_t, std::vector<const Point*>> occupied;
  for (const auto& p : support) {
    if (!space.contains(p)) throw validation_error("build_partition: atom outside the space box");
    occupied[part.grid_index(p)].push_back(&p);
  }
  for (auto& [id, members] : occupied) {
    PartitionCell cell;
    cell.id = id;
    // decode per-axis indices (axis 0 most significant)
    std::vector<std::size_t> idx(space.dim);
    std::size_t rest = id;
    for (std::size_t d = space.dim; d-- > 0;) {
      idx[d] = rest % part.subdivisions;
      rest /= part.subdivisions;
    }
    cell.box.resize(space.dim);
    for (std::size_t d = 0; d < space.dim; ++d) {
      double lo = space.bounds[d][0], hi = space.bounds[d][1];
      double w = (hi - lo) / static_cast<double>(part.subdivisions);
      cell.box[d] = {lo + w * static_cast<double>(idx[d]), lo + w * static_cast<double>(idx[d] + 1)};
    }
    cell.representative = **std::min_element(
        members.begin(), members.end(), [](const Point* a, const Point* b) { return *a < *b; });
    part.cells.push_back(std::move(cell));
  }
  return part;
}

}  // namespace

std::size_t MarginalPartition::grid_index(const Point& p) const {
  return flatten(axis_indices(space, subdivisions, p), subdivisions);
}

const PartitionCell* MarginalPartition::find_cell(std::size_t id) const {
  auto it = std::lower_bound(cells.begin(), cells.end(), id,
                             [](const PartitionCell& c, std::size_t v) { return c.id < v; });
  if (it == cells.end() || it->id != id) return nullptr;
  return &*it;
}

std::optional<std::size_t> MarginalPartition::locate(const Point& p) const {
  if (!space.contains(p)) return std::nullopt;
  std::size_t id = grid_index(p);
  return find_cell(id) ? std::optional<std::size_t>(id) : std::nullopt;
}

DeltaSchedule default_delta_schedule(const std::vector<FactorSpace>& spaces) {
  double diam = 0.0;
  for (const auto& s : spaces) diam = std::max(diam, s.diameter());
  return [diam](int level) { return std::ldexp(diam, -level); };
}

Partition build_partition(const std::vector<FactorSpace>& spaces,
                          const std::vector<std::vector<Point>>& supports, int level,
                          const DeltaSchedule& schedule) {
  if (level < 1) throw validation_error("build_partition: level must be positive");
  if (spaces.empty() || supports.size() != spaces.size())
    throw validation_error("build_partition: one support list per space required");
  DeltaSchedule sched = schedule ? schedule : default_delta_schedule(spaces);
  double delta = sched(level);
  Partition part;
  part.level = level;
  part.delta = delta;
  for (std::size_t k = 0; k < spaces.size(); ++k)
    part.marginals.push_back(build_marginal(spaces[k], supports[k], delta));

  part.nesting.resize(spaces.size());
  if (level >= 2) {
    double delta_prev = sched(level - 1);
    if (!(delta < delta_prev))
      throw validation_error("build_partition: delta schedule must be strictly decreasing");
    for (std::size_t k = 0; k < spaces.size(); ++k) {
      MarginalPartition parent = build_marginal(spaces[k], supports[k], delta_prev);
      std::size_t ratio = part.marginals[k].subdivisions / parent.subdivisions;
      for (const auto& cell : part.marginals[k].cells) {
        std::vector<std::size_t> idx(spaces[k].dim);
        std::size_t rest = cell.id;
        for (std::size_t d = spaces[k].dim; d-- > 0;) {
          idx[d] = rest % part.marginals[k].subdivisions;
          rest /= part.marginals[k].subdivisions;
        }
        for (auto& i : idx) i /= ratio;
        part.nesting[k].push_back({cell.id, flatten(idx, parent.subdivisions)});
      }
    }
  }
  return part;
}

namespace {

using CellKey = std::vector<std::size_t>;

std::map<CellKey, std::vector<std::size_t>> group_by_cell(const DiscreteCoupling& plan,
                                                          const Partition& part) {
  if (plan.n_marginals() != part.marginals.size())
    throw validation_error("partition and plan disagree on the number of marginals");
  std::map<CellKey, std::vector<std::size_t>> groups;
  for (std::size_t a = 0; a < plan.size(); ++a) {
    CellKey key(plan.n_marginals());
    for (std::size_t k = 0; k < plan.n_marginals(); ++k) {
      auto id = part.marginals[k].locate(plan.atoms()[a].tuple[k]);
      if (!id) throw validation_error("plan atom outside all partition cells");
      key[k] = *id;
    }
    groups[key].push_back(a);
  }
  return groups;
}

bool tuple_less(const std::vector<Point>& a, const std::vector<Point>& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

}  // namespace

DiscreteCoupling discretize_plan(const DiscreteCoupling& plan, const Partition& part,
                                 RepresentativeRule rule) {
  auto groups = group_by_cell(plan, part);
  std::vector<CouplingAtom> atoms;
  atoms.reserve(groups.size());
  for (const auto& [key, members] : groups) {
    Weight mass = plan.atoms()[members[0]].weight;
    for (std::size_t i = 1; i < members.size(); ++i) mass += plan.atoms()[members[i]].weight;

    std::size_t rep = members[0];
    if (rule == RepresentativeRule::lexicographic) {
      for (auto m : members)
        if (tuple_less(plan.atoms()[m].tuple, plan.atoms()[rep].tuple)) rep = m;
    } else {
      // centroid_nearest: sup metric distance to the product-cell center
      std::vector<Point> center(part.marginals.size());
      for (std::size_t k = 0; k < part.marginals.size(); ++k) {
        const PartitionCell* cell = part.marginals[k].find_cell(key[k]);
        Point c;
        for (const auto& [lo, hi] : cell->box) c.coords.push_back((lo + hi) / 2.0);
        center[k] = std::move(c);
      }
      auto dist_to_center = [&](std::size_t m) {
        double d = 0.0;
        for (std::size_t k = 0; k < center.size(); ++k)
          d = std::max(d, factor_distance(plan.atoms()[m].tuple[k], center[k]));
        return d;
      };
      double best = dist_to_center(rep);
      for (auto m : members) {
        double d = dist_to_center(m);
        if (d < best || (d == best && tuple_less(plan.atoms()[m].tuple, plan.atoms()[rep].tuple))) {
          best = d;
          rep = m;
        }
      }
    }
    atoms.push_back({plan.atoms()[rep].tuple, mass});
  }
  return DiscreteCoupling(plan.spaces(), plan.mode(), std::move(atoms), plan.mass_policy());
}

DiscreteCoupling recovery_sequence(const DiscreteCoupling& beta, const Partition& part,
                                   const std::vector<DiscreteMeasure>& targets) {
  const std::size_t n = beta.n_marginals();
  if (targets.size() != n)
    throw validation_error("recovery_sequence: one target per marginal required");
  for (std::size_t k = 0; k < n; ++k) {
    if (!(targets[k].space() == beta.spaces()[k]))
      throw validation_error("recovery_sequence: target space mismatch");
    if (targets[k].mode() != beta.mode())
      throw mode_mismatch("recovery_sequence: target weight mode differs from beta");
  }

  // Target atoms and masses per occupied component cell.
  struct CellSlice {
    std::vector<std::size_t> atom_idx;
    Weight mass;
  };
  std::vector<std::map<std::size_t, CellSlice>> slices(n);
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < targets[k].size(); ++i) {
      auto id = part.marginals[k].locate(targets[k].atoms()[i].point);
      if (!id) continue;  // only cells charged by beta matter below
      auto [it, fresh] = slices[k].try_emplace(*id, CellSlice{{}, targets[k].atoms()[i].weight});
      if (!fresh)
        it->second.mass += targets[k].atoms()[i].weight;
      it->second.atom_idx.push_back(i);
    }
  }

  auto groups = group_by_cell(beta, part);

  // Precondition: beta's marginal cell masses match the targets'.
  for (std::size_t k = 0; k < n; ++k) {
    std::map<std::size_t, Weight> beta_mass;
    for (std::size_t a = 0; a < beta.size(); ++a) {
      std::size_t id = *part.marginals[k].locate(beta.atoms()[a].tuple[k]);
      auto [it, fresh] = beta_mass.try_emplace(id, beta.atoms()[a].weight);
      if (!fresh) it->second += beta.atoms()[a].weight;
    }
    for (const auto& [id, mass] : beta_mass) {
      auto it = slices[k].find(id);
      Weight target_mass = it == slices[k].end()
                               ? (beta.mode() == WeightMode::rational ? Weight::rational(Rational(0))
                                                                      : Weight::floating(0.0))
                               : it->second.mass;
      bool equal = beta.mode() == WeightMode::rational
                       ? mass.rat() == target_mass.rat()
                       : std::abs(mass.flt() - target_mass.flt()) <= kFloatMassTol;
      if (!equal)
        throw validation_error("recovery_sequence: marginal cell masses differ from the targets");
    }
  }

  std::vector<CouplingAtom> atoms;
  for (const auto& [key, members] : groups) {
    Weight cell_mass = beta.atoms()[members[0]].weight;
    for (std::size_t i = 1; i < members.size(); ++i) cell_mass += beta.atoms()[members[i]].weight;

    std::vector<const CellSlice*> factors(n);
    for (std::size_t k = 0; k < n; ++k) {
      auto it = slices[k].find(key[k]);
      if (it == slices[k].end() || it->second.atom_idx.empty())
        throw validation_error("recovery_sequence: charged cell has zero target mass");
      factors[k] = &it->second;
    }
    // cross product over the component slices
    std::vector<std::size_t> pick(n, 0);
    while (true) {
      std::vector<Point> tuple(n);
      Weight w = cell_mass;
      for (std::size_t k = 0; k < n; ++k) {
        const auto& atom = targets[k].atoms()[factors[k]->atom_idx[pick[k]]];
        tuple[k] = atom.point;
        w = w * (atom.weight / factors[k]->mass);
      }
      atoms.push_back({std::move(tuple), w});
      std::size_t k = n;
      bool done = true;
      while (k > 0) {
        --k;
        if (++pick[k] < factors[k]->atom_idx.size()) {
          done = false;
          break;
        }
        pick[k] = 0;
      }
      if (done) break;
    }
  }
  return DiscreteCoupling(beta.spaces(), beta.mode(), std::move(atoms));
}

std::vector<ConvergenceRow> convergence_report(const DiscreteCoupling& plan, const CostSpec& cost,
                                               Objective objective, const std::vector<int>& levels,
                                               std::size_t dict_size) {
  if (levels.empty()) throw validation_error("convergence_report: levels must be nonempty");
  std::vector<std::vector<Point>> supports;
  for (std::size_t k = 0; k < plan.n_marginals(); ++k) {
    DiscreteMeasure m = marginal(plan, k);
    std::vector<Point> pts;
    pts.reserve(m.size());
    for (const auto& a : m.atoms()) pts.push_back(a.point);
    supports.push_back(std::move(pts));
  }
  std::vector<ConvergenceRow> rows;
  rows.reserve(levels.size());
  for (int n : levels) {
    Partition part = build_partition(plan.spaces(), supports, n);
    DiscreteCoupling alpha = discretize_plan(plan, part);
    ConvergenceRow row;
    row.level = n;
    row.delta = part.delta;
    row.discrepancy = bl_discrepancy(alpha, plan, dict_size);
    row.objective =
        objective == Objective::sum ? integral_cost(cost, alpha) : sup_cost(cost, alpha);
    row.epsilon_envelope = continuity_envelope(cost, plan.spaces(), part.delta);
    rows.push_back(row);
  }
  return rows;
}

double continuity_envelope(const CostSpec& cost, const std::vector<FactorSpace>& spaces,
                           double delta) {
  auto box_gap = [&](const FactorSpace& a, const FactorSpace& b) {
    // largest Euclidean distance between a point of box a and one of box b
    double s = 0.0;
    for (std::size_t d = 0; d < a.dim; ++d) {
      double g = std::max(a.bounds[d][1] - b.bounds[d][0], b.bounds[d][1] - a.bounds[d][0]);
      s += g * g;
    }
    return std::sqrt(s);
  };
  switch (cost.kind()) {
    case CostKind::power_distance: {
      if (spaces.size() != 2 || spaces[0].dim != spaces[1].dim)
        return std::numeric_limits<double>::quiet_NaN();
      double d_max = box_gap(spaces[0], spaces[1]);
      double p = cost.power();
      // each endpoint moves < delta/2, so the distance moves < delta
      if (p >= 1.0) return p * std::pow(d_max, p - 1.0) * delta;
      return std::pow(delta, p);
    }
    case CostKind::squared_sum_barycenter: {
      double total = 0.0;
      for (std::size_t i = 0; i < spaces.size(); ++i)
        for (std::size_t j = i + 1; j < spaces.size(); ++j) {
          if (spaces[i].dim != spaces[j].dim) return std::numeric_limits<double>::quiet_NaN();
          total += 2.0 * box_gap(spaces[i], spaces[j]) * delta;
        }
      return total;
    }
    case CostKind::equality_indicator:
    case CostKind::tensor:
      return std::numeric_limits<double>::quiet_NaN();
  }
  return std::numeric_limits<double>::quiet_NaN();
}

}  // namespace motcert
