#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "motcert/discretization.hpp"
#include "motcert/experiments.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

using namespace motcert;
using testing::Rng;

namespace {

FactorSpace unit_box() { return FactorSpace(1, {{0.0, 1.0}}); }

DiscreteCoupling diagonal_plan(std::size_t m) {
  std::vector<CouplingAtom> atoms;
  for (std::size_t i = 0; i < m; ++i) {
    double x = static_cast<double>(i) / static_cast<double>(m);
    atoms.push_back({{Point{x}, Point{x}}, Weight::rational(1, static_cast<long>(m))});
  }
  return DiscreteCoupling({unit_box(), unit_box()}, WeightMode::rational, std::move(atoms));
}

std::vector<std::vector<Point>> marginal_supports(const DiscreteCoupling& plan) {
  std::vector<std::vector<Point>> supports;
  for (std::size_t k = 0; k < plan.n_marginals(); ++k) {
    std::vector<Point> pts;
    DiscreteMeasure m = marginal(plan, k);
    for (const auto& a : m.atoms()) pts.push_back(a.point);
    supports.push_back(std::move(pts));
  }
  return supports;
}

}  // namespace

TEST_CASE("level-one partition covers both endpoint atoms with small cells") {
  std::vector<Point> atoms{Point{0.0}, Point{1.0}};
  Partition part = build_partition({unit_box(), unit_box()}, {atoms, atoms}, 1);
  const auto& mp = part.marginals[0];
  CHECK(mp.cells.size() >= 2);
  for (const auto& cell : mp.cells) {
    double w = cell.box[0][1] - cell.box[0][0];
    CHECK(w < part.delta / 2.0);
  }
  CHECK(mp.locate(Point{0.0}).has_value());
  CHECK(mp.locate(Point{1.0}).has_value());
  CHECK(part.nesting[0].empty());  // no coarser level to nest into
  CHECK_THROWS_AS(build_partition({unit_box()}, {std::vector<Point>{}}, 1), validation_error);
}

TEST_CASE("level two refines level one cell by cell") {
  Rng rng(61);
  auto atoms = testing::distinct_points(rng, unit_box(), 9);
  Partition fine = build_partition({unit_box(), unit_box()}, {atoms, atoms}, 2);
  Partition coarse = build_partition({unit_box(), unit_box()}, {atoms, atoms}, 1);
  REQUIRE(!fine.nesting[0].empty());
  for (const auto& [child, parent] : fine.nesting[0]) {
    const PartitionCell* c = fine.marginals[0].find_cell(child);
    const PartitionCell* p = coarse.marginals[0].find_cell(parent);
    REQUIRE(c != nullptr);
    REQUIRE(p != nullptr);
    CHECK(c->box[0][0] >= p->box[0][0]);
    CHECK(c->box[0][1] <= p->box[0][1]);
  }
}

TEST_CASE("single-atom support keeps a single cell per level") {
  std::vector<Point> atom{Point{0.375}};
  for (int level : {1, 2, 3}) {
    Partition part = build_partition({unit_box(), unit_box()}, {atom, atom}, level);
    CHECK(part.marginals[0].cells.size() == 1);
    CHECK(part.marginals[0].cells[0].representative == atom[0]);
  }
}

TEST_CASE("plans with one atom per cell are fixed points of discretization") {
  DiscreteCoupling plan = diagonal_plan(4);
  // cell width 1/4 on the unit box: a custom schedule with delta just above
  // twice the width keeps exactly four cells per marginal
  DeltaSchedule quarter = [](int) { return 0.6; };
  Partition part = build_partition(plan.spaces(), marginal_supports(plan), 1, quarter);
  CHECK(part.marginals[0].subdivisions == 4);
  DiscreteCoupling alpha = discretize_plan(plan, part);
  REQUIRE(alpha.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(alpha.atoms()[i].tuple == plan.atoms()[i].tuple);
    CHECK(alpha.atoms()[i].weight.rat() == Rational(1, 4));
  }
  // marginal cell masses survive the collapse
  DiscreteMeasure mu = marginal(plan, 0);
  DiscreteMeasure mu_n = marginal(alpha, 0);
  for (const auto& cell : part.marginals[0].cells) {
    std::vector<Point> members;
    for (const auto& a : mu.atoms())
      if (part.marginals[0].locate(a.point) == cell.id) members.push_back(a.point);
    CHECK(testing::measure_mass(mu_n, members) == testing::measure_mass(mu, members));
  }
}

TEST_CASE("representative rules pick lexicographic vs centroid-nearest tuples") {
  FactorSpace bx = unit_box();
  DiscreteCoupling plan({bx, bx}, WeightMode::rational,
                        {{{Point{0.05}, Point{0.05}}, Weight::rational(1, 2)},
                         {{Point{0.3}, Point{0.3}}, Weight::rational(1, 2)}});
  DeltaSchedule whole_box = [](int) { return 2.2; };  // one cell per marginal
  Partition part = build_partition(plan.spaces(), {{Point{0.05}, Point{0.3}},
                                                   {Point{0.05}, Point{0.3}}},
                                   1, whole_box);
  REQUIRE(part.marginals[0].cells.size() == 1);
  DiscreteCoupling lex = discretize_plan(plan, part, RepresentativeRule::lexicographic);
  REQUIRE(lex.size() == 1);
  CHECK(lex.atoms()[0].tuple[0] == Point{0.05});
  CHECK(lex.atoms()[0].weight.rat() == 1);
  DiscreteCoupling near = discretize_plan(plan, part, RepresentativeRule::centroid_nearest);
  REQUIRE(near.size() == 1);
  CHECK(near.atoms()[0].tuple[0] == Point{0.3});  // closer to the cell center 0.5
}

TEST_CASE("discretization rejects atoms outside the partition") {
  DiscreteCoupling plan = diagonal_plan(4);
  std::vector<Point> short_support{Point{0.0}, Point{0.25}};
  Partition part = build_partition(plan.spaces(), {short_support, short_support}, 3);
  CHECK_THROWS_AS(discretize_plan(plan, part), validation_error);
}

TEST_CASE("cell masses of the discretized plan match the plan exactly at all levels") {
  Rng rng(62);
  for (int round = 0; round < 10; ++round) {
    DiscreteCoupling plan = testing::random_plan(rng, {unit_box(), unit_box()},
                                                 3 + rng.index(12), WeightMode::rational);
    auto supports = marginal_supports(plan);
    for (int level : {1, 2, 3, 4}) {
      Partition part = build_partition(plan.spaces(), supports, level);
      DiscreteCoupling alpha = discretize_plan(plan, part);
      Rational total = 0;
      for (const auto& a : alpha.atoms()) total += a.weight.rat();
      CHECK(total == 1);
      for (std::size_t k = 0; k < 2; ++k) {
        DiscreteMeasure mu = marginal(plan, k);
        DiscreteMeasure mu_n = marginal(alpha, k);
        for (const auto& cell : part.marginals[k].cells) {
          std::vector<Point> members_plan, members_alpha;
          for (const auto& a : mu.atoms())
            if (part.marginals[k].locate(a.point) == cell.id) members_plan.push_back(a.point);
          for (const auto& a : mu_n.atoms())
            if (part.marginals[k].locate(a.point) == cell.id) members_alpha.push_back(a.point);
          CHECK(testing::measure_mass(mu, members_plan) ==
                testing::measure_mass(mu_n, members_alpha));
        }
      }
    }
  }
}

TEST_CASE("finer discretizations refine coarser ones") {
  Rng rng(63);
  DiscreteCoupling plan =
      testing::random_plan(rng, {unit_box(), unit_box()}, 20, WeightMode::rational);
  auto supports = marginal_supports(plan);
  Partition coarse = build_partition(plan.spaces(), supports, 2);
  Partition fine = build_partition(plan.spaces(), supports, 3);
  DiscreteCoupling alpha_fine = discretize_plan(plan, fine);
  DiscreteCoupling alpha_coarse = discretize_plan(plan, coarse);
  // every fine atom sits in the coarse cell of the coarse representative of
  // its own product cell
  for (const auto& fine_atom : alpha_fine.atoms()) {
    std::vector<std::size_t> coarse_key(2), coarse_rep_key(2);
    for (std::size_t k = 0; k < 2; ++k)
      coarse_key[k] = *coarse.marginals[k].locate(fine_atom.tuple[k]);
    bool found = false;
    for (const auto& coarse_atom : alpha_coarse.atoms()) {
      bool same = true;
      for (std::size_t k = 0; k < 2; ++k)
        same = same && *coarse.marginals[k].locate(coarse_atom.tuple[k]) == coarse_key[k];
      found = found || same;
    }
    CHECK(found);
  }
}

TEST_CASE("recovery of the discretized plan is the discretized plan") {
  DiscreteCoupling plan = diagonal_plan(4);
  Partition part = build_partition(plan.spaces(), marginal_supports(plan), 2);
  DiscreteCoupling alpha = discretize_plan(plan, part);
  std::vector<DiscreteMeasure> targets{marginal(alpha, 0), marginal(alpha, 1)};
  DiscreteCoupling beta_n = recovery_sequence(alpha, part, targets);
  REQUIRE(beta_n.size() == alpha.size());
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    CHECK(beta_n.atoms()[i].tuple == alpha.atoms()[i].tuple);
    CHECK(beta_n.atoms()[i].weight.rat() == alpha.atoms()[i].weight.rat());
  }
}

TEST_CASE("recovery splits a two-atom cell proportionally") {
  // marginal one has two atoms in one cell with masses 1/3 and 2/3
  FactorSpace bx = unit_box();
  DiscreteCoupling beta({bx, bx}, WeightMode::rational,
                        {{{Point{0.1}, Point{0.9}}, Weight::rational(1, 1)}});
  DeltaSchedule wide = [](int level) { return level == 1 ? 4.0 : 2.0; };
  // one cell per marginal at level 1 under this schedule
  Partition part = build_partition(beta.spaces(), {{Point{0.1}}, {Point{0.9}}}, 1, wide);
  REQUIRE(part.marginals[0].cells.size() == 1);
  DiscreteMeasure target0(bx, WeightMode::rational,
                          {{Point{0.05}, Weight::rational(1, 3)},
                           {Point{0.15}, Weight::rational(2, 3)}});
  DiscreteMeasure target1(bx, WeightMode::rational, {{Point{0.9}, Weight::rational(1, 1)}});
  DiscreteCoupling beta_n = recovery_sequence(beta, part, {target0, target1});
  REQUIRE(beta_n.size() == 2);
  CHECK(beta_n.atoms()[0].tuple[0] == Point{0.05});
  CHECK(beta_n.atoms()[0].weight.rat() == Rational(1, 3));
  CHECK(beta_n.atoms()[1].tuple[0] == Point{0.15});
  CHECK(beta_n.atoms()[1].weight.rat() == Rational(2, 3));
  CHECK(measures_equal(marginal(beta_n, 0), target0));
  CHECK(measures_equal(marginal(beta_n, 1), target1));
}

TEST_CASE("recovery marginals equal the targets exactly on random fixtures") {
  Rng rng(64);
  for (int round = 0; round < 10; ++round) {
    std::size_t m = 3 + rng.index(3);
    auto grid = testing::unit_grid(m);
    auto grids = std::vector<std::vector<Point>>{grid, grid};
    DiscreteCoupling gamma = testing::permutation_mixture(rng, grids, 2, WeightMode::rational);
    DiscreteCoupling beta = testing::permutation_mixture(rng, grids, 3, WeightMode::rational);
    auto supports = marginal_supports(gamma);
    int level = 1 + static_cast<int>(rng.index(3));
    Partition part = build_partition(gamma.spaces(), supports, level);
    DiscreteCoupling alpha = discretize_plan(gamma, part);
    std::vector<DiscreteMeasure> targets;
    for (std::size_t k = 0; k < 2; ++k) targets.push_back(marginal(alpha, k));
    DiscreteCoupling beta_n = recovery_sequence(beta, part, targets);
    for (std::size_t k = 0; k < 2; ++k) CHECK(measures_equal(marginal(beta_n, k), targets[k]));
    // raw marginals as targets split cells across their own atoms
    std::vector<DiscreteMeasure> raw{marginal(gamma, 0), marginal(gamma, 1)};
    DiscreteCoupling beta_raw = recovery_sequence(beta, part, raw);
    for (std::size_t k = 0; k < 2; ++k) CHECK(measures_equal(marginal(beta_raw, k), raw[k]));
  }
}

TEST_CASE("recovery rejects a charged cell with no target mass") {
  FactorSpace bx = unit_box();
  DiscreteCoupling beta({bx, bx}, WeightMode::rational,
                        {{{Point{0.1}, Point{0.9}}, Weight::rational(1, 2)},
                         {{Point{0.9}, Point{0.1}}, Weight::rational(1, 2)}});
  Partition part =
      build_partition(beta.spaces(), {{Point{0.1}, Point{0.9}}, {Point{0.1}, Point{0.9}}}, 2);
  DiscreteMeasure bad(bx, WeightMode::rational, {{Point{0.1}, Weight::rational(1, 1)}});
  DiscreteMeasure fine(bx, WeightMode::rational,
                       {{Point{0.1}, Weight::rational(1, 2)}, {Point{0.9}, Weight::rational(1, 2)}});
  CHECK_THROWS_AS(recovery_sequence(beta, part, {bad, fine}), validation_error);
}

TEST_CASE("convergence report: constant cost gives a constant objective column") {
  DiscreteCoupling plan = diagonal_plan(5);
  auto grid_pts = marginal_supports(plan);
  CostSpec constant = CostSpec::equality_indicator(1.0, 1.0);
  auto rows = convergence_report(plan, constant, Objective::sum, {1, 2, 3});
  for (const auto& r : rows) CHECK(r.objective == 1.0);
  CHECK_THROWS_AS(convergence_report(plan, constant, Objective::sum, {}), validation_error);
}

TEST_CASE("convergence report: identity plan objective stays inside the envelope") {
  DiscreteCoupling plan = diagonal_plan(8);
  auto rows = convergence_report(plan, CostSpec::power_distance(2.0), Objective::sum,
                                 {1, 2, 3, 4, 5});
  double base = integral_cost(CostSpec::power_distance(2.0), plan);
  CHECK(base == 0.0);
  for (const auto& r : rows) {
    CHECK(std::isfinite(r.epsilon_envelope));
    CHECK(std::abs(r.objective - base) <= r.epsilon_envelope);
  }
}

TEST_CASE("convergence report: rotation plan objective is constantly two") {
  DiscreteCoupling rot = make_rotation_plan(AlphaSpec::sqrt2_minus_one(), 16);
  auto rows =
      convergence_report(rot, CostSpec::equality_indicator(1, 2), Objective::max, {1, 2, 3});
  for (const auto& r : rows) {
    CHECK(r.objective == 2.0);
    CHECK(std::isnan(r.epsilon_envelope));  // discontinuous cost: no modulus
  }
}

TEST_CASE("random plans keep their objective within the continuity envelope") {
  Rng rng(65);
  for (int round = 0; round < 8; ++round) {
    DiscreteCoupling plan = testing::random_plan(rng, {unit_box(), unit_box()},
                                                 4 + rng.index(10), WeightMode::rational);
    CostSpec cost = round % 2 == 0 ? CostSpec::power_distance(2.0) : CostSpec::power_distance(1.0);
    Objective obj = round % 3 == 0 ? Objective::max : Objective::sum;
    double base = obj == Objective::sum ? integral_cost(cost, plan) : sup_cost(cost, plan);
    for (const auto& r : convergence_report(plan, cost, obj, {1, 2, 3})) {
      CHECK(std::abs(r.objective - base) <= r.epsilon_envelope);
    }
  }
}

TEST_CASE("discrepancy column is nonincreasing for the frozen 50-atom fixture") {
  Rng rng(66);
  DiscreteCoupling plan =
      testing::random_plan(rng, {unit_box(), unit_box()}, 50, WeightMode::rational);
  auto rows = convergence_report(plan, CostSpec::power_distance(2.0), Objective::sum,
                                 {1, 2, 3, 4, 5});
  for (std::size_t i = 1; i < rows.size(); ++i)
    CHECK(rows[i].discrepancy <= rows[i - 1].discrepancy);
}
