#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "motcert/discretization.hpp"
#include "motcert/measures.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

using namespace motcert;
using testing::Rng;

namespace {

FactorSpace unit_box() { return FactorSpace(1, {{0.0, 1.0}}); }

DiscreteCoupling two_atom_plan(double x1, double y1, double x2, double y2) {
  return DiscreteCoupling({unit_box(), FactorSpace(1, {{0.0, 2.0}})}, WeightMode::rational,
                          {{{Point{x1}, Point{y1}}, Weight::rational(1, 2)},
                           {{Point{x2}, Point{y2}}, Weight::rational(1, 2)}});
}

DiscreteCoupling diagonal_plan(std::size_t m) {
  std::vector<CouplingAtom> atoms;
  for (std::size_t i = 0; i < m; ++i) {
    double x = static_cast<double>(i) / static_cast<double>(m);
    atoms.push_back({{Point{x}, Point{x}}, Weight::rational(1, static_cast<long>(m))});
  }
  return DiscreteCoupling({unit_box(), unit_box()}, WeightMode::rational, std::move(atoms));
}

}  // namespace

TEST_CASE("validation rejects malformed objects") {
  CHECK_THROWS_AS(FactorSpace(1, {{1.0, 1.0}}), validation_error);
  CHECK_THROWS_AS(DiscreteMeasure(unit_box(), WeightMode::rational,
                                  {{Point{0.5}, Weight::rational(1, 2)}}),
                  validation_error);  // mass 1/2 only
  CHECK_THROWS_AS(DiscreteMeasure(unit_box(), WeightMode::rational,
                                  {{Point{0.5}, Weight::rational(1, 2)},
                                   {Point{0.5}, Weight::rational(1, 2)}}),
                  validation_error);  // duplicate atoms
  CHECK_THROWS_AS(DiscreteMeasure(unit_box(), WeightMode::rational,
                                  {{Point{2.0}, Weight::rational(1, 1)}}),
                  validation_error);  // outside bounds
  CHECK_THROWS_AS(Weight::rational(1, 2) + Weight::floating(0.5), mode_mismatch);
}

TEST_CASE("marginal of a single-atom plan is a Dirac mass") {
  DiscreteCoupling plan({unit_box(), unit_box()}, WeightMode::rational,
                        {{{Point{0.0}, Point{0.0}}, Weight::rational(1, 1)}});
  for (std::size_t k : {0u, 1u}) {
    DiscreteMeasure m = marginal(plan, k);
    REQUIRE(m.size() == 1);
    CHECK(m.atoms()[0].point == Point{0.0});
    CHECK(m.atoms()[0].weight.rat() == 1);
  }
  CHECK_THROWS_AS(marginal(plan, 2), validation_error);
}

TEST_CASE("marginal merges coinciding coordinates") {
  DiscreteCoupling plan = two_atom_plan(0, 1, 1, 1);
  DiscreteMeasure m = marginal(plan, 1);
  REQUIRE(m.size() == 1);
  CHECK(m.atoms()[0].point == Point{1.0});
  CHECK(m.atoms()[0].weight.rat() == 1);
}

TEST_CASE("discretized diagonal plan has matching first-marginal cell masses") {
  DiscreteCoupling plan = diagonal_plan(4);
  std::vector<std::vector<Point>> supports;
  for (std::size_t k = 0; k < 2; ++k) {
    std::vector<Point> pts;
    DiscreteMeasure m = marginal(plan, k);
    for (const auto& a : m.atoms()) pts.push_back(a.point);
    supports.push_back(pts);
  }
  Partition part = build_partition(plan.spaces(), supports, 1);
  DiscreteCoupling alpha = discretize_plan(plan, part);
  DiscreteMeasure mu = marginal(plan, 0);
  DiscreteMeasure mu_n = marginal(alpha, 0);
  for (const auto& cell : part.marginals[0].cells) {
    std::vector<Point> members;
    for (const auto& a : mu.atoms())
      if (part.marginals[0].locate(a.point) == cell.id) members.push_back(a.point);
    CHECK(testing::measure_mass(mu_n, members) == testing::measure_mass(mu, members));
  }
}

TEST_CASE("marginal weights of generated plans sum to one exactly") {
  Rng rng(11);
  for (int round = 0; round < 30; ++round) {
    std::vector<FactorSpace> spaces{unit_box(), FactorSpace(2, {{0.0, 1.0}, {-1.0, 1.0}})};
    DiscreteCoupling plan = testing::random_plan(rng, spaces, 2 + rng.index(10), WeightMode::rational);
    for (std::size_t k = 0; k < plan.n_marginals(); ++k) {
      Rational total = 0;
      DiscreteMeasure m = marginal(plan, k);
      for (const auto& a : m.atoms()) total += a.weight.rat();
      CHECK(total == 1);
    }
  }
}

TEST_CASE("marginal mass on a point set equals the cylinder mass of the plan") {
  Rng rng(12);
  for (int round = 0; round < 20; ++round) {
    std::vector<FactorSpace> spaces{unit_box(), unit_box()};
    DiscreteCoupling plan = testing::random_plan(rng, spaces, 8, WeightMode::rational);
    for (std::size_t k = 0; k < 2; ++k) {
      DiscreteMeasure m = marginal(plan, k);
      std::vector<Point> subset;
      for (const auto& a : m.atoms())
        if (rng.index(2) == 0) subset.push_back(a.point);
      CHECK(testing::measure_mass(m, subset) == testing::cylinder_mass(plan, k, subset));
    }
  }
}

TEST_CASE("sample_submeasure at full size reproduces the support uniformly") {
  DiscreteCoupling plan = diagonal_plan(5);
  DiscreteCoupling sub = sample_submeasure(plan, 5, 3);
  REQUIRE(sub.size() == 5);
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(sub.atoms()[i].tuple == plan.atoms()[i].tuple);
    CHECK(sub.atoms()[i].weight.rat() == Rational(1, 5));
  }
}

TEST_CASE("sample_submeasure with l=1 is a Dirac mass") {
  DiscreteCoupling plan = diagonal_plan(6);
  DiscreteCoupling sub = sample_submeasure(plan, 1, 9);
  REQUIRE(sub.size() == 1);
  CHECK(sub.atoms()[0].weight.rat() == 1);
}

TEST_CASE("sample_submeasure picks support tuples, deterministically per seed") {
  Rng rng(13);
  DiscreteCoupling plan =
      testing::random_plan(rng, {unit_box(), unit_box()}, 10, WeightMode::rational);
  DiscreteCoupling sub = sample_submeasure(plan, 3, 7);
  REQUIRE(sub.size() == 3);
  auto support = plan.support();
  for (const auto& atom : sub.atoms()) {
    CHECK(atom.weight.rat() == Rational(1, 3));
    bool member = false;
    for (const auto& t : support) member = member || t == atom.tuple;
    CHECK(member);
  }
  DiscreteCoupling again = sample_submeasure(plan, 3, 7);
  for (std::size_t i = 0; i < 3; ++i) CHECK(again.atoms()[i].tuple == sub.atoms()[i].tuple);
  CHECK_THROWS_AS(sample_submeasure(plan, 0, 1), validation_error);
  CHECK_THROWS_AS(sample_submeasure(plan, 11, 1), validation_error);
}

TEST_CASE("bl_discrepancy vanishes on identical measures and separates Diracs") {
  DiscreteMeasure d0(unit_box(), WeightMode::rational, {{Point{0.0}, Weight::rational(1, 1)}});
  DiscreteMeasure d1(unit_box(), WeightMode::rational, {{Point{1.0}, Weight::rational(1, 1)}});
  CHECK(bl_discrepancy(d0, d0, 8) == 0.0);
  double gap = bl_discrepancy(d0, d1, 8);
  CHECK(gap > 0.0);
  CHECK(gap <= 2.0);
  CHECK_THROWS_AS(bl_discrepancy(d0, DiscreteMeasure(FactorSpace(1, {{0.0, 2.0}}),
                                                     WeightMode::rational,
                                                     {{Point{1.0}, Weight::rational(1, 1)}}),
                                 8),
                  validation_error);
}

TEST_CASE("bl_discrepancy is symmetric, nonnegative, zero iff merged-equal") {
  Rng rng(14);
  for (int round = 0; round < 15; ++round) {
    DiscreteMeasure a = testing::random_measure(rng, unit_box(), 4, WeightMode::rational);
    DiscreteMeasure b = testing::random_measure(rng, unit_box(), 4, WeightMode::rational);
    double ab = bl_discrepancy(a, b, 12);
    CHECK(ab == bl_discrepancy(b, a, 12));
    CHECK(ab >= 0.0);
    CHECK(ab > 0.0);  // distinct random supports
    CHECK(bl_discrepancy(a, a, 12) == 0.0);
  }
}

TEST_CASE("discretization discrepancy decays along levels 2,4,8,16 on the diagonal fixture") {
  DiscreteCoupling plan = diagonal_plan(4);
  std::vector<std::vector<Point>> supports;
  for (std::size_t k = 0; k < 2; ++k) {
    std::vector<Point> pts;
    DiscreteMeasure m = marginal(plan, k);
    for (const auto& a : m.atoms()) pts.push_back(a.point);
    supports.push_back(pts);
  }
  double prev = std::numeric_limits<double>::infinity();
  for (int n : {2, 4, 8, 16}) {
    Partition part = build_partition(plan.spaces(), supports, n);
    DiscreteCoupling alpha = discretize_plan(plan, part);
    double d = bl_discrepancy(alpha, plan, 8);
    CHECK(d <= prev);
    prev = d;
  }
}

TEST_CASE("submeasure support is always contained in the plan support") {
  Rng rng(15);
  DiscreteCoupling plan =
      testing::random_plan(rng, {unit_box(), unit_box()}, 12, WeightMode::rational);
  auto support = plan.support();
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    DiscreteCoupling sub = sample_submeasure(plan, 1 + rng.index(12), seed);
    for (const auto& atom : sub.atoms()) {
      bool member = false;
      for (const auto& t : support) member = member || t == atom.tuple;
      CHECK(member);
    }
  }
}

TEST_CASE("floating-mode merging uses the coordinate tolerance") {
  // first components coincide within the tolerance, the tuples do not
  DiscreteCoupling plan({unit_box(), unit_box()}, WeightMode::floating,
                        {{{Point{0.0}, Point{0.3}}, Weight::floating(0.5)},
                         {{Point{1e-13}, Point{0.7}}, Weight::floating(0.5)}},
                        MassPolicy::probability);
  DiscreteMeasure m = marginal(plan, 0);
  REQUIRE(m.size() == 1);
  CHECK(m.atoms()[0].weight.flt() == doctest::Approx(1.0).epsilon(1e-12));
  // tolerance-coincident tuples are rejected as duplicates
  CHECK_THROWS_AS(DiscreteCoupling({unit_box(), unit_box()}, WeightMode::floating,
                                   {{{Point{0.0}, Point{0.5}}, Weight::floating(0.5)},
                                    {{Point{1e-13}, Point{0.5 + 1e-13}}, Weight::floating(0.5)}},
                                   MassPolicy::probability),
                  validation_error);
}
