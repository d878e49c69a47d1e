#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <map>

#include "motcert/experiments.hpp"
#include "motcert/monotonicity.hpp"
#include "support/generators.hpp"

using namespace motcert;
using testing::Rng;

namespace {

std::vector<std::vector<Point>> pair_support(std::initializer_list<std::pair<double, double>> pts) {
  std::vector<std::vector<Point>> support;
  for (auto [x, y] : pts) support.push_back({Point{x}, Point{y}});
  return support;
}

FactorSpace unit_box() { return FactorSpace(1, {{0.0, 1.0}}); }

}  // namespace

TEST_CASE("monotone pairing carries no sum-aggregate certificate") {
  auto cert = check_cm(pair_support({{0, 0}, {1, 1}}), CostSpec::power_distance(2.0), 2);
  CHECK(!cert.has_value());
}

TEST_CASE("anti-monotone pairing yields the swap certificate") {
  auto cert = check_cm(pair_support({{0, 1}, {1, 0}}), CostSpec::power_distance(2.0), 2);
  REQUIRE(cert.has_value());
  CHECK(cert->before == 2.0);
  CHECK(cert->after == 0.0);
  CHECK(cert->aggregate == AggregateKind::sum);
  REQUIRE(cert->permutations.size() == 1);
  CHECK(cert->permutations[0] == std::vector<std::size_t>{1, 0});  // the transposition
  auto [before, after] = recompute_certificate(*cert, CostSpec::power_distance(2.0));
  CHECK(before == cert->before);
  CHECK(after == cert->after);
}

TEST_CASE("single-tuple support never violates") {
  CHECK(!check_icm(pair_support({{0.25, 0.75}}), CostSpec::equality_indicator(1, 2), 3));
}

TEST_CASE("k_max and guard validation") {
  auto support = pair_support({{0, 0}, {1, 1}});
  CHECK_THROWS_AS(check_cm(support, CostSpec::power_distance(2.0), 1), validation_error);
  CHECK_THROWS_AS(check_cm(support, CostSpec::power_distance(2.0), 6), guard_exceeded);
  GuardConfig tight;
  tight.max_certificate_evals = 2;
  CHECK_THROWS_AS(check_cm(support, CostSpec::power_distance(2.0), 2, tight), guard_exceeded);
}

TEST_CASE("irrational rotation support is max-aggregate compliant") {
  DiscreteCoupling rot = make_rotation_plan(AlphaSpec::sqrt2_minus_one(), 30);
  CHECK(!check_icm(rot.support(), CostSpec::equality_indicator(1, 2), 4));
}

TEST_CASE("rational rotation support closes a cycle at the denominator") {
  DiscreteCoupling rot = make_rotation_plan(AlphaSpec::rational(Rational(1, 3)), 30);
  auto cert = check_icm(rot.support(), CostSpec::equality_indicator(1, 2), 3);
  REQUIRE(cert.has_value());
  CHECK(cert->tuples.size() == 3);
  CHECK(cert->before == 2.0);
  CHECK(cert->after == 1.0);
  auto [before, after] = recompute_certificate(*cert, CostSpec::equality_indicator(1, 2));
  CHECK(before == cert->before);
  CHECK(after == cert->after);
  // no certificate below the cycle length
  CHECK(!check_icm(rot.support(), CostSpec::equality_indicator(1, 2), 2));
}

TEST_CASE("identity permutations always give equal aggregates") {
  Rng rng(36);
  CostSpec p2 = CostSpec::power_distance(2.0);
  for (int round = 0; round < 10; ++round) {
    DiscreteCoupling plan =
        testing::random_plan(rng, {unit_box(), unit_box()}, 5, WeightMode::rational);
    auto support = plan.support();
    for (std::size_t k = 2; k <= 3; ++k) {
      Certificate identity;
      identity.aggregate = round % 2 == 0 ? AggregateKind::sum : AggregateKind::max;
      std::vector<std::size_t> idperm(k);
      for (std::size_t i = 0; i < k; ++i) {
        identity.tuples.push_back(support[rng.index(support.size())]);
        idperm[i] = i;
      }
      identity.permutations = {idperm};
      auto [before, after] = recompute_certificate(identity, p2);
      CHECK(before == after);
    }
  }
}

TEST_CASE("certificates found on random supports re-validate") {
  Rng rng(31);
  CostSpec p2 = CostSpec::power_distance(2.0);
  int found = 0;
  for (int round = 0; round < 20; ++round) {
    DiscreteCoupling plan =
        testing::random_plan(rng, {unit_box(), unit_box()}, 4, WeightMode::rational);
    auto cert = check_cm(plan.support(), p2, 3);
    if (!cert) continue;
    ++found;
    auto [before, after] = recompute_certificate(*cert, p2);
    CHECK(before == cert->before);
    CHECK(after == cert->after);
    CHECK(after < before);
    for (const auto& tuple : cert->tuples) {
      bool member = false;
      for (const auto& s : plan.support()) member = member || s == tuple;
      CHECK(member);
    }
  }
  CHECK(found > 0);  // random couplings are rarely monotone
}

TEST_CASE("expand_to_table repeats atoms by multiplicity, grouped") {
  FactorSpace box = unit_box();
  DiscreteCoupling m({box, box}, WeightMode::rational,
                     {{{Point{0.0}, Point{0.5}}, Weight::rational(2, 1)},
                      {{Point{1.0}, Point{0.25}}, Weight::rational(1, 1)}},
                     MassPolicy::positive_only);
  IntegerTable table = expand_to_table(m);
  REQUIRE(table.rows.size() == 3);
  CHECK(table.rows[0] == table.rows[1]);
  CHECK(table.atom_index == std::vector<std::size_t>{0, 0, 1});

  DiscreteCoupling single({box, box}, WeightMode::rational,
                          {{{Point{0.0}, Point{0.5}}, Weight::rational(1, 1)}},
                          MassPolicy::positive_only);
  CHECK(expand_to_table(single).rows.size() == 1);

  DiscreteCoupling weighted({box, box}, WeightMode::rational,
                            {{{Point{0.0}, Point{0.5}}, Weight::rational(3, 1)},
                             {{Point{1.0}, Point{0.25}}, Weight::rational(2, 1)}},
                            MassPolicy::positive_only);
  IntegerTable t2 = expand_to_table(weighted);
  REQUIRE(t2.rows.size() == 5);
  CHECK(t2.rows[0] == t2.rows[2]);

  DiscreteCoupling fractional({box, box}, WeightMode::rational,
                              {{{Point{0.0}, Point{0.5}}, Weight::rational(1, 2)},
                               {{Point{1.0}, Point{0.25}}, Weight::rational(1, 2)}});
  CHECK_THROWS_AS(expand_to_table(fractional), validation_error);
}

TEST_CASE("find_permutations on identical tables returns identities") {
  Rng rng(32);
  auto pair = testing::random_table_pair(rng, 2, 4);
  auto perms = find_permutations(pair.table_a, pair.table_a);
  REQUIRE(perms.has_value());
  for (const auto& sigma : *perms)
    for (std::size_t i = 0; i < sigma.size(); ++i) CHECK(sigma[i] == i);
}

TEST_CASE("find_permutations recovers the crossing of a two-row table") {
  FactorSpace box = unit_box();
  auto coupling = [&](double x1, double y1, double x2, double y2) {
    return DiscreteCoupling({box, box}, WeightMode::rational,
                            {{{Point{x1}, Point{y1}}, Weight::rational(1, 1)},
                             {{Point{x2}, Point{y2}}, Weight::rational(1, 1)}},
                            MassPolicy::positive_only);
  };
  IntegerTable a = expand_to_table(coupling(0.0, 0.25, 1.0, 0.75));
  IntegerTable b = expand_to_table(coupling(0.0, 0.75, 1.0, 0.25));
  auto perms = find_permutations(a, b);
  REQUIRE(perms.has_value());
  REQUIRE(perms->size() == 1);
  CHECK((*perms)[0] == std::vector<std::size_t>{1, 0});

  // different first-column multisets: no permutations exist
  IntegerTable c = expand_to_table(coupling(0.5, 0.25, 1.0, 0.75));
  CHECK(!find_permutations(a, c).has_value());
  IntegerTable one_row = expand_to_table(DiscreteCoupling(
      {box, box}, WeightMode::rational, {{{Point{0.0}, Point{0.25}}, Weight::rational(1, 1)}},
      MassPolicy::positive_only));
  CHECK_THROWS_AS(find_permutations(a, one_row), validation_error);
}

TEST_CASE("recovered permutations reproduce B's row multiset") {
  Rng rng(33);
  for (int round = 0; round < 50; ++round) {
    std::size_t n = 2 + rng.index(2);
    std::size_t rows = 2 + rng.index(5);
    auto pair = testing::random_table_pair(rng, n, rows);
    auto perms = find_permutations(pair.table_a, pair.table_b);
    REQUIRE(perms.has_value());
    auto rebuilt = reassigned_rows(pair.table_a, *perms);
    std::map<std::vector<Point>, int> expected, actual;
    for (const auto& r : pair.table_b.rows) expected[r]++;
    for (const auto& r : rebuilt) actual[r]++;
    CHECK(expected == actual);
  }
}

TEST_CASE("finite-optimality audit accepts a re-solved optimum") {
  Rng rng(34);
  MotInstance inst = testing::oracle_instance(rng, 5, 2.0, Objective::sum);
  Solution sol = solve_integral_mot(inst);
  auto report = check_finite_optimality(sol.plan, inst.cost, Objective::sum, 10, 3, 5);
  CHECK(report.all_pass);
  for (const auto& t : report.trials) CHECK(t.gap <= 0.0);
}

TEST_CASE("finite-optimality audit rejects the anti-monotone pairing") {
  FactorSpace box = unit_box();
  DiscreteCoupling anti({box, box}, WeightMode::rational,
                        {{{Point{0.0}, Point{1.0}}, Weight::rational(1, 2)},
                         {{Point{1.0}, Point{0.0}}, Weight::rational(1, 2)}});
  auto report = check_finite_optimality(anti, CostSpec::power_distance(2.0), Objective::sum, 6, 2, 0);
  CHECK(!report.all_pass);
  bool positive_gap = false;
  for (const auto& t : report.trials) positive_gap = positive_gap || t.gap > 0;
  CHECK(positive_gap);
}

TEST_CASE("rotation plan passes the max-aggregate audit") {
  DiscreteCoupling rot = make_rotation_plan(AlphaSpec::sqrt2_minus_one(), 20);
  auto report =
      check_finite_optimality(rot, CostSpec::equality_indicator(1, 2), Objective::max, 12, 4, 1);
  CHECK(report.all_pass);
}

TEST_CASE("compliant supports stay compliant under the audit, per the audit scale") {
  // max-aggregate: no certificate up to k_max implies no positive gap for
  // submeasures of size <= k_max
  Rng rng(35);
  for (int round = 0; round < 8; ++round) {
    DiscreteCoupling plan =
        testing::random_plan(rng, {unit_box(), unit_box()}, 6, WeightMode::rational);
    if (check_icm(plan.support(), CostSpec::power_distance(1.0), 3)) continue;
    auto report =
        check_finite_optimality(plan, CostSpec::power_distance(1.0), Objective::max, 9, 3, 2);
    CHECK(report.all_pass);
  }
}
