#include <benchmark/benchmark.h>

#include "motcert/discretization.hpp"
#include "motcert/experiments.hpp"
#include "motcert/monotonicity.hpp"

using namespace motcert;

namespace {

void BM_CheckIcmRotation(benchmark::State& state) {
  auto m = static_cast<std::size_t>(state.range(0));
  int k_max = static_cast<int>(state.range(1));
  DiscreteCoupling rot = make_rotation_plan(AlphaSpec::sqrt2_minus_one(), m);
  auto support = rot.support();
  CostSpec cost = CostSpec::equality_indicator(1, 2);
  for (auto _ : state) {
    auto cert = check_icm(support, cost, k_max);
    benchmark::DoNotOptimize(cert.has_value());
  }
}

void BM_DiscretizeRotation(benchmark::State& state) {
  int level = static_cast<int>(state.range(0));
  DiscreteCoupling rot = make_rotation_plan(AlphaSpec::sqrt2_minus_one(), 50);
  std::vector<std::vector<Point>> supports;
  for (std::size_t k = 0; k < 2; ++k) {
    DiscreteMeasure mk = marginal(rot, k);
    std::vector<Point> pts;
    for (const auto& a : mk.atoms()) pts.push_back(a.point);
    supports.push_back(std::move(pts));
  }
  for (auto _ : state) {
    Partition part = build_partition(rot.spaces(), supports, level);
    benchmark::DoNotOptimize(discretize_plan(rot, part).size());
  }
}

void BM_FiniteOptimalityAudit(benchmark::State& state) {
  DiscreteCoupling rot =
      make_rotation_plan(AlphaSpec::sqrt2_minus_one(), static_cast<std::size_t>(state.range(0)));
  CostSpec cost = CostSpec::equality_indicator(1, 2);
  for (auto _ : state) {
    auto report = check_finite_optimality(rot, cost, Objective::max, 10, 4, 1);
    benchmark::DoNotOptimize(report.all_pass);
  }
}

}  // namespace

BENCHMARK(BM_CheckIcmRotation)->Args({10, 3})->Args({20, 3})->Args({30, 3})->Args({30, 4});
BENCHMARK(BM_DiscretizeRotation)->Arg(1)->Arg(3)->Arg(5);
BENCHMARK(BM_FiniteOptimalityAudit)->Arg(10)->Arg(20);
