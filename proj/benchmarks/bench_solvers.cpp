#include <benchmark/benchmark.h>

#include <random>

#include "motcert/solvers.hpp"

using namespace motcert;

namespace {

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

MotInstance random_instance(std::size_t m, Objective objective, WeightMode mode,
                            std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  FactorSpace box(1, {{0.0, 1.0}});
  std::vector<DiscreteMeasure> marginals;
  for (int side = 0; side < 2; ++side) {
    std::vector<WeightedPoint> atoms;
    for (std::size_t i = 0; i < m; ++i) {
      Weight w = mode == WeightMode::rational
                     ? Weight::rational(Rational(1, static_cast<long>(m)))
                     : Weight::floating(1.0 / static_cast<double>(m));
      atoms.push_back({Point{uniform01(rng)}, w});
    }
    marginals.emplace_back(box, mode, std::move(atoms));
  }
  return MotInstance{std::move(marginals), CostSpec::power_distance(2.0), objective};
}

void BM_IntegralSolveRational(benchmark::State& state) {
  auto inst = random_instance(static_cast<std::size_t>(state.range(0)), Objective::sum,
                              WeightMode::rational, 7);
  for (auto _ : state) benchmark::DoNotOptimize(solve_integral_mot(inst).value);
}

void BM_IntegralSolveFloat(benchmark::State& state) {
  auto inst = random_instance(static_cast<std::size_t>(state.range(0)), Objective::sum,
                              WeightMode::floating, 7);
  for (auto _ : state) benchmark::DoNotOptimize(solve_integral_mot(inst).value);
}

void BM_SupSolveRational(benchmark::State& state) {
  auto inst = random_instance(static_cast<std::size_t>(state.range(0)), Objective::max,
                              WeightMode::rational, 9);
  for (auto _ : state) benchmark::DoNotOptimize(solve_sup_mot(inst).value);
}

void BM_FeasibilityMaxFlow(benchmark::State& state) {
  auto inst = random_instance(static_cast<std::size_t>(state.range(0)), Objective::max,
                              WeightMode::rational, 11);
  for (auto _ : state) benchmark::DoNotOptimize(feasibility_at_level(inst, 0.5).feasible);
}

}  // namespace

BENCHMARK(BM_IntegralSolveRational)->Arg(4)->Arg(8)->Arg(12)->Arg(16);
BENCHMARK(BM_IntegralSolveFloat)->Arg(4)->Arg(8)->Arg(12)->Arg(16);
BENCHMARK(BM_SupSolveRational)->Arg(4)->Arg(8)->Arg(12);
BENCHMARK(BM_FeasibilityMaxFlow)->Arg(8)->Arg(16)->Arg(32);

BENCHMARK_MAIN();
