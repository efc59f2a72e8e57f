#include <benchmark/benchmark.h>

#include <rfrac/conditions.hpp>
#include <rfrac/measures.hpp>
#include <rfrac/operators.hpp>
#include <rfrac/rng.hpp>

using namespace rfrac;

namespace {

GridFunction noise(const GridConfig& cfg, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> v(cfg.cell_count());
  for (auto& x : v) x = rng.uniform(0.0, 1.0);
  return GridFunction(cfg, std::move(v));
}

// cascade construction builds the mass tree and prefix table
void BM_Cascade(benchmark::State& state) {
  const GridConfig cfg({1, 1}, static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(gen_cascade(cfg, 2.0, 7).total_mass());
}
BENCHMARK(BM_Cascade)->DenseRange(4, 7);

void BM_BoxMass(benchmark::State& state) {
  const GridConfig cfg({1, 1}, 6);
  const Weight w = gen_cascade(cfg, 2.0, 7);
  const int res = cfg.resolution() + 2;
  const std::int64_t top = std::int64_t{3} << res;
  Rng rng(1);
  std::vector<Box> boxes;
  for (int i = 0; i < 1024; ++i) {
    std::int64_t a = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(top)));
    std::int64_t b = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(top)));
    std::int64_t c = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(top)));
    std::int64_t d = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(top)));
    boxes.push_back(Box{{std::min(a, b), std::min(c, d)}, {std::max(a, b) + 1, std::max(c, d) + 1}, res});
  }
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(w.mass(boxes[i++ & 1023]));
}
BENCHMARK(BM_BoxMass);

void BM_FracDyadic(benchmark::State& state) {
  const GridConfig cfg({1, 1}, static_cast<int>(state.range(0)));
  const Weight mu = gen_cascade(cfg, 2.0, 7);
  const GridFunction f = noise(cfg, 3);
  for (auto _ : state) benchmark::DoNotOptimize(apply_frac_dyadic(mu, 0.5, f).values[0]);
}
BENCHMARK(BM_FracDyadic)->DenseRange(3, 6);

void BM_Perez(benchmark::State& state) {
  const GridConfig cfg({1, 1}, static_cast<int>(state.range(0)));
  const Weight mu = gen_cascade(cfg, 2.0, 7);
  const GridFunction f = noise(cfg, 3);
  for (auto _ : state) benchmark::DoNotOptimize(apply_perez(mu, 0.5, f).values[0]);
}
BENCHMARK(BM_Perez)->DenseRange(3, 6);

void BM_FracKernel(benchmark::State& state) {
  const GridConfig cfg({1, 1}, static_cast<int>(state.range(0)));
  const Weight mu = gen_cascade(cfg, 2.0, 7);
  const GridFunction f = noise(cfg, 3);
  for (auto _ : state) benchmark::DoNotOptimize(apply_frac_kernel(mu, 0.5, f).values[0]);
}
BENCHMARK(BM_FracKernel)->Arg(3);

void BM_DoublingScan(benchmark::State& state) {
  const GridConfig cfg({1, 1}, static_cast<int>(state.range(0)));
  const Weight w = gen_cascade(cfg, 3.0, 11);
  for (auto _ : state) {
    benchmark::DoNotOptimize(doubling_constant(w).value);
    benchmark::DoNotOptimize(reverse_doubling_constant(w).value);
  }
}
BENCHMARK(BM_DoublingScan)->DenseRange(4, 7);

void BM_ConditionD(benchmark::State& state) {
  const GridConfig cfg({1, 1}, static_cast<int>(state.range(0)));
  const Weight w = gen_cascade(cfg, 3.0, 11);
  for (auto _ : state) benchmark::DoNotOptimize(condition_d_constant(w, 0.5).value);
}
BENCHMARK(BM_ConditionD)->DenseRange(4, 6);

}  // namespace

BENCHMARK_MAIN();
