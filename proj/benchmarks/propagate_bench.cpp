#include "msv/propagator.hpp"
#include "msv/smooth_fields.hpp"

#include <benchmark/benchmark.h>

namespace {

void BM_PropagateKrylov(benchmark::State& state) {
  const auto spec = msv::make_system(1, {}, {{"-1", "0.5"}, {"0.5", "-1"}}, "1+|x|^2");
  const auto grid = msv::build_grid(1, 8, static_cast<int>(state.range(0)));
  const auto op = msv::assemble(spec, grid);
  msv::PropagatorOptions opts;
  opts.dense_limit = 0;
  const msv::Propagator prop(op.A, opts);
  const auto f = msv::sample_field(msv::random_bump_field(1, 2, grid.R, 1), grid);
  for (auto _ : state) benchmark::DoNotOptimize(prop.apply(f, 0.5));
}
BENCHMARK(BM_PropagateKrylov)->Arg(161)->Arg(321)->Arg(641)->Unit(benchmark::kMillisecond);

// Includes the one-off Pade exponential; later calls at the same t hit the cache.
void BM_PropagateDenseFirstCall(benchmark::State& state) {
  const auto spec = msv::make_system(1, {}, {{"0"}}, "1+|x|^2");
  const auto grid = msv::build_grid(1, 8, static_cast<int>(state.range(0)));
  const auto op = msv::assemble(spec, grid);
  const auto f = msv::sample_field(msv::random_bump_field(1, 1, grid.R, 1), grid);
  for (auto _ : state) {
    const msv::Propagator prop(op.A);
    benchmark::DoNotOptimize(prop.apply(f, 0.5));
  }
}
BENCHMARK(BM_PropagateDenseFirstCall)->Arg(161)->Arg(321)->Arg(641)->Unit(benchmark::kMillisecond);

}  // namespace
