// Serial reference vs OpenMP backend on the grid-sweep kernels.
// Thread count follows OMP_NUM_THREADS / DOMCHECK_THREADS.

#include "domcheck/criteria.hpp"
#include "domcheck/kernels.hpp"
#include "domcheck/rates.hpp"
#include "domcheck/zoo.hpp"

#include <benchmark/benchmark.h>

#include <cmath>

using namespace domcheck;

namespace {

kernels::Backend backend_of(const benchmark::State& state) {
  return state.range(0) == 0 ? kernels::Backend::serial : kernels::Backend::parallel;
}

void set_label(benchmark::State& state) {
  state.SetLabel(state.range(0) == 0 ? "serial" : "parallel x" + std::to_string(kernels::max_threads()));
}

// Elliptic rotation has no splitting, so the literal projector grid is the worst case.
void BM_EllipticProjector(benchmark::State& state) {
  zoo::Params p;
  p.q = 233;
  p.step = 37;
  const auto z = zoo::make_model("elliptic", p);
  const auto pf = projectors_from_bases(coordinate_splitting(z.model.points(), z.dims));
  GridSpec grid;
  grid.backend = backend_of(state);
  for (auto _ : state) benchmark::DoNotOptimize(projector_product_all(z.model, pf, grid).alpha);
  set_label(state);
}

void BM_EllipticRatio(benchmark::State& state) {
  zoo::Params p;
  p.q = 233;
  p.step = 37;
  const auto z = zoo::make_model("elliptic", p);
  const auto pf = projectors_from_bases(coordinate_splitting(z.model.points(), z.dims));
  GridSpec grid;
  grid.backend = backend_of(state);
  for (auto _ : state) benchmark::DoNotOptimize(ratio_domination_all(z.model, pf, grid).alpha);
  set_label(state);
}

void BM_RotationNormalHyperbolicity(benchmark::State& state) {
  zoo::Params p;
  p.q = 89;
  const auto z = zoo::make_model("rotation-normal", p);
  const auto pf = projectors_from_bases(*z.exact);
  GridSpec grid;
  grid.backend = backend_of(state);
  for (auto _ : state) benchmark::DoNotOptimize(hyperbolicity_test(z.model, pf, 1, grid).pass);
  set_label(state);
}

// Raw row kernel: per-row cost comparable to one grid cell.
void BM_ReduceRows(benchmark::State& state) {
  const std::size_t rows = 4096, width = 32;
  const kernels::RowFn fn = [](std::size_t row, std::span<double> out) {
    double acc = static_cast<double>(row);
    for (std::size_t j = 0; j < out.size(); ++j) {
      for (int k = 0; k < 64; ++k) acc = std::sin(acc) + 1.0;
      out[j] = acc;
    }
  };
  for (auto _ : state)
    benchmark::DoNotOptimize(kernels::reduce_rows(rows, width, fn, kernels::Reduce::max, backend_of(state)));
  set_label(state);
}

}  // namespace

BENCHMARK(BM_EllipticProjector)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EllipticRatio)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RotationNormalHyperbolicity)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ReduceRows)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

int main(int argc, char** argv) {
  kernels::apply_thread_cap_from_env();
  benchmark::Initialize(&argc, argv);
  if (benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
  benchmark::RunSpecifiedBenchmarks();
  benchmark::Shutdown();
  return 0;
}
