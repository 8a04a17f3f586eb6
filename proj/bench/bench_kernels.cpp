#include <benchmark/benchmark.h>

#include <vector>

#include "caps/kernels.hpp"
#include "caps/numerics.hpp"

namespace {

using Kernel = void (*)(std::span<const double>, std::size_t, std::size_t, std::span<const double>,
                        std::span<double>);

struct Operands {
  std::vector<double> a, x, y;
  Operands(std::size_t rows, std::size_t cols) : a(rows * cols), x(cols), y(rows, 0.0) {
    caps::num::Rng rng(1);
    for (double& v : a) v = rng.uniform(-1, 1);
    for (double& v : x) v = rng.uniform(-1, 1);
  }
};

void matvec(benchmark::State& state, Kernel k) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Operands o(n, n);
  for (auto _ : state) {
    k(o.a, n, n, o.x, o.y);
    benchmark::DoNotOptimize(o.y.data());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * n * n));
}

void matvec_t(benchmark::State& state, Kernel k) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Operands o(n, n);
  for (auto _ : state) {
    k(o.a, n, n, o.y, o.x);
    benchmark::DoNotOptimize(o.x.data());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * n * n));
}

template <bool Parallel>
void outer(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Operands o(n, n);
  std::vector<double> a(o.a);
  for (auto _ : state) {
    if constexpr (Parallel) {
      caps::kernels::parallel::outer_add(a, n, n, o.y, o.x, 1e-6);
    } else {
      caps::kernels::serial::outer_add(a, n, n, o.y, o.x, 1e-6);
    }
    benchmark::DoNotOptimize(a.data());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * n * n));
}

}  // namespace

BENCHMARK_CAPTURE(matvec, serial, caps::kernels::serial::matvec_add)->RangeMultiplier(4)->Range(64, 2048);
BENCHMARK_CAPTURE(matvec, parallel, caps::kernels::parallel::matvec_add)->RangeMultiplier(4)->Range(64, 2048);
BENCHMARK_CAPTURE(matvec_t, serial, caps::kernels::serial::matvec_t_add)->RangeMultiplier(4)->Range(64, 2048);
BENCHMARK_CAPTURE(matvec_t, parallel, caps::kernels::parallel::matvec_t_add)->RangeMultiplier(4)->Range(64, 2048);
BENCHMARK_TEMPLATE(outer, false)->RangeMultiplier(4)->Range(64, 2048);
BENCHMARK_TEMPLATE(outer, true)->RangeMultiplier(4)->Range(64, 2048);

BENCHMARK_MAIN();
