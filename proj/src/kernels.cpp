#include "caps/kernels.hpp"

#include <algorithm>
#include <cstdint>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace caps::kernels {

namespace serial {

void matvec_add(std::span<const double> a, std::size_t rows, std::size_t cols,
                std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < rows; ++i) {
    const double* row = a.data() + i * cols;
    double acc = 0.0;
    for (std::size_t j = 0; j < cols; ++j) acc += row[j] * x[j];
    y[i] += acc;
  }
}

void matvec_t_add(std::span<const double> a, std::size_t rows, std::size_t cols,
                  std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < rows; ++i) {
    const double* row = a.data() + i * cols;
    const double xi = x[i];
    for (std::size_t j = 0; j < cols; ++j) y[j] += row[j] * xi;
  }
}

void outer_add(std::span<double> a, std::size_t rows, std::size_t cols,
               std::span<const double> u, std::span<const double> v, double scale) {
  for (std::size_t i = 0; i < rows; ++i) {
    double* row = a.data() + i * cols;
    const double ui = scale * u[i];
    for (std::size_t j = 0; j < cols; ++j) row[j] += ui * v[j];
  }
}

}  // namespace serial

namespace parallel {

void matvec_add(std::span<const double> a, std::size_t rows, std::size_t cols,
                std::span<const double> x, std::span<double> y) {
  const auto n = static_cast<std::int64_t>(rows);
  [[maybe_unused]] const bool big = rows * cols >= kParallelThreshold;
#pragma omp parallel for schedule(static) if (big)
  for (std::int64_t i = 0; i < n; ++i) {
    const double* row = a.data() + static_cast<std::size_t>(i) * cols;
    double acc = 0.0;
    for (std::size_t j = 0; j < cols; ++j) acc += row[j] * x[j];
    y[static_cast<std::size_t>(i)] += acc;
  }
}

void matvec_t_add(std::span<const double> a, std::size_t rows, std::size_t cols,
                  std::span<const double> x, std::span<double> y) {
  // Column blocks per thread; each y[j] still sums over i in ascending order.
  constexpr std::int64_t kBlock = 64;
  const auto nblocks = static_cast<std::int64_t>((cols + kBlock - 1) / kBlock);
  [[maybe_unused]] const bool big = rows * cols >= kParallelThreshold;
#pragma omp parallel for schedule(static) if (big)
  for (std::int64_t b = 0; b < nblocks; ++b) {
    const std::size_t j0 = static_cast<std::size_t>(b * kBlock);
    const std::size_t j1 = std::min(cols, j0 + static_cast<std::size_t>(kBlock));
    for (std::size_t i = 0; i < rows; ++i) {
      const double* row = a.data() + i * cols;
      const double xi = x[i];
      for (std::size_t j = j0; j < j1; ++j) y[j] += row[j] * xi;
    }
  }
}

void outer_add(std::span<double> a, std::size_t rows, std::size_t cols,
               std::span<const double> u, std::span<const double> v, double scale) {
  const auto n = static_cast<std::int64_t>(rows);
  [[maybe_unused]] const bool big = rows * cols >= kParallelThreshold;
#pragma omp parallel for schedule(static) if (big)
  for (std::int64_t i = 0; i < n; ++i) {
    double* row = a.data() + static_cast<std::size_t>(i) * cols;
    const double ui = scale * u[static_cast<std::size_t>(i)];
    for (std::size_t j = 0; j < cols; ++j) row[j] += ui * v[j];
  }
}

}  // namespace parallel

void set_num_threads(int n) {
#ifdef _OPENMP
  omp_set_num_threads(n > 0 ? n : omp_get_num_procs());
#else
  (void)n;
#endif
}

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace caps::kernels
