#pragma once

// Dense inner-loop kernels used by the recurrent models.
//
// Every kernel exists twice: a serial reference in kernels::serial and an
// OpenMP version in kernels::parallel. Parallel versions split work only over
// output elements and keep the serial summation order for each element, so
// both produce bitwise-identical results for any thread count.

#include <cstddef>
#include <span>

namespace caps::kernels {

// y[i] += sum_j A[i*cols + j] * x[j]
// y[j] += sum_i A[i*cols + j] * x[i]          (transposed product)
// A[i*cols + j] += scale * a[i] * b[j]        (rank-1 update)

namespace serial {
void matvec_add(std::span<const double> a, std::size_t rows, std::size_t cols,
                std::span<const double> x, std::span<double> y);
void matvec_t_add(std::span<const double> a, std::size_t rows, std::size_t cols,
                  std::span<const double> x, std::span<double> y);
void outer_add(std::span<double> a, std::size_t rows, std::size_t cols,
               std::span<const double> u, std::span<const double> v, double scale);
}  // namespace serial

namespace parallel {
void matvec_add(std::span<const double> a, std::size_t rows, std::size_t cols,
                std::span<const double> x, std::span<double> y);
void matvec_t_add(std::span<const double> a, std::size_t rows, std::size_t cols,
                  std::span<const double> x, std::span<double> y);
void outer_add(std::span<double> a, std::size_t rows, std::size_t cols,
               std::span<const double> u, std::span<const double> v, double scale);
}  // namespace parallel

// Work (rows * cols) below which the parallel kernels run on one thread.
inline constexpr std::size_t kParallelThreshold = 1 << 15;

// Caps the OpenMP worker count; n <= 0 restores the runtime default.
void set_num_threads(int n);
int max_threads();

}  // namespace caps::kernels
