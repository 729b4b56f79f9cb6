#pragma once

#include "relsense/types.hpp"

#include <cstdint>
#include <vector>

// Data-parallel inner loops, each in a serial reference version and an
// OpenMP version. Work is split into fixed blocks whose partial results are
// reduced in block order, so both versions produce bit-identical output and
// the OpenMP versions are deterministic for any thread count. The serial
// versions are kept for testing and for the kernel benchmark.

namespace relsense::kernels {

struct Moments {
  Vector sum;     // per-mode running sum
  Vector sum_sq;  // per-mode running sum of squares
  long count = 0;
};

/// Accumulates first and second moments of w = W n over `n_samples` draws of
/// n ~ N(0, noise_std^2 I). Sample i uses an RNG stream derived from
/// (seed, i).
Moments noise_projection_moments_serial(const Matrix& W, double noise_std, long n_samples,
                                        std::uint64_t seed);
Moments noise_projection_moments_parallel(const Matrix& W, double noise_std, long n_samples,
                                          std::uint64_t seed);

/// t_b = sum_{k,l} |B_{k,l}| |U_{k,b}| |Q_{l,b}| for each requested mode
/// (0-based), the absolute-value triple product behind the worst-case
/// sensing error.
Vector abs_triple_products_serial(const SparseMatrix& abs_b, const Matrix& U, const Matrix& Q,
                                  const std::vector<int>& modes);
Vector abs_triple_products_parallel(const SparseMatrix& abs_b, const Matrix& U, const Matrix& Q,
                                    const std::vector<int>& modes);

/// Periodogram accumulation for the Welch estimator: windowed FFT magnitude
/// squared, averaged over segments in block order.
Vector welch_accumulate_serial(const Vector& signal, const Vector& window,
                               const std::vector<long>& starts);
Vector welch_accumulate_parallel(const Vector& signal, const Vector& window,
                                 const std::vector<long>& starts);

/// Spatially correlated white field: column t of the result is
/// chol * n_t with n_t ~ N(0, I) drawn from the (seed, t) stream.
Matrix correlated_noise_serial(const Matrix& chol, long n_steps, std::uint64_t seed);
Matrix correlated_noise_parallel(const Matrix& chol, long n_steps, std::uint64_t seed);

}  // namespace relsense::kernels
