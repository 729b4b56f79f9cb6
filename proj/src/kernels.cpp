#include "relsense/kernels.hpp"

#include <unsupported/Eigen/FFT>

#include <omp.h>

#include <algorithm>
#include <cstdlib>
#include <random>

namespace relsense {

int effective_threads() {
  int n = omp_get_max_threads();
  if (const char* env = std::getenv("RELSENSE_THREADS")) {
    const int cap = std::atoi(env);
    if (cap > 0) n = std::min(n, cap);
  }
  return std::max(1, n);
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 finalizer over the combined word
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

namespace kernels {

namespace {

constexpr long kMomentBlock = 1024;

// One block of samples, accumulated locally. The per-sample engine makes the
// result independent of which thread runs the block.
void moment_block(const Matrix& W, double noise_std, long begin, long end, std::uint64_t seed,
                  Vector& sum, Vector& sum_sq) {
  const int n_modes = static_cast<int>(W.rows());
  const int n_sensors = static_cast<int>(W.cols());
  sum.setZero(n_modes);
  sum_sq.setZero(n_modes);
  Vector noise(n_sensors);
  Vector projected(n_modes);
  for (long i = begin; i < end; ++i) {
    std::mt19937_64 engine(mix_seed(seed, static_cast<std::uint64_t>(i)));
    std::normal_distribution<double> gauss(0.0, noise_std);
    for (int s = 0; s < n_sensors; ++s) noise(s) = gauss(engine);
    projected.noalias() = W * noise;
    sum += projected;
    sum_sq += projected.cwiseProduct(projected);
  }
}

Moments moment_reduce(const Matrix& W, double noise_std, long n_samples, std::uint64_t seed,
                      bool parallel) {
  const long n_blocks = (n_samples + kMomentBlock - 1) / kMomentBlock;
  std::vector<Vector> block_sum(n_blocks), block_sq(n_blocks);

#pragma omp parallel for schedule(dynamic) num_threads(effective_threads()) if (parallel)
  for (long b = 0; b < n_blocks; ++b) {
    const long begin = b * kMomentBlock;
    const long end = std::min(n_samples, begin + kMomentBlock);
    moment_block(W, noise_std, begin, end, seed, block_sum[b], block_sq[b]);
  }

  Moments out;
  out.sum.setZero(W.rows());
  out.sum_sq.setZero(W.rows());
  out.count = n_samples;
  for (long b = 0; b < n_blocks; ++b) {  // fixed reduction order
    out.sum += block_sum[b];
    out.sum_sq += block_sq[b];
  }
  return out;
}

}  // namespace

Moments noise_projection_moments_serial(const Matrix& W, double noise_std, long n_samples,
                                        std::uint64_t seed) {
  return moment_reduce(W, noise_std, n_samples, seed, false);
}

Moments noise_projection_moments_parallel(const Matrix& W, double noise_std, long n_samples,
                                          std::uint64_t seed) {
  return moment_reduce(W, noise_std, n_samples, seed, true);
}

namespace {

Vector abs_triple_products(const SparseMatrix& abs_b, const Matrix& U, const Matrix& Q,
                           const std::vector<int>& modes, bool parallel) {
  const long n = static_cast<long>(modes.size());
  Vector out(n);
#pragma omp parallel for schedule(dynamic) num_threads(effective_threads()) if (parallel)
  for (long i = 0; i < n; ++i) {
    const int b = modes[i];
    const Vector aq = abs_b * Q.col(b).cwiseAbs();
    out(i) = U.col(b).cwiseAbs().dot(aq);
  }
  return out;
}

}  // namespace

Vector abs_triple_products_serial(const SparseMatrix& abs_b, const Matrix& U, const Matrix& Q,
                                  const std::vector<int>& modes) {
  return abs_triple_products(abs_b, U, Q, modes, false);
}

Vector abs_triple_products_parallel(const SparseMatrix& abs_b, const Matrix& U, const Matrix& Q,
                                    const std::vector<int>& modes) {
  return abs_triple_products(abs_b, U, Q, modes, true);
}

namespace {

Vector welch_accumulate(const Vector& signal, const Vector& window,
                        const std::vector<long>& starts, bool parallel) {
  const long nseg = static_cast<long>(starts.size());
  const long len = window.size();
  const long n_freq = len / 2 + 1;
  Matrix per_segment(n_freq, nseg);

#pragma omp parallel num_threads(effective_threads()) if (parallel)
  {
    Eigen::FFT<double> fft;
    std::vector<double> buf(len);
    std::vector<std::complex<double>> spectrum;
#pragma omp for schedule(dynamic)
    for (long s = 0; s < nseg; ++s) {
      for (long i = 0; i < len; ++i) buf[i] = signal(starts[s] + i) * window(i);
      fft.fwd(spectrum, buf);
      for (long k = 0; k < n_freq; ++k) per_segment(k, s) = std::norm(spectrum[k]);
    }
  }

  Vector acc = Vector::Zero(n_freq);
  for (long s = 0; s < nseg; ++s) acc += per_segment.col(s);  // fixed order
  return acc;
}

}  // namespace

Vector welch_accumulate_serial(const Vector& signal, const Vector& window,
                               const std::vector<long>& starts) {
  return welch_accumulate(signal, window, starts, false);
}

Vector welch_accumulate_parallel(const Vector& signal, const Vector& window,
                                 const std::vector<long>& starts) {
  return welch_accumulate(signal, window, starts, true);
}

namespace {

Matrix correlated_noise(const Matrix& chol, long n_steps, std::uint64_t seed, bool parallel) {
  const int m = static_cast<int>(chol.rows());
  Matrix out(m, n_steps);
#pragma omp parallel num_threads(effective_threads()) if (parallel)
  {
    Vector raw(m);
#pragma omp for schedule(static)
    for (long t = 0; t < n_steps; ++t) {
      std::mt19937_64 engine(mix_seed(seed, static_cast<std::uint64_t>(t)));
      std::normal_distribution<double> gauss(0.0, 1.0);
      for (int i = 0; i < m; ++i) raw(i) = gauss(engine);
      out.col(t).noalias() = chol * raw;
    }
  }
  return out;
}

}  // namespace

Matrix correlated_noise_serial(const Matrix& chol, long n_steps, std::uint64_t seed) {
  return correlated_noise(chol, n_steps, seed, false);
}

Matrix correlated_noise_parallel(const Matrix& chol, long n_steps, std::uint64_t seed) {
  return correlated_noise(chol, n_steps, seed, true);
}

}  // namespace kernels
}  // namespace relsense
