// Timing comparison of the serial reference kernels against their OpenMP
// versions. Output checksums are printed so the comparison is honest: both
// versions must produce bit-identical results.

#include "relsense/kernels.hpp"
#include "relsense/sensing_model.hpp"
#include "relsense/spectral.hpp"

#include <omp.h>

#include <cmath>
#include <cstdio>
#include <functional>
#include <string>

using namespace relsense;

namespace {

struct Result {
  double seconds = 0.0;
  double checksum = 0.0;
};

Result timed(const std::function<double()>& body, int repeats) {
  Result r;
  r.checksum = body();  // warm up and checksum
  const double start = omp_get_wtime();
  for (int i = 0; i < repeats; ++i) r.checksum = body();
  r.seconds = (omp_get_wtime() - start) / repeats;
  return r;
}

void report(const std::string& name, const Result& serial, const Result& parallel) {
  std::printf("%-28s serial %8.3f ms   parallel %8.3f ms   speedup %.2fx   %s\n", name.c_str(),
              1e3 * serial.seconds, 1e3 * parallel.seconds, serial.seconds / parallel.seconds,
              serial.checksum == parallel.checksum ? "bitwise equal" : "MISMATCH");
}

}  // namespace

int main() {
  std::printf("threads: %d (cap via RELSENSE_THREADS)\n\n", effective_threads());

  {
    const HexMirrorModel mirror = build_hex_mirror(4, 0, 0.7, 0.25);
    const ModalDecomposition d = decompose(mirror.map);
    Matrix w = d.U.leftCols(d.observable_count).transpose();
    for (int k = 0; k < d.observable_count; ++k) w.row(k) /= d.sigma(k);
    const long n_samples = 20000;

    const Result serial = timed(
        [&] {
          return kernels::noise_projection_moments_serial(w, 1.0, n_samples, 7).sum_sq.sum();
        },
        3);
    const Result parallel = timed(
        [&] {
          return kernels::noise_projection_moments_parallel(w, 1.0, n_samples, 7).sum_sq.sum();
        },
        3);
    report("noise moments (hex R=4)", serial, parallel);
  }

  {
    const HexMirrorModel mirror = build_hex_mirror(6, 0, 0.7, 0.25);
    const ModalDecomposition d = decompose(mirror.map);
    const SparseMatrix abs_b = mirror.map.B.cwiseAbs();
    std::vector<int> modes(d.observable_count);
    for (int b = 0; b < d.observable_count; ++b) modes[b] = b;

    const Result serial = timed(
        [&] { return kernels::abs_triple_products_serial(abs_b, d.U, d.Q, modes).sum(); }, 5);
    const Result parallel = timed(
        [&] { return kernels::abs_triple_products_parallel(abs_b, d.U, d.Q, modes).sum(); }, 5);
    report("phi sweep (hex R=6)", serial, parallel);
  }

  {
    const long n = 1 << 20;
    Vector signal(n);
    for (long i = 0; i < n; ++i) signal(i) = std::sin(0.01 * i) + std::cos(0.37 * i);
    const long seg = 1 << 14;
    Vector window(seg);
    for (long i = 0; i < seg; ++i) {
      window(i) = 0.5 * (1.0 - std::cos(2.0 * M_PI * i / seg));
    }
    std::vector<long> starts;
    for (long s = 0; s + seg <= n; s += seg / 4) starts.push_back(s);

    const Result serial =
        timed([&] { return kernels::welch_accumulate_serial(signal, window, starts).sum(); }, 3);
    const Result parallel =
        timed([&] { return kernels::welch_accumulate_parallel(signal, window, starts).sum(); }, 3);
    report("welch periodograms (1M)", serial, parallel);
  }

  {
    const SensingModel chain = build_chain(64);
    Matrix kernel(64, 64);
    for (int i = 0; i < 64; ++i) {
      for (int j = 0; j < 64; ++j) kernel(i, j) = std::exp(-std::abs(i - j) / 5.0);
    }
    const Matrix chol = kernel.llt().matrixL();
    const long steps = 50000;

    const Result serial =
        timed([&] { return kernels::correlated_noise_serial(chol, steps, 3).sum(); }, 3);
    const Result parallel =
        timed([&] { return kernels::correlated_noise_parallel(chol, steps, 3).sum(); }, 3);
    report("correlated wind (64 x 50k)", serial, parallel);
  }

  return 0;
}
