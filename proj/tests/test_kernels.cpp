#include "relsense/kernels.hpp"

#include "relsense/sensing_model.hpp"

#include <doctest.h>

#include <cmath>

using namespace relsense;

TEST_SUITE_BEGIN("kernels");

// The OpenMP kernels must reproduce the serial reference bit for bit: the
// block partition and the reduction order are fixed, only the block-to-thread
// assignment varies.

TEST_CASE("noise moment kernel: parallel == serial") {
  const Matrix w = Matrix::Random(6, 11);
  const auto serial = kernels::noise_projection_moments_serial(w, 1.3, 5000, 99);
  const auto parallel = kernels::noise_projection_moments_parallel(w, 1.3, 5000, 99);
  CHECK(serial.count == parallel.count);
  CHECK((serial.sum - parallel.sum).cwiseAbs().maxCoeff() == 0.0);
  CHECK((serial.sum_sq - parallel.sum_sq).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("triple product kernel: parallel == serial") {
  const MeasurementMap map = build_hex_mirror(3, 0, 0.7, 0.25).map;
  const SparseMatrix abs_b = map.B.cwiseAbs();
  const Matrix u = Matrix::Random(map.sensors(), 8);
  const Matrix q = Matrix::Random(map.outputs(), 8);
  const std::vector<int> modes = {0, 1, 2, 3, 4, 5, 6, 7};
  const Vector serial = kernels::abs_triple_products_serial(abs_b, u, q, modes);
  const Vector parallel = kernels::abs_triple_products_parallel(abs_b, u, q, modes);
  CHECK((serial - parallel).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("welch kernel: parallel == serial") {
  Vector signal(4096);
  for (int i = 0; i < signal.size(); ++i) signal(i) = std::sin(0.1 * i) + 0.2 * std::cos(0.7 * i);
  Vector window(256);
  for (int i = 0; i < window.size(); ++i) {
    window(i) = 0.5 * (1.0 - std::cos(2.0 * M_PI * i / window.size()));
  }
  std::vector<long> starts;
  for (long s = 0; s + 256 <= signal.size(); s += 128) starts.push_back(s);

  const Vector serial = kernels::welch_accumulate_serial(signal, window, starts);
  const Vector parallel = kernels::welch_accumulate_parallel(signal, window, starts);
  CHECK((serial - parallel).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("correlated noise kernel: parallel == serial and seed-stable") {
  const Matrix chol = Matrix::Random(5, 5).triangularView<Eigen::Lower>();
  const Matrix serial = kernels::correlated_noise_serial(chol, 333, 4);
  const Matrix parallel = kernels::correlated_noise_parallel(chol, 333, 4);
  CHECK((serial - parallel).cwiseAbs().maxCoeff() == 0.0);

  const Matrix again = kernels::correlated_noise_parallel(chol, 333, 4);
  CHECK((parallel - again).cwiseAbs().maxCoeff() == 0.0);
  const Matrix other_seed = kernels::correlated_noise_parallel(chol, 333, 5);
  CHECK((parallel - other_seed).cwiseAbs().maxCoeff() > 0.0);
}

TEST_SUITE_END();
