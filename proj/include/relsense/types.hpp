#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <complex>
#include <cstdint>
#include <vector>

namespace relsense {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double>;
using Complex = std::complex<double>;
using ComplexVector = Eigen::VectorXcd;
using ComplexMatrix = Eigen::MatrixXcd;

/// Number of worker threads the parallel kernels may use. Honors the
/// RELSENSE_THREADS environment variable as an upper cap.
int effective_threads();

/// Deterministic stream derivation: mixes a base seed with a stream index
/// (sample index, time step, ...) so per-item RNG engines are independent
/// of evaluation order.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace relsense
