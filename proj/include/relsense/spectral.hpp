#pragma once

#include "relsense/sensing_model.hpp"
#include "relsense/types.hpp"

#include <vector>

namespace relsense {

/// Singular value decomposition B = U diag(sigma) Q^T with the modal basis Q
/// extended to a full orthogonal N_y x N_y matrix. Columns of U beyond the
/// thin rank are zero when N_z < N_y. lambda_k = sigma_k^2 are the
/// eigenvalues of the Laplacian L = B^T B, in descending order.
struct ModalDecomposition {
  Matrix U;          // N_z x N_y
  Matrix Q;          // N_y x N_y, orthogonal
  Vector sigma;      // length N_y, descending
  int observable_count = 0;  // N_0: number of sigma_k >= rank_tol * sigma_0
  double rank_tol = 1e-9;

  int outputs() const { return static_cast<int>(Q.rows()); }
  double lambda(int k) const { return sigma(k) * sigma(k); }  // 0-based
  Vector lambdas() const { return sigma.array().square(); }
};

/// Throws std::runtime_error (with a condition report) if the decomposition
/// does not converge.
ModalDecomposition decompose(const MeasurementMap& map, double rank_tol = 1e-9);

/// Per-mode noise variance sigma^2 / lambda_k of the rescaled noise nu.
/// Length N_y; unobservable modes are flagged +infinity.
std::vector<double> noise_gain(const ModalDecomposition& decomp, double noise_std);

/// Monte-Carlo check of the noise gain: draws n i.i.d. sensor noise vectors,
/// maps each through Lambda^{-1} Q^T B^T and returns the empirical variance of
/// each observable mode (length N_0). Deterministic for a fixed seed; results
/// do not depend on the number of worker threads.
Vector sample_noise_modal(const ModalDecomposition& decomp, double noise_std, long n_samples,
                          std::uint64_t seed);

struct CensusResult {
  std::vector<int> indices;  // 1-based mode indices, descending-lambda order
  int count = 0;             // modes with 0 < lambda_k < c * lambda_1
  int zero_modes = 0;        // reported separately
};

/// Counts the poorly observable modes: lambda_k < rel_threshold * lambda_1,
/// zero modes excluded.
CensusResult small_eigen_census(const ModalDecomposition& decomp, double rel_threshold);

/// N_c orthonormal +-1/sqrt(N_y) vectors built from a Walsh (Hadamard) code
/// over a contiguous spatial partition, certifying N_c eigenvalues of L below
/// `bound`.
struct WalshCertificate {
  Matrix vectors;    // N_y x N_c
  Vector residuals;  // ||B y_i||
  double bound = 0.0;  // N_c * max residual
  int groups = 0;
};

/// Partitions the subsystems into N_c contiguous groups (sorted along the
/// first spatial coordinate) and assigns signs by Hadamard-order Walsh code
/// rows. Requires N_c a power of two dividing M.
WalshCertificate walsh_poorly_observable(const SpatialStructure& structure,
                                         const MeasurementMap& map, int code_size);

/// True when the spectrum of L really contains >= N_c eigenvalues below the
/// certificate bound.
bool verify_walsh_bound(const WalshCertificate& certificate, const ModalDecomposition& decomp);

}  // namespace relsense
