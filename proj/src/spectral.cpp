#include "relsense/spectral.hpp"

#include "relsense/kernels.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace relsense {

ModalDecomposition decompose(const MeasurementMap& map, double rank_tol) {
  if (rank_tol <= 0.0 || rank_tol >= 1.0) {
    throw std::invalid_argument("decompose: rank_tol must lie in (0, 1)");
  }
  const int n_z = map.sensors();
  const int n_y = map.outputs();
  const Matrix dense_b = Matrix(map.B);

  Eigen::BDCSVD<Matrix> svd(dense_b, Eigen::ComputeThinU | Eigen::ComputeFullV);
  if (svd.info() != Eigen::Success) {
    std::ostringstream msg;
    msg << "decompose: SVD did not converge for a " << n_z << " x " << n_y
        << " map, |B|_max = " << dense_b.cwiseAbs().maxCoeff();
    throw std::runtime_error(msg.str());
  }

  ModalDecomposition decomp;
  decomp.rank_tol = rank_tol;
  decomp.Q = svd.matrixV();

  const int thin = std::min(n_z, n_y);
  decomp.sigma = Vector::Zero(n_y);
  decomp.sigma.head(thin) = svd.singularValues();

  decomp.U = Matrix::Zero(n_z, n_y);
  decomp.U.leftCols(thin) = svd.matrixU();

  const double sigma0 = decomp.sigma(0);
  int n0 = 0;
  while (n0 < n_y && decomp.sigma(n0) >= rank_tol * sigma0 && decomp.sigma(n0) > 0.0) ++n0;
  decomp.observable_count = n0;
  return decomp;
}

std::vector<double> noise_gain(const ModalDecomposition& decomp, double noise_std) {
  if (noise_std <= 0.0) throw std::invalid_argument("noise_gain: noise std must be > 0");
  std::vector<double> gains(decomp.outputs());
  for (int k = 0; k < decomp.outputs(); ++k) {
    gains[k] = k < decomp.observable_count
                   ? noise_std * noise_std / decomp.lambda(k)
                   : std::numeric_limits<double>::infinity();
  }
  return gains;
}

Vector sample_noise_modal(const ModalDecomposition& decomp, double noise_std, long n_samples,
                          std::uint64_t seed) {
  if (n_samples < 1000) {
    throw std::invalid_argument("sample_noise_modal: need at least 1000 samples");
  }
  const int n0 = decomp.observable_count;
  if (noise_std == 0.0) return Vector::Zero(n0);

  // nu = Lambda^{-1} Q^T B^T n = Lambda^{-1/2} U^T n on the observable modes.
  Matrix w = decomp.U.leftCols(n0).transpose();
  for (int k = 0; k < n0; ++k) w.row(k) /= decomp.sigma(k);

  const kernels::Moments m =
      kernels::noise_projection_moments_parallel(w, noise_std, n_samples, seed);
  const double n = static_cast<double>(m.count);
  return (m.sum_sq - m.sum.cwiseProduct(m.sum) / n) / (n - 1.0);
}

CensusResult small_eigen_census(const ModalDecomposition& decomp, double rel_threshold) {
  if (rel_threshold <= 0.0 || rel_threshold >= 1.0) {
    throw std::invalid_argument("small_eigen_census: threshold must lie in (0, 1)");
  }
  CensusResult result;
  result.zero_modes = decomp.outputs() - decomp.observable_count;
  const double cutoff = rel_threshold * decomp.lambda(0);
  for (int k = 0; k < decomp.observable_count; ++k) {
    if (decomp.lambda(k) < cutoff) result.indices.push_back(k + 1);
  }
  result.count = static_cast<int>(result.indices.size());
  return result;
}

WalshCertificate walsh_poorly_observable(const SpatialStructure& structure,
                                         const MeasurementMap& map, int code_size) {
  const int m = map.subsystem_count;
  if (code_size < 1 || !std::has_single_bit(static_cast<unsigned>(code_size))) {
    throw std::invalid_argument("walsh_poorly_observable: code size must be a power of two");
  }
  if (code_size > m || m % code_size != 0) {
    throw std::invalid_argument(
        "walsh_poorly_observable: subsystem count must be divisible by the code size");
  }
  if (structure.subsystem_count() != m) {
    throw std::invalid_argument("walsh_poorly_observable: structure/map size mismatch");
  }

  // Contiguous slabs along the first spatial coordinate, ties broken by the
  // remaining coordinates.
  std::vector<int> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    const Vector& pa = structure.positions[a];
    const Vector& pb = structure.positions[b];
    for (int d = 0; d < pa.size(); ++d) {
      if (pa(d) != pb(d)) return pa(d) < pb(d);
    }
    return a < b;
  });

  const int per_group = m / code_size;
  const int n_y = map.outputs();
  const int n = map.block_size;
  const double amplitude = 1.0 / std::sqrt(static_cast<double>(n_y));

  WalshCertificate cert;
  cert.groups = code_size;
  cert.vectors = Matrix::Zero(n_y, code_size);
  cert.residuals = Vector::Zero(code_size);

  for (int i = 0; i < code_size; ++i) {
    for (int g = 0; g < code_size; ++g) {
      // Sylvester Hadamard order: sign = (-1)^{popcount(i & g)}
      const double sign = (std::popcount(static_cast<unsigned>(i & g)) % 2 == 0) ? 1.0 : -1.0;
      for (int s = g * per_group; s < (g + 1) * per_group; ++s) {
        const int subsystem = order[s];
        for (int d = 0; d < n; ++d) {
          cert.vectors(subsystem * n + d, i) = sign * amplitude;
        }
      }
    }
    cert.residuals(i) = (map.B * cert.vectors.col(i)).norm();
  }
  cert.bound = code_size * cert.residuals.maxCoeff();
  return cert;
}

bool verify_walsh_bound(const WalshCertificate& certificate, const ModalDecomposition& decomp) {
  const double tol = 1e-12 * std::max(decomp.lambda(0), 1.0);
  int below = 0;
  for (int k = 0; k < decomp.outputs(); ++k) {
    if (decomp.lambda(k) <= certificate.bound + tol) ++below;
  }
  return below >= certificate.groups;
}

}  // namespace relsense
