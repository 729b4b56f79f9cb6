#include "relsense/robustness.hpp"

#include "relsense/kernels.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace relsense {

namespace {

double sign_of(double x) { return x >= 0.0 ? 1.0 : -1.0; }

void check_mode(const ModalDecomposition& decomp, int mode) {
  if (mode < 1 || mode > decomp.observable_count) {
    throw std::invalid_argument("mode index must lie in [1, N_0]");
  }
}

}  // namespace

SparseMatrix worst_case_delta(const MeasurementMap& map, const ModalDecomposition& decomp,
                              int mode, double epsilon) {
  check_mode(decomp, mode);
  if (epsilon < 0.0) throw std::invalid_argument("worst_case_delta: epsilon must be >= 0");
  const int b = mode - 1;

  SparseMatrix delta = map.B;
  for (int col = 0; col < delta.outerSize(); ++col) {
    for (SparseMatrix::InnerIterator it(delta, col); it; ++it) {
      it.valueRef() = -sign_of(decomp.U(it.row(), b)) * sign_of(decomp.Q(it.col(), b)) * epsilon *
                      std::abs(it.value());
    }
  }
  return delta;
}

SparseMatrix sample_delta(const MeasurementMap& map, const UncertaintySpec& spec,
                          std::uint64_t seed) {
  std::mt19937_64 engine(mix_seed(seed, 0xde17a));
  std::uniform_real_distribution<double> uniform(-1.0, 1.0);

  SparseMatrix delta = map.B;
  switch (spec.mode) {
    case UncertaintyMode::IndependentEntries:
      for (int col = 0; col < delta.outerSize(); ++col) {
        for (SparseMatrix::InnerIterator it(delta, col); it; ++it) {
          it.valueRef() = uniform(engine) * spec.epsilon * std::abs(it.value());
        }
      }
      break;
    case UncertaintyMode::SpatiallyInvariant:
      delta = (uniform(engine) * spec.epsilon) * map.B;
      break;
    case UncertaintyMode::SymmetryPreserving: {
      // Draw with half the admissible range, then rebalance each row so it
      // sums to zero; the correction never exceeds the remaining half-range.
      for (int col = 0; col < delta.outerSize(); ++col) {
        for (SparseMatrix::InnerIterator it(delta, col); it; ++it) {
          it.valueRef() = 0.5 * uniform(engine) * spec.epsilon * std::abs(it.value());
        }
      }
      SparseMatrix rows = SparseMatrix(delta.transpose());
      SparseMatrix abs_rows = SparseMatrix(map.B.transpose());
      for (int row = 0; row < rows.outerSize(); ++row) {
        double sum = 0.0, weight = 0.0;
        for (SparseMatrix::InnerIterator it(rows, row); it; ++it) sum += it.value();
        for (SparseMatrix::InnerIterator it(abs_rows, row); it; ++it) {
          weight += std::abs(it.value());
        }
        if (weight == 0.0) continue;
        SparseMatrix::InnerIterator ed(rows, row);
        SparseMatrix::InnerIterator eb(abs_rows, row);
        for (; ed && eb; ++ed, ++eb) {
          ed.valueRef() -= sum * std::abs(eb.value()) / weight;
        }
      }
      delta = SparseMatrix(rows.transpose());
      break;
    }
  }
  return delta;
}

PhiMatrix phi_matrix(const MeasurementMap& map, const ModalDecomposition& decomp,
                     const SparseMatrix& delta) {
  if (delta.rows() != map.B.rows() || delta.cols() != map.B.cols()) {
    throw std::invalid_argument("phi_matrix: Delta has a different shape than B");
  }
  const int n_y = decomp.outputs();
  const int n0 = decomp.observable_count;

  PhiMatrix out;
  out.observable_count = n0;
  out.phi = Matrix::Zero(n_y, n_y);
  const Matrix core = decomp.U.leftCols(n0).transpose() * (delta * decomp.Q);
  out.phi.topRows(n0) = decomp.sigma.head(n0).cwiseInverse().asDiagonal() * core;
  return out;
}

PhiValue phi_b_value(const MeasurementMap& map, const ModalDecomposition& decomp, int mode,
                     double epsilon) {
  if (mode < 1 || mode > decomp.outputs()) {
    throw std::invalid_argument("phi_b_value: mode index out of range");
  }
  if (mode > decomp.observable_count) {
    return {0.0, true};  // lambda below the rank tolerance: infinite sensitivity
  }
  const int b = mode - 1;
  const SparseMatrix abs_b = map.B.cwiseAbs();
  const Vector t = kernels::abs_triple_products_serial(abs_b, decomp.U, decomp.Q, {b});
  return {-epsilon / decomp.sigma(b) * t(0), false};
}

Vector phi_sweep(const MeasurementMap& map, const ModalDecomposition& decomp, double epsilon) {
  const int n0 = decomp.observable_count;
  std::vector<int> modes(n0);
  for (int b = 0; b < n0; ++b) modes[b] = b;
  const SparseMatrix abs_b = map.B.cwiseAbs();
  Vector t = kernels::abs_triple_products_parallel(abs_b, decomp.U, decomp.Q, modes);
  for (int b = 0; b < n0; ++b) t(b) *= -epsilon / decomp.sigma(b);
  return t;
}

RobustnessVerdict robust_stability_verdict(double entry_bound, int observable_count, double phi_b) {
  if (entry_bound <= 0.0) throw std::invalid_argument("robust_stability_verdict: entry bound must be > 0");
  if (entry_bound < 1.0 / observable_count &&
      std::abs(phi_b) > 1.0 + observable_count * entry_bound) {
    return RobustnessVerdict::NotRobustlyStable;
  }
  return RobustnessVerdict::Inconclusive;
}

ComplexVector closed_loop_poles(const PlantModel& plant, const ModalController& controller,
                                const ModalDecomposition& decomp, const MeasurementMap& map,
                                const SparseMatrix& delta) {
  const ClosedLoopSystem sys = assemble_closed_loop(plant, controller, decomp, map, delta);
  if (sys.A.rows() == 0) return ComplexVector();
  Eigen::EigenSolver<Matrix> es(sys.A, /*computeEigenvectors=*/false);
  ComplexVector poles = es.eigenvalues();
  std::sort(poles.data(), poles.data() + poles.size(), [](const Complex& a, const Complex& b) {
    return a.real() != b.real() ? a.real() > b.real() : a.imag() > b.imag();
  });
  return poles;
}

Vector symmetry_residual(const SparseMatrix& delta) {
  Vector sums = Vector::Zero(delta.rows());
  for (int col = 0; col < delta.outerSize(); ++col) {
    for (SparseMatrix::InnerIterator it(delta, col); it; ++it) {
      sums(it.row()) += it.value();
    }
  }
  return sums;
}

}  // namespace relsense
