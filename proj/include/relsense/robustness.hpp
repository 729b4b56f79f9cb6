#pragma once

#include "relsense/plant_sim.hpp"
#include "relsense/sensing_model.hpp"
#include "relsense/spectral.hpp"
#include "relsense/types.hpp"

#include <vector>

namespace relsense {

enum class UncertaintyMode {
  IndependentEntries,   // each entry free in [-eps |B|, +eps |B|]
  SpatiallyInvariant,   // Delta = beta eps B, beta in [-1, 1]
  SymmetryPreserving,   // additionally sum_l Delta_{k,l} = 0 per row
};

struct UncertaintySpec {
  double epsilon = 0.01;
  UncertaintyMode mode = UncertaintyMode::IndependentEntries;
};

/// The sensing error that maximizes |Phi_{b,b}|:
/// Delta_{k,l} = -sign(U_{k,b}) sign(Q_{l,b}) eps |B_{k,l}|. `mode` is
/// 1-based and must not exceed the observable count.
SparseMatrix worst_case_delta(const MeasurementMap& map, const ModalDecomposition& decomp,
                              int mode, double epsilon);

/// Seeded random admissible error for the given uncertainty model.
SparseMatrix sample_delta(const MeasurementMap& map, const UncertaintySpec& spec,
                          std::uint64_t seed);

struct PhiMatrix {
  Matrix phi;  // N_y x N_y, rows beyond N_0 exactly zero
  int observable_count = 0;
};

/// Phi = Lambda^{-1/2} U^T Delta Q with the pseudo-inverse convention on the
/// unobservable rows.
PhiMatrix phi_matrix(const MeasurementMap& map, const ModalDecomposition& decomp,
                     const SparseMatrix& delta);

struct PhiValue {
  double value = 0.0;
  bool infinite_sensitivity = false;  // lambda_b below the rank tolerance
};

/// Closed form phi_b = -(eps / sqrt(lambda_b)) sum |B| |U_b| |Q_b|; equals
/// phi_matrix(worst_case_delta(b))_{b,b}.
PhiValue phi_b_value(const MeasurementMap& map, const ModalDecomposition& decomp, int mode,
                     double epsilon);

/// phi_b for modes 1..N_0 at once (parallel kernel).
Vector phi_sweep(const MeasurementMap& map, const ModalDecomposition& decomp, double epsilon);

enum class RobustnessVerdict { NotRobustlyStable, Inconclusive };

/// One-directional test: not robustly stable when entry_bound < 1/N_0 and
/// |phi_b| > 1 + N_0 * entry_bound. Never certifies robustness.
RobustnessVerdict robust_stability_verdict(double entry_bound, int observable_count, double phi_b);

/// Eigenvalues of the assembled closed-loop state matrix, sorted by real part
/// descending.
ComplexVector closed_loop_poles(const PlantModel& plant, const ModalController& controller,
                                const ModalDecomposition& decomp, const MeasurementMap& map,
                                const SparseMatrix& delta);

/// Per-row sums of Delta; the zero vector iff Delta preserves the
/// relative-sensing symmetry.
Vector symmetry_residual(const SparseMatrix& delta);

}  // namespace relsense
