#pragma once

#include "relsense/sensing_model.hpp"
#include "relsense/types.hpp"

#include <array>
#include <vector>

namespace relsense {

/// Sensor stencil of a spatially invariant plant on a gamma-dimensional
/// toroidal lattice. `offsets` lists one representative per +-l pair, so the
/// per-node sensor count is D = 2 |offsets|.
struct SIStencil {
  int dimension = 1;
  std::array<int, 2> sizes = {1, 1};  // M_1, M_2 (M_2 = 1 in 1D)
  std::vector<std::array<int, 2>> offsets;
  double locality_range = 1.0;  // rho': bound on |l_a|

  int sensors_per_node() const { return 2 * static_cast<int>(offsets.size()); }
  int nodes() const { return sizes[0] * sizes[1]; }
  static SIStencil ring(int m) { return {1, {m, 1}, {{1, 0}}, 1.0}; }
};

bool on_frequency_grid(const SIStencil& stencil, double xi1, double xi2, double tol = 1e-9);

/// Modal observability 2 sum_l sin^2(l^T xi / 2). Throws for off-grid xi.
double lambda_xi(const SIStencil& stencil, double xi1, double xi2 = 0.0);

/// Eigenvalue of the circulant Laplacian for the same stencil,
/// sum_l |1 - e^{-i l^T xi}|^2 = 2 * lambda_xi. Both conventions are exposed;
/// the ratio is reported by lambda_convention_ratio.
double lambda_xi_circulant(const SIStencil& stencil, double xi1, double xi2 = 0.0);
double lambda_convention_ratio();

/// Count bound w_c = prod_j (2 floor(c M_j / (sqrt(2D) gamma rho' pi)) + 1).
long noise_floor_count(double c, const SIStencil& stencil, double locality_range);

struct PhiBar {
  Complex value{0.0, 0.0};  // purely imaginary
  bool undefined = false;   // every sin term vanished at this xi
};

/// Worst spatially invariant uncertainty gain (purely imaginary).
PhiBar phi_bar(const SIStencil& stencil, double epsilon, double xi1, double xi2 = 0.0);

/// Exclusion region for the Nyquist plot of K_xi: the arc
/// {-1/(1 + i beta tan(theta/2)) : beta in [-1,1]} on the circle
/// |z + 0.5| = 0.5, rotated by up to +-phase_margin and scaled toward the
/// origin by ratios up to gain_margin.
struct ExclusionZone {
  double theta = 0.0;         // arc extension, 2 atan(|phi_bar|)
  double phase_margin = 0.0;  // phi_m >= 0
  double gain_margin = 1.0;   // g_m >= 1

  bool contains(Complex w) const;
  bool crosses_imaginary_axis() const;
  Complex arc_point(double beta) const;  // beta in [-1, 1]
  /// Euclidean distance from w to the zone (0 when inside).
  double distance(Complex w) const;
};

ExclusionZone exclusion_arc(const PhiBar& phi);
ExclusionZone margin_zone(const ExclusionZone& arc, double gain_margin, double phase_margin);

struct NyquistClearance {
  double min_distance = 0.0;
  bool violation = false;      // a curve sample inside the zone
  bool encirclement = false;   // nonzero winding around the arc
};

/// Clearance of a sampled Nyquist curve against a zone. The curve is treated
/// as closed (last sample connects back to the first) for the winding count.
NyquistClearance nyquist_clearance(const std::vector<Complex>& curve, const ExclusionZone& zone);

/// Spatially invariant controller: 4-term cosine series per coefficient,
/// d x d blocks (d = 1 or 3).
struct LtsiController {
  int dof = 1;
  Matrix k_alpha, k_beta, k_gamma, k_delta;
  Matrix a_alpha, a_beta, a_gamma, a_delta;
  double rolloff_pole = std::numeric_limits<double>::infinity();
};

struct LtsiEvaluation {
  Matrix integral_gain;  // K_I*(xi)
  Matrix leakage;        // A_I*(xi), clamped at zero
};

LtsiEvaluation ltsi_eval(const LtsiController& controller, double xi1, double xi2);

struct LtsiFit {
  LtsiController controller;
  double residual_integral = 0.0;  // RMS fit residual of K_I*
  double residual_leakage = 0.0;   // RMS residual of A_I* before clamping
  double residual_leakage_clamped = 0.0;  // after clamping negative values to 0
};

/// Least-squares fit of the cosine series to target gains given on the full
/// frequency grid. `target_k[g]` / `target_a[g]` are d x d matrices for grid
/// point g in row-major (xi1-major) order.
LtsiFit ltsi_fit(const SIStencil& stencil, const std::vector<Matrix>& target_k,
                 const std::vector<Matrix>& target_a, int dof);

/// Verification pass for a fitted controller: nominal per-xi closed-loop
/// poles (static plant) and margin-zone clearance at the given uncertainty.
struct LtsiVerification {
  bool stable = true;           // all nominal poles below -p0
  double max_pole = 0.0;        // largest real part over the grid
  int zone_violations = 0;      // grid frequencies whose Nyquist curve enters the zone
};

LtsiVerification ltsi_verify(const LtsiController& controller, const SIStencil& stencil,
                             double epsilon, double p0, double gain_margin, double phase_margin,
                             const Vector& omega_grid);

/// 3 x n pseudo-inverse estimator of a segment's own degrees of freedom from
/// the sensors on its edges, neighbors assumed perfectly positioned.
/// Throws when the segment has fewer than 3 sensors.
Matrix local_estimator(const SegmentGeometry& geometry, int segment);

struct DcSensitivity {
  Matrix S;                      // [I + K(0)]^{-1}
  double norm = 0.0;
  bool infinite_rejection = false;  // pure-integrator case, S = 0
};

/// S(xi; 0) from the DC loop gain matrix.
DcSensitivity si_dc_sensitivity(const Matrix& dc_loop_gain);
/// Scalar convenience form: loop gain sqrt(lambda) K_I / A_I (A_I = 0 means
/// pure integration, S = 0).
DcSensitivity si_dc_sensitivity(double sqrt_lambda, double integral_gain, double leakage);

}  // namespace relsense
