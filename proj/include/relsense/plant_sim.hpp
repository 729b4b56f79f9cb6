#pragma once

#include "relsense/controller.hpp"
#include "relsense/sensing_model.hpp"
#include "relsense/types.hpp"

#include <optional>
#include <string>
#include <vector>

namespace relsense {

/// Linear per-subsystem plant. Every subsystem carries the same block.
struct PlantModel {
  enum class Kind { Static, SecondOrder, Vehicle } kind = Kind::Static;

  // SecondOrder: (s^2 J + s b_a I + k_a I) y = k (u + d), J symmetric pos. def.
  Matrix inertia;                  // N x N
  double actuator_stiffness = 1.0;  // k_a
  double actuator_damping = 0.0;    // b_a
  double input_gain = 1.0;          // k

  // Vehicle: (m s^2 + c s) y = u + d
  double mass = 1.0;
  double drag = 0.1;

  static PlantModel statics();
  static PlantModel vehicle(double mass = 1.0, double drag = 0.1);
  /// Mass-spring-damper with the resonance and modal damping given directly;
  /// DC gain is 1 (input gain k = k_a).
  static PlantModel mirror_segment(int dof, double resonance_hz = 50.0,
                                   double damping_ratio = 0.01);

  int states_per_output() const { return kind == Kind::Static ? 0 : 2; }
  ScalarPlant scalar() const;
};

/// Assembled continuous-time closed loop. Inputs are the disturbance d (N_y)
/// and the sensor noise n (N_z); outputs are y, u and z stacked.
struct ClosedLoopSystem {
  Matrix A;
  Matrix B_d, B_n;
  Matrix C_y, C_u, C_z;
  Matrix D_yd, D_zd, D_zn;  // feedthrough (static plant and sensor paths)
  int n_outputs = 0;        // N_y
  int n_sensors = 0;        // N_z
};

/// Combines plant dynamics, modal integrator/leakage states and (when the
/// controller has a finite roll-off pole) two roll-off states per active
/// channel. `delta` is the sensing model error added to B; pass an empty
/// sparse matrix for the nominal loop.
ClosedLoopSystem assemble_closed_loop(const PlantModel& plant, const ModalController& controller,
                                      const ModalDecomposition& decomp, const MeasurementMap& map,
                                      const SparseMatrix& delta);

struct DisturbanceModel {
  bool enable_static = true;
  double static_amplitude = 1e-3;  // per-DOF std of the quasi-static offsets

  bool enable_wind = true;
  double wind_cutoff_hz = 0.1;          // first-order low-pass corner
  double wind_correlation_length = 5.0;  // exp(-dist/l_c), in lattice pitches
  double wind_rms = 1.0;                 // stationary per-subsystem RMS
};

struct SimulationTrace {
  double dt = 0.0;
  double horizon = 0.0;
  std::uint64_t seed = 0;
  std::vector<std::string> channels;  // y*, then u*, then z* (recorded subset)
  Matrix y;  // n_steps x N_y
  Matrix u;  // n_steps x N_y (empty unless recorded)
  Matrix z;  // n_steps x N_z (empty unless recorded)
  bool diverged = false;

  long steps() const { return y.rows(); }
};

struct SimulateOptions {
  double dt = 1e-3;
  double horizon = 10.0;
  std::uint64_t seed = 1;
  double sensor_noise_per_sqrt_hz = 0.0;
  bool record_u = false;
  bool record_z = false;
};

/// Zero-order-hold simulation of the assembled loop under the disturbance
/// model and white sensor noise (per-sample std sigma_n / sqrt(dt)).
/// Deterministic for fixed options and seed. Divergence is flagged when the
/// state norm exceeds 1e6 times its early-horizon scale; the run still
/// completes (states are clamped to finite values on overflow).
SimulationTrace simulate(const ClosedLoopSystem& system, const SpatialStructure& structure,
                         const DisturbanceModel& disturbance, const SimulateOptions& options);

struct WindField {
  Matrix series;  // n_steps x M, one column per subsystem
  bool regularized = false;  // kernel needed a diagonal jitter
};

/// Spatially correlated (exponential kernel), temporally low-passed wind
/// force series with the given stationary per-subsystem RMS.
WindField wind_field(const SpatialStructure& structure, double correlation_length,
                     double cutoff_hz, double rms, double dt, long n_steps, std::uint64_t seed);

struct PsdEstimate {
  Vector frequency;  // Hz
  Vector power;      // one-sided density, units^2 / Hz
  int averages = 0;
};

/// Welch periodogram with a Hann window. `overlap` is the fractional segment
/// overlap in [0, 1).
PsdEstimate psd(const Vector& signal, double dt, long segment_length, double overlap);

struct RejectionRatio {
  Vector frequency;
  Vector ratio;                 // PSD(closed) / PSD(open)
  std::vector<bool> floor_flag;  // denominator below the floor
};

/// Ratio of closed- over open-loop PSD of modal output channel `mode`
/// (1-based). Both traces must come from the same disturbance seed and grid.
RejectionRatio rejection_ratio(const SimulationTrace& closed, const SimulationTrace& open,
                               int mode, const ModalDecomposition& decomp, long segment_length,
                               double overlap, double floor_rel = 1e-9);

/// RMS over the selected trace columns, restricted to t >= burn_in.
double rms_metric(const Matrix& data, const std::vector<int>& columns, double dt,
                  double burn_in);

}  // namespace relsense
