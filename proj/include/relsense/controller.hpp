#pragma once

#include "relsense/spectral.hpp"
#include "relsense/types.hpp"

#include <limits>
#include <vector>

namespace relsense {

/// Diagonal-in-modal-basis controller: per mode k the transfer function is
/// K_I(k) / (s + A_I(k)) * 1 / (s/p + 1)^2. Gains in rad/s. A non-finite
/// rolloff_pole disables the double pole.
struct ModalController {
  Vector integral_gain;  // K_I, zero on unobservable modes
  Vector leakage;        // A_I >= 0
  double rolloff_pole = std::numeric_limits<double>::infinity();
  int observable_count = 0;

  int modes() const { return static_cast<int>(integral_gain.size()); }
  bool has_rolloff() const { return std::isfinite(rolloff_pole); }
  static ModalController disabled(int n_modes);
};

enum class GainSchedule {
  Robust,       // K_I = min(K_0 / sqrt(lambda), K_1), leakage by the worst-case rule
  UniformGain,  // K_I = K_0 / sqrt(lambda) on every observable mode, no cap, no leakage
};

struct TuningConfig {
  double k0 = 14.4;       // target closed-loop gain, rad/s
  double k1 = 5.7;        // gain cap, rad/s
  double p0_hz = 0.1;     // robust pole bound, Hz
  double epsilon = 0.01;  // uncertainty level behind the phi list
  double rolloff_pole = 2.0 * M_PI * 20.0;  // rad/s
  GainSchedule schedule = GainSchedule::Robust;

  double p0_rad_per_s() const { return 2.0 * M_PI * p0_hz; }
};

/// Tunes the controller per the configured schedule. `phi` holds the
/// per-mode worst-case uncertainty values phi_k <= 0 (at least
/// observable_count entries); pass an empty vector for the nominal
/// (phi = 0) rule.
ModalController tune_modal(const ModalDecomposition& decomp, const TuningConfig& config,
                           const std::vector<double>& phi);

/// |S(0)_{k,k}|: 0 for pure integrators, 1 on unobservable modes, otherwise
/// 1 / (1 + sqrt(lambda_k) K_I(k) / A_I(k)).
Vector dc_sensitivity(const ModalController& controller, const ModalDecomposition& decomp);

/// Scalar plant response for the per-mode loops (see plant_sim.hpp for the
/// state-space models these mirror).
struct ScalarPlant {
  enum class Kind { Static, SecondOrder, Vehicle } kind = Kind::Static;
  double inertia = 1.0;    // J (SecondOrder) or m (Vehicle)
  double damping = 0.0;    // b_a or c
  double stiffness = 1.0;  // k_a
  double gain = 1.0;       // k

  Complex evaluate(Complex s) const;
};

struct SensitivityResponse {
  Vector omega;       // rad/s grid
  ComplexMatrix S;    // n_omega x n_modes
  ComplexMatrix T;    // n_omega x n_modes
};

/// Per-mode sensitivity S = 1/(1+K) and complementary sensitivity T = K/(1+K)
/// on an omega grid, with loop gain
/// K_k(i w) = g(i w) sqrt(lambda_k) K_I(k) / (i w + A_I(k)) / (i w / p + 1)^2.
SensitivityResponse sensitivity_response(const ModalController& controller,
                                         const ModalDecomposition& decomp,
                                         const ScalarPlant& plant, const Vector& omega_grid);

}  // namespace relsense
