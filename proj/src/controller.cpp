#include "relsense/controller.hpp"

#include <cmath>
#include <stdexcept>

namespace relsense {

ModalController ModalController::disabled(int n_modes) {
  ModalController c;
  c.integral_gain = Vector::Zero(n_modes);
  c.leakage = Vector::Zero(n_modes);
  c.observable_count = 0;
  return c;
}

ModalController tune_modal(const ModalDecomposition& decomp, const TuningConfig& config,
                           const std::vector<double>& phi) {
  const int n = decomp.outputs();
  const int n0 = decomp.observable_count;
  if (n == 0) throw std::invalid_argument("tune_modal: empty spectrum");
  if (!phi.empty() && static_cast<int>(phi.size()) < n0) {
    throw std::invalid_argument("tune_modal: phi list shorter than the observable count");
  }
  for (int k = 0; k < std::min<int>(phi.size(), n0); ++k) {
    if (phi[k] > 1e-12) {
      throw std::invalid_argument("tune_modal: worst-case phi values must be <= 0");
    }
  }

  ModalController c;
  c.integral_gain = Vector::Zero(n);
  c.leakage = Vector::Zero(n);
  c.rolloff_pole = config.rolloff_pole;
  c.observable_count = n0;

  const double p0 = config.p0_rad_per_s();
  for (int k = 0; k < n0; ++k) {
    const double sqrt_lambda = decomp.sigma(k);
    const double uncapped = config.k0 / sqrt_lambda;
    if (config.schedule == GainSchedule::UniformGain) {
      c.integral_gain(k) = uncapped;
      continue;
    }
    // Constant closed-loop gain K_0 until that would exceed the cap K_1,
    // constant K_I = K_1 afterwards; continuous at the crossover.
    c.integral_gain(k) = std::min(uncapped, config.k1);
    const double phi_k = phi.empty() ? 0.0 : phi[k];
    const double loop_dc = c.integral_gain(k) * sqrt_lambda * (1.0 + phi_k);
    c.leakage(k) = std::max(0.0, p0 - loop_dc);
  }
  return c;
}

Vector dc_sensitivity(const ModalController& controller, const ModalDecomposition& decomp) {
  const int n = decomp.outputs();
  if (controller.modes() != n) {
    throw std::invalid_argument("dc_sensitivity: controller tuned on a different decomposition");
  }
  Vector s(n);
  for (int k = 0; k < n; ++k) {
    if (k >= decomp.observable_count || controller.integral_gain(k) == 0.0) {
      s(k) = 1.0;  // no feedback path
    } else if (controller.leakage(k) == 0.0) {
      s(k) = 0.0;  // pure integrator rejects statics
    } else {
      s(k) = std::abs(
          1.0 / (1.0 + decomp.sigma(k) * controller.integral_gain(k) / controller.leakage(k)));
    }
  }
  return s;
}

Complex ScalarPlant::evaluate(Complex s) const {
  switch (kind) {
    case Kind::Static:
      return gain;
    case Kind::SecondOrder:
      return gain / (inertia * s * s + damping * s + stiffness);
    case Kind::Vehicle:
      return 1.0 / (inertia * s * s + damping * s);
  }
  return gain;
}

SensitivityResponse sensitivity_response(const ModalController& controller,
                                         const ModalDecomposition& decomp,
                                         const ScalarPlant& plant, const Vector& omega_grid) {
  const int n = decomp.outputs();
  if (controller.modes() != n) {
    throw std::invalid_argument(
        "sensitivity_response: controller tuned on a different decomposition");
  }
  SensitivityResponse resp;
  resp.omega = omega_grid;
  resp.S.resize(omega_grid.size(), n);
  resp.T.resize(omega_grid.size(), n);

  for (int w = 0; w < omega_grid.size(); ++w) {
    const Complex s(0.0, omega_grid(w));
    const Complex g = plant.evaluate(s);
    Complex roll(1.0, 0.0);
    if (controller.has_rolloff()) {
      const Complex f = s / controller.rolloff_pole + 1.0;
      roll = 1.0 / (f * f);
    }
    for (int k = 0; k < n; ++k) {
      if (k >= decomp.observable_count || controller.integral_gain(k) == 0.0) {
        resp.S(w, k) = 1.0;
        resp.T(w, k) = 0.0;
        continue;
      }
      const Complex loop = g * decomp.sigma(k) * controller.integral_gain(k) /
                           (s + controller.leakage(k)) * roll;
      resp.S(w, k) = 1.0 / (1.0 + loop);
      resp.T(w, k) = loop / (1.0 + loop);
    }
  }
  return resp;
}

}  // namespace relsense
