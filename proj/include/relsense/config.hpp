#pragma once

#include "relsense/controller.hpp"
#include "relsense/plant_sim.hpp"
#include "relsense/robustness.hpp"
#include "relsense/si_analysis.hpp"

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>

namespace relsense {

/// Raised on malformed or unknown configuration input; carries the line.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what, int line = 0)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_number(line) {}
  int line_number = 0;
};

struct PlantSection {
  enum class Type { Chain, Ring, HexMirror } type = Type::Chain;
  int subsystems = 10;     // chain / ring
  int rings = 3;           // hex mirror
  int hole_rings = 0;
  double edge_length_m = 0.7;
  double sensor_offset = 0.25;

  enum class Model { Static, SecondOrder, Vehicle } model = Model::Static;
  double resonance_hz = 50.0;
  double damping_ratio = 0.01;
  double mass_kg = 1.0;
  double drag_n_s_per_m = 0.1;
};

struct UncertaintySection {
  double epsilon = 0.01;
  UncertaintyMode mode = UncertaintyMode::IndependentEntries;
};

struct ControllerSection {
  bool enabled = true;
  double k0_rad_per_s = 14.4;
  double k1_rad_per_s = 5.7;
  double p0_hz = 0.1;
  double rolloff_hz = 20.0;  // 0 disables the double pole
  GainSchedule schedule = GainSchedule::Robust;
};

struct StencilSection {
  int dimension = 1;
  int size_1 = 100;
  int size_2 = 1;
  std::vector<std::array<int, 2>> offsets = {{1, 0}};
  double locality_range = 1.0;
  double gain_margin = 2.0;
  double phase_margin_rad = M_PI / 4.0;
  double omega_min_rad_per_s = 1e-3;
  double omega_max_rad_per_s = 1e3;
  int omega_points_per_decade = 1024;
};

struct SimulationSection {
  double dt_s = 1e-3;
  double duration_s = 10.0;
  std::uint64_t seed = 1;
  double sensor_noise_per_sqrt_hz = 0.0;
  double wind_rms = 1.0;
  double wind_cutoff_hz = 0.1;
  double wind_correlation_pitches = 5.0;
  double static_disturbance_amplitude = 1e-3;
  bool wind_enabled = true;
  bool static_enabled = true;
  double psd_segment_s = 1.0;
  double psd_overlap = 0.5;
  int ratio_mode = 1;  // modal channel for the rejection ratio, 1-based
  bool trace_csv = false;  // also write traces in the long CSV format
};

struct SpectrumSection {
  double rank_tol = 1e-9;
  double census_threshold = 0.01;
  int walsh_groups = 0;  // 0 skips the certificate export
};

struct WorstCaseSection {
  int mode_b = 1;  // 1-based modal index
};

struct ExperimentConfig {
  PlantSection plant;
  UncertaintySection uncertainty;
  ControllerSection controller;
  StencilSection stencil;
  SimulationSection simulation;
  SpectrumSection spectrum;
  WorstCaseSection worstcase;

  TuningConfig tuning() const;
  DisturbanceModel disturbance() const;
  PlantModel plant_model() const;
  SIStencil si_stencil() const;
};

/// Strict sectioned key-value parser: unknown sections or keys are fatal and
/// reported with their line number.
ExperimentConfig parse_config(const std::filesystem::path& path);
ExperimentConfig parse_config_text(const std::string& text);

}  // namespace relsense
