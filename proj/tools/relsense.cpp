// relsense: reproducible experiments on relative-sensing performance limits.
//
//   relsense <command> --config <path> --out <dir> [--seed N] [--mode-b N]
//
// Commands: spectrum, worstcase, nyquist, simulate, tune.
// Exit codes: 0 ok, 2 configuration error, 3 robustness violation detected,
// 4 simulation divergence.

#include "relsense/config.hpp"
#include "relsense/io.hpp"
#include "relsense/robustness.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>

using namespace relsense;
namespace fs = std::filesystem;

namespace {

struct Model {
  SpatialStructure structure;
  MeasurementMap map;
  std::optional<SegmentGeometry> geometry;
};

Model build_model(const ExperimentConfig& config) {
  Model model;
  switch (config.plant.type) {
    case PlantSection::Type::Chain: {
      SensingModel m = build_chain(config.plant.subsystems);
      model.structure = std::move(m.structure);
      model.map = std::move(m.map);
      break;
    }
    case PlantSection::Type::Ring: {
      SensingModel m = build_ring(config.plant.subsystems);
      model.structure = std::move(m.structure);
      model.map = std::move(m.map);
      break;
    }
    case PlantSection::Type::HexMirror: {
      HexMirrorModel m = build_hex_mirror(config.plant.rings, config.plant.hole_rings,
                                          config.plant.edge_length_m, config.plant.sensor_offset);
      model.structure = std::move(m.structure);
      model.map = std::move(m.map);
      model.geometry = std::move(m.geometry);
      break;
    }
  }
  return model;
}

ModalController build_controller(const ExperimentConfig& config, const Model& model,
                                 const ModalDecomposition& decomp) {
  if (!config.controller.enabled) return ModalController::disabled(decomp.outputs());
  const TuningConfig tuning = config.tuning();
  if (tuning.schedule == GainSchedule::UniformGain || config.uncertainty.epsilon == 0.0) {
    return tune_modal(decomp, tuning, {});
  }
  const Vector phis = phi_sweep(model.map, decomp, config.uncertainty.epsilon);
  return tune_modal(decomp, tuning, std::vector<double>(phis.begin(), phis.end()));
}

int cmd_spectrum(const ExperimentConfig& config, const fs::path& out) {
  const Model model = build_model(config);
  const ModalDecomposition decomp = decompose(model.map, config.spectrum.rank_tol);

  const double sigma_n = config.simulation.sensor_noise_per_sqrt_hz > 0.0
                             ? config.simulation.sensor_noise_per_sqrt_hz
                             : 1.0;
  const auto gains = noise_gain(decomp, sigma_n);

  Matrix rows(decomp.outputs(), 4);
  for (int k = 0; k < decomp.outputs(); ++k) {
    rows(k, 0) = k + 1;
    rows(k, 1) = decomp.sigma(k);
    rows(k, 2) = decomp.lambda(k);
    rows(k, 3) = gains[k];
  }
  io::write_csv(out / "spectrum.csv", {"k", "sigma", "lambda", "noise_variance"}, rows);
  io::write_coo(out / "B.coo", model.map.B);
  io::write_coo(out / "L.coo", laplacian(model.map));
  if (model.geometry) io::write_json(out / "geometry.json", io::geometry_to_json(*model.geometry));

  if (config.spectrum.walsh_groups > 0) {
    const WalshCertificate cert =
        walsh_poorly_observable(model.structure, model.map, config.spectrum.walsh_groups);
    nlohmann::json j = io::certificate_to_json(cert);
    j["verified"] = verify_walsh_bound(cert, decomp);
    io::write_json(out / "walsh_certificate.json", j);
  }

  const CensusResult census = small_eigen_census(decomp, config.spectrum.census_threshold);
  nlohmann::json summary;
  summary["outputs"] = decomp.outputs();
  summary["sensors"] = model.map.sensors();
  summary["observable_count"] = decomp.observable_count;
  summary["zero_modes"] = census.zero_modes;
  summary["census_threshold"] = config.spectrum.census_threshold;
  summary["census_count"] = census.count;
  summary["census_indices"] = census.indices;
  io::write_json(out / "spectrum_summary.json", summary);
  std::printf("spectrum: %d outputs, N_0 = %d, %d zero modes, census(%g) = %d\n",
              decomp.outputs(), decomp.observable_count, census.zero_modes,
              config.spectrum.census_threshold, census.count);
  return 0;
}

void write_poles(const fs::path& path, const ComplexVector& poles) {
  Matrix rows(poles.size(), 2);
  for (int i = 0; i < poles.size(); ++i) {
    rows(i, 0) = poles(i).real();
    rows(i, 1) = poles(i).imag();
  }
  io::write_csv(path, {"re", "im"}, rows);
}

int cmd_worstcase(const ExperimentConfig& config, const fs::path& out) {
  const Model model = build_model(config);
  const ModalDecomposition decomp = decompose(model.map, config.spectrum.rank_tol);
  const int b = config.worstcase.mode_b;
  const double eps = config.uncertainty.epsilon;

  const SparseMatrix delta = worst_case_delta(model.map, decomp, b, eps);
  io::write_coo(out / "delta.coo", delta);

  const Vector phis = phi_sweep(model.map, decomp, eps);
  Matrix sweep(decomp.observable_count, 3);
  for (int k = 0; k < decomp.observable_count; ++k) {
    sweep(k, 0) = k + 1;
    sweep(k, 1) = decomp.lambda(k);
    sweep(k, 2) = phis(k);
  }
  io::write_csv(out / "phi_sweep.csv", {"b", "lambda_b", "phi_b"}, sweep);

  const PlantModel plant = config.plant_model();
  const ModalController controller = build_controller(config, model, decomp);
  const ComplexVector nominal = closed_loop_poles(plant, controller, decomp, model.map, {});
  const ComplexVector perturbed = closed_loop_poles(plant, controller, decomp, model.map, delta);
  write_poles(out / "poles_nominal.csv", nominal);
  write_poles(out / "poles_perturbed.csv", perturbed);

  const double phi_b = phis(b - 1);
  const double max_re = perturbed.size() > 0 ? perturbed(0).real() : 0.0;
  const bool destabilized = max_re > 0.0;

  nlohmann::json summary;
  summary["mode_b"] = b;
  summary["epsilon"] = eps;
  summary["phi_b"] = phi_b;
  summary["symmetry_residual_max"] = symmetry_residual(delta).cwiseAbs().maxCoeff();
  summary["max_re_nominal"] = nominal.size() > 0 ? nominal(0).real() : 0.0;
  summary["max_re_perturbed"] = max_re;
  summary["destabilized"] = destabilized;
  io::write_json(out / "worstcase_summary.json", summary);

  std::printf("worstcase: b = %d, phi_b = %.6g, max Re nominal = %.6g, perturbed = %.6g\n", b,
              phi_b, summary["max_re_nominal"].get<double>(), max_re);
  return destabilized ? 3 : 0;
}

int cmd_nyquist(const ExperimentConfig& config, const fs::path& out) {
  const SIStencil stencil = config.si_stencil();
  const StencilSection& s = config.stencil;
  const double eps = config.uncertainty.epsilon;
  const TuningConfig tuning = config.tuning();

  // Frequency response grid, log spaced.
  const int decades = static_cast<int>(
      std::ceil(std::log10(s.omega_max_rad_per_s / s.omega_min_rad_per_s)));
  const int n_omega = std::max(2, decades * s.omega_points_per_decade);
  Vector omega(n_omega);
  for (int i = 0; i < n_omega; ++i) {
    omega(i) = s.omega_min_rad_per_s *
               std::pow(s.omega_max_rad_per_s / s.omega_min_rad_per_s,
                        static_cast<double>(i) / (n_omega - 1));
  }

  std::vector<std::array<double, 8>> rows;
  nlohmann::json zone_json;
  for (int i1 = 0; i1 < stencil.sizes[0]; ++i1) {
    for (int i2 = 0; i2 < stencil.sizes[1]; ++i2) {
      if (i1 == 0 && i2 == 0) continue;
      const double xi1 = 2.0 * M_PI * i1 / stencil.sizes[0];
      const double xi2 = 2.0 * M_PI * i2 / stencil.sizes[1];
      const double lam = lambda_xi_circulant(stencil, xi1, xi2);
      const PhiBar phi = phi_bar(stencil, eps, xi1, xi2);
      if (phi.undefined) continue;
      const ExclusionZone zone =
          margin_zone(exclusion_arc(phi), s.gain_margin, s.phase_margin_rad);

      // Per-frequency modal loop from the tuning rule (nominal phi = 0).
      const double sqrt_lam = std::sqrt(lam);
      const double gain = std::min(tuning.k0 / sqrt_lam, tuning.k1);
      const double leak = std::max(0.0, tuning.p0_rad_per_s() - gain * sqrt_lam);
      std::vector<Complex> curve(n_omega);
      for (int w = 0; w < n_omega; ++w) {
        const Complex sv(0.0, omega(w));
        Complex k = sqrt_lam * gain / (sv + leak);
        if (std::isfinite(tuning.rolloff_pole)) {
          const Complex f = sv / tuning.rolloff_pole + 1.0;
          k /= f * f;
        }
        curve[w] = k;
      }
      const NyquistClearance clearance = nyquist_clearance(curve, zone);
      rows.push_back({xi1, xi2, lam, std::abs(phi.value), zone.theta,
                      zone.crosses_imaginary_axis() ? 1.0 : 0.0, clearance.min_distance,
                      clearance.violation ? 1.0 : 0.0});

      if (zone_json.is_null()) {
        zone_json["xi"] = {xi1, xi2};
        zone_json["circle_center"] = {-0.5, 0.0};
        zone_json["circle_radius"] = 0.5;
        zone_json["theta"] = zone.theta;
        zone_json["phase_margin_rad"] = s.phase_margin_rad;
        zone_json["gain_margin"] = s.gain_margin;
      }
    }
  }

  Matrix table(rows.size(), 8);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (int c = 0; c < 8; ++c) table(r, c) = rows[r][c];
  }
  io::write_csv(out / "nyquist_sweep.csv",
                {"xi_1", "xi_2", "lambda_xi", "abs_phi_bar", "theta",
                 "zone_crosses_imag_axis", "clearance", "violation"},
                table);
  if (!zone_json.is_null()) io::write_json(out / "zone.json", zone_json);

  int crossings = 0, violations = 0;
  for (const auto& row : rows) {
    crossings += row[5] != 0.0;
    violations += row[7] != 0.0;
  }
  std::printf("nyquist: %zu frequencies, %d zone crossings, %d curve violations\n", rows.size(),
              crossings, violations);
  return 0;
}

int cmd_simulate(const ExperimentConfig& config, const fs::path& out) {
  const Model model = build_model(config);
  const ModalDecomposition decomp = decompose(model.map, config.spectrum.rank_tol);
  const PlantModel plant = config.plant_model();
  const ModalController controller = build_controller(config, model, decomp);

  const ClosedLoopSystem closed_sys =
      assemble_closed_loop(plant, controller, decomp, model.map, {});
  const ClosedLoopSystem open_sys = assemble_closed_loop(
      plant, ModalController::disabled(decomp.outputs()), decomp, model.map, {});

  SimulateOptions opt;
  opt.dt = config.simulation.dt_s;
  opt.horizon = config.simulation.duration_s;
  opt.seed = config.simulation.seed;
  opt.sensor_noise_per_sqrt_hz = config.simulation.sensor_noise_per_sqrt_hz;
  const DisturbanceModel dist = config.disturbance();

  const SimulationTrace closed = simulate(closed_sys, model.structure, dist, opt);
  const SimulationTrace open = simulate(open_sys, model.structure, dist, opt);
  io::write_trace_binary(out / "trace_closed.rst", closed);
  io::write_trace_binary(out / "trace_open.rst", open);
  if (config.simulation.trace_csv) {
    io::write_trace_csv(out / "trace_closed.csv", closed);
    io::write_trace_csv(out / "trace_open.csv", open);
  }

  const long segment = std::max<long>(
      8, std::min<long>(closed.steps(), std::lround(config.simulation.psd_segment_s / opt.dt)));
  const double overlap = config.simulation.psd_overlap;

  const int mode = config.simulation.ratio_mode;
  const Vector q = decomp.Q.col(mode - 1);
  const PsdEstimate psd_closed = psd(closed.y * q, opt.dt, segment, overlap);
  const PsdEstimate psd_open = psd(open.y * q, opt.dt, segment, overlap);
  {
    Matrix rows(psd_closed.frequency.size(), 2);
    rows.col(0) = psd_closed.frequency;
    rows.col(1) = psd_closed.power;
    io::write_csv(out / "psd_closed.csv", {"freq_hz", "power"}, rows);
    rows.col(0) = psd_open.frequency;
    rows.col(1) = psd_open.power;
    io::write_csv(out / "psd_open.csv", {"freq_hz", "power"}, rows);
  }
  const RejectionRatio ratio = rejection_ratio(closed, open, mode, decomp, segment, overlap);
  {
    Matrix rows(ratio.frequency.size(), 3);
    for (int k = 0; k < ratio.frequency.size(); ++k) {
      rows(k, 0) = ratio.frequency(k);
      rows(k, 1) = ratio.ratio(k);
      rows(k, 2) = ratio.floor_flag[k] ? 1.0 : 0.0;
    }
    io::write_csv(out / "rejection_ratio.csv", {"freq_hz", "ratio", "floor_flag"}, rows);
  }

  const double burn_in = 0.25 * opt.horizon;
  Matrix rms_rows(decomp.outputs(), 3);
  for (int k = 0; k < decomp.outputs(); ++k) {
    Matrix open_channel(open.steps(), 1), closed_channel(closed.steps(), 1);
    open_channel.col(0) = open.y * decomp.Q.col(k);
    closed_channel.col(0) = closed.y * decomp.Q.col(k);
    rms_rows(k, 0) = k + 1;
    rms_rows(k, 1) = rms_metric(open_channel, {0}, opt.dt, burn_in);
    rms_rows(k, 2) = rms_metric(closed_channel, {0}, opt.dt, burn_in);
  }
  io::write_csv(out / "rms.csv", {"k", "rms_open", "rms_closed"}, rms_rows);

  nlohmann::json summary;
  summary["steps"] = closed.steps();
  summary["dt_s"] = opt.dt;
  summary["seed"] = opt.seed;
  summary["psd_averages"] = psd_closed.averages;
  summary["diverged_closed"] = closed.diverged;
  summary["diverged_open"] = open.diverged;
  io::write_json(out / "simulate_summary.json", summary);

  std::printf("simulate: %ld steps, %d PSD averages, divergence: closed=%s open=%s\n",
              closed.steps(), psd_closed.averages, closed.diverged ? "yes" : "no",
              open.diverged ? "yes" : "no");
  return (closed.diverged || open.diverged) ? 4 : 0;
}

int cmd_tune(const ExperimentConfig& config, const fs::path& out) {
  const Model model = build_model(config);
  const ModalDecomposition decomp = decompose(model.map, config.spectrum.rank_tol);
  const double eps = config.uncertainty.epsilon;

  Vector phis = Vector::Zero(decomp.observable_count);
  if (eps > 0.0) phis = phi_sweep(model.map, decomp, eps);
  const ModalController controller =
      tune_modal(decomp, config.tuning(), std::vector<double>(phis.begin(), phis.end()));
  const Vector dc = dc_sensitivity(controller, decomp);

  io::write_json(out / "controller.json", io::controller_to_json(controller));
  Matrix rows(decomp.outputs(), 6);
  for (int k = 0; k < decomp.outputs(); ++k) {
    rows(k, 0) = k + 1;
    rows(k, 1) = decomp.lambda(k);
    rows(k, 2) = controller.integral_gain(k);
    rows(k, 3) = controller.leakage(k);
    rows(k, 4) = k < decomp.observable_count ? phis(k) : 0.0;
    rows(k, 5) = dc(k);
  }
  io::write_csv(out / "tuning.csv", {"k", "lambda", "K_I", "A_I", "phi_k", "dc_sensitivity"},
                rows);

  int leaked = 0;
  for (int k = 0; k < decomp.observable_count; ++k) leaked += controller.leakage(k) > 0.0;
  std::printf("tune: %d observable modes, leakage active on %d, worst DC sensitivity %.4f\n",
              decomp.observable_count, leaked, dc.head(decomp.observable_count).maxCoeff());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"relative-sensing performance limits toolbox"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed_override;
  std::optional<int> mode_b_override;

  for (const std::string name : {"spectrum", "worstcase", "nyquist", "simulate", "tune"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "experiment configuration file")->required();
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--seed", seed_override, "override the simulation seed");
    if (name == "worstcase") {
      sub->add_option("--mode-b", mode_b_override, "worst-case modal index (1-based)");
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    ExperimentConfig config = parse_config(config_path);
    if (seed_override) config.simulation.seed = *seed_override;
    if (mode_b_override) config.worstcase.mode_b = *mode_b_override;

    const fs::path out(out_dir);
    fs::create_directories(out);

    if (app.got_subcommand("spectrum")) return cmd_spectrum(config, out);
    if (app.got_subcommand("worstcase")) return cmd_worstcase(config, out);
    if (app.got_subcommand("nyquist")) return cmd_nyquist(config, out);
    if (app.got_subcommand("simulate")) return cmd_simulate(config, out);
    if (app.got_subcommand("tune")) return cmd_tune(config, out);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
