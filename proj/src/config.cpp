#include "relsense/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

namespace relsense {

TuningConfig ExperimentConfig::tuning() const {
  TuningConfig t;
  t.k0 = controller.k0_rad_per_s;
  t.k1 = controller.k1_rad_per_s;
  t.p0_hz = controller.p0_hz;
  t.epsilon = uncertainty.epsilon;
  t.rolloff_pole = controller.rolloff_hz > 0.0 ? 2.0 * M_PI * controller.rolloff_hz
                                               : std::numeric_limits<double>::infinity();
  t.schedule = controller.schedule;
  return t;
}

DisturbanceModel ExperimentConfig::disturbance() const {
  DisturbanceModel d;
  d.enable_static = simulation.static_enabled;
  d.static_amplitude = simulation.static_disturbance_amplitude;
  d.enable_wind = simulation.wind_enabled;
  d.wind_cutoff_hz = simulation.wind_cutoff_hz;
  d.wind_correlation_length = simulation.wind_correlation_pitches;
  d.wind_rms = simulation.wind_rms;
  return d;
}

PlantModel ExperimentConfig::plant_model() const {
  switch (plant.model) {
    case PlantSection::Model::Static:
      return PlantModel::statics();
    case PlantSection::Model::SecondOrder:
      return PlantModel::mirror_segment(plant.type == PlantSection::Type::HexMirror ? 3 : 1,
                                        plant.resonance_hz, plant.damping_ratio);
    case PlantSection::Model::Vehicle:
      return PlantModel::vehicle(plant.mass_kg, plant.drag_n_s_per_m);
  }
  return PlantModel::statics();
}

SIStencil ExperimentConfig::si_stencil() const {
  SIStencil s;
  s.dimension = stencil.dimension;
  s.sizes = {stencil.size_1, stencil.size_2};
  s.offsets = stencil.offsets;
  s.locality_range = stencil.locality_range;
  return s;
}

namespace {

struct Parser {
  ExperimentConfig config;
  std::string section;
  int line_number = 0;

  [[noreturn]] void fail(const std::string& what) const { throw ConfigError(what, line_number); }

  double number(const std::string& value) const {
    try {
      std::size_t used = 0;
      const double v = std::stod(value, &used);
      if (used != value.size()) fail("trailing characters after number '" + value + "'");
      return v;
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception&) {
      fail("expected a number, got '" + value + "'");
    }
  }

  int integer(const std::string& value) const {
    const double v = number(value);
    if (v != std::floor(v)) fail("expected an integer, got '" + value + "'");
    return static_cast<int>(v);
  }

  bool boolean(const std::string& value) const {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    fail("expected true/false, got '" + value + "'");
  }

  // "1" or "1,0;0,1;1,-1"
  std::vector<std::array<int, 2>> offsets(const std::string& value) const {
    std::vector<std::array<int, 2>> out;
    std::istringstream groups(value);
    std::string group;
    while (std::getline(groups, group, ';')) {
      std::array<int, 2> l = {0, 0};
      std::istringstream parts(group);
      std::string part;
      int i = 0;
      while (std::getline(parts, part, ',')) {
        if (i >= 2) fail("offset '" + group + "' has more than two components");
        l[i++] = integer(part);
      }
      if (i == 0) fail("empty offset entry");
      out.push_back(l);
    }
    if (out.empty()) fail("offset list is empty");
    return out;
  }

  void assign(const std::string& key, const std::string& value) {
    if (section == "plant") {
      auto& p = config.plant;
      if (key == "type") {
        if (value == "chain") p.type = PlantSection::Type::Chain;
        else if (value == "ring") p.type = PlantSection::Type::Ring;
        else if (value == "hex_mirror") p.type = PlantSection::Type::HexMirror;
        else fail("unknown plant type '" + value + "'");
      } else if (key == "subsystems") p.subsystems = integer(value);
      else if (key == "rings") p.rings = integer(value);
      else if (key == "hole_rings") p.hole_rings = integer(value);
      else if (key == "edge_length_m") p.edge_length_m = number(value);
      else if (key == "sensor_offset") p.sensor_offset = number(value);
      else if (key == "model") {
        if (value == "static") p.model = PlantSection::Model::Static;
        else if (value == "second_order") p.model = PlantSection::Model::SecondOrder;
        else if (value == "vehicle") p.model = PlantSection::Model::Vehicle;
        else fail("unknown plant model '" + value + "'");
      } else if (key == "resonance_hz") p.resonance_hz = number(value);
      else if (key == "damping_ratio") p.damping_ratio = number(value);
      else if (key == "mass_kg") p.mass_kg = number(value);
      else if (key == "drag_n_s_per_m") p.drag_n_s_per_m = number(value);
      else fail("unknown key '" + key + "' in [plant]");
    } else if (section == "uncertainty") {
      auto& u = config.uncertainty;
      if (key == "epsilon") u.epsilon = number(value);
      else if (key == "mode") {
        if (value == "independent") u.mode = UncertaintyMode::IndependentEntries;
        else if (value == "spatially_invariant") u.mode = UncertaintyMode::SpatiallyInvariant;
        else if (value == "symmetry_preserving") u.mode = UncertaintyMode::SymmetryPreserving;
        else fail("unknown uncertainty mode '" + value + "'");
      } else fail("unknown key '" + key + "' in [uncertainty]");
    } else if (section == "controller") {
      auto& c = config.controller;
      if (key == "enabled") c.enabled = boolean(value);
      else if (key == "k0_rad_per_s") c.k0_rad_per_s = number(value);
      else if (key == "k1_rad_per_s") c.k1_rad_per_s = number(value);
      else if (key == "p0_hz") c.p0_hz = number(value);
      else if (key == "rolloff_hz") c.rolloff_hz = number(value);
      else if (key == "schedule") {
        if (value == "robust") c.schedule = GainSchedule::Robust;
        else if (value == "uniform_gain") c.schedule = GainSchedule::UniformGain;
        else fail("unknown schedule '" + value + "'");
      } else fail("unknown key '" + key + "' in [controller]");
    } else if (section == "stencil") {
      auto& s = config.stencil;
      if (key == "dimension") s.dimension = integer(value);
      else if (key == "size_1") s.size_1 = integer(value);
      else if (key == "size_2") s.size_2 = integer(value);
      else if (key == "offsets") s.offsets = offsets(value);
      else if (key == "locality_range") s.locality_range = number(value);
      else if (key == "gain_margin") s.gain_margin = number(value);
      else if (key == "phase_margin_rad") s.phase_margin_rad = number(value);
      else if (key == "omega_min_rad_per_s") s.omega_min_rad_per_s = number(value);
      else if (key == "omega_max_rad_per_s") s.omega_max_rad_per_s = number(value);
      else if (key == "omega_points_per_decade") s.omega_points_per_decade = integer(value);
      else fail("unknown key '" + key + "' in [stencil]");
    } else if (section == "simulation") {
      auto& s = config.simulation;
      if (key == "dt_s") s.dt_s = number(value);
      else if (key == "duration_s") s.duration_s = number(value);
      else if (key == "seed") s.seed = static_cast<std::uint64_t>(number(value));
      else if (key == "sensor_noise_per_sqrt_hz") s.sensor_noise_per_sqrt_hz = number(value);
      else if (key == "wind_rms") s.wind_rms = number(value);
      else if (key == "wind_cutoff_hz") s.wind_cutoff_hz = number(value);
      else if (key == "wind_correlation_pitches") s.wind_correlation_pitches = number(value);
      else if (key == "static_disturbance_amplitude") s.static_disturbance_amplitude = number(value);
      else if (key == "wind_enabled") s.wind_enabled = boolean(value);
      else if (key == "static_enabled") s.static_enabled = boolean(value);
      else if (key == "psd_segment_s") s.psd_segment_s = number(value);
      else if (key == "psd_overlap") s.psd_overlap = number(value);
      else if (key == "ratio_mode") s.ratio_mode = integer(value);
      else if (key == "trace_csv") s.trace_csv = boolean(value);
      else fail("unknown key '" + key + "' in [simulation]");
    } else if (section == "spectrum") {
      auto& s = config.spectrum;
      if (key == "rank_tol") s.rank_tol = number(value);
      else if (key == "census_threshold") s.census_threshold = number(value);
      else if (key == "walsh_groups") s.walsh_groups = integer(value);
      else fail("unknown key '" + key + "' in [spectrum]");
    } else if (section == "worstcase") {
      auto& w = config.worstcase;
      if (key == "mode_b") w.mode_b = integer(value);
      else fail("unknown key '" + key + "' in [worstcase]");
    } else {
      fail("key '" + key + "' appears before any [section]");
    }
  }
};

std::string strip(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text) {
  static const std::vector<std::string> known_sections = {
      "plant", "uncertainty", "controller", "stencil", "simulation", "spectrum", "worstcase"};

  Parser parser;
  std::istringstream in(text);
  std::string raw;
  while (std::getline(in, raw)) {
    ++parser.line_number;
    std::string line = strip(raw);
    if (const auto hash = line.find('#'); hash != std::string::npos) {
      line = strip(line.substr(0, hash));
    }
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') parser.fail("unterminated section header");
      const std::string name = strip(line.substr(1, line.size() - 2));
      if (std::find(known_sections.begin(), known_sections.end(), name) == known_sections.end()) {
        parser.fail("unknown section [" + name + "]");
      }
      parser.section = name;
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string::npos) parser.fail("expected 'key = value'");
    const std::string key = strip(line.substr(0, eq));
    const std::string value = strip(line.substr(eq + 1));
    if (key.empty()) parser.fail("empty key");
    if (value.empty()) parser.fail("empty value for key '" + key + "'");
    parser.assign(key, value);
  }
  return parser.config;
}

ExperimentConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str());
}

}  // namespace relsense
