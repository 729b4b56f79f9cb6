#include "relsense/config.hpp"
#include "relsense/io.hpp"

#include <doctest.h>

#include <nlohmann/json.hpp>

#include <cstdio>
#include <fstream>
#include <filesystem>

using namespace relsense;

namespace {

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    path = std::filesystem::temp_directory_path() /
           ("relsense_test_" + std::to_string(std::rand()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
};

}  // namespace

TEST_SUITE_BEGIN("config_io");

TEST_CASE("config parsing happy path") {
  const std::string text = R"(
# experiment
[plant]
type = hex_mirror
rings = 4
hole_rings = 1
edge_length_m = 0.7
sensor_offset = 0.3
model = second_order
resonance_hz = 50
damping_ratio = 0.01

[uncertainty]
epsilon = 0.02
mode = symmetry_preserving

[controller]
k0_rad_per_s = 14.4
k1_rad_per_s = 5.7
p0_hz = 0.1
rolloff_hz = 20
schedule = robust

[simulation]
dt_s = 0.001
duration_s = 60
seed = 7
sensor_noise_per_sqrt_hz = 1.0
)";
  const ExperimentConfig config = parse_config_text(text);
  CHECK(config.plant.type == PlantSection::Type::HexMirror);
  CHECK(config.plant.rings == 4);
  CHECK(config.plant.hole_rings == 1);
  CHECK(config.uncertainty.epsilon == 0.02);
  CHECK(config.uncertainty.mode == UncertaintyMode::SymmetryPreserving);
  CHECK(config.simulation.seed == 7);
  CHECK(config.tuning().rolloff_pole == doctest::Approx(2.0 * M_PI * 20.0));
  CHECK(config.tuning().p0_hz == 0.1);
}

TEST_CASE("unknown keys are fatal with their line number") {
  const std::string text = "[plant]\ntype = chain\nsubsystms = 10\n";
  try {
    parse_config_text(text);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.line_number == 3);
    CHECK(std::string(e.what()).find("subsystms") != std::string::npos);
  }

  CHECK_THROWS_AS(parse_config_text("[nosuch]\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("orphan = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("[plant]\ntype chain\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("[plant]\nsubsystems = ten\n"), ConfigError);
}

TEST_CASE("stencil offsets parse") {
  const ExperimentConfig config =
      parse_config_text("[stencil]\ndimension = 2\nsize_1 = 8\nsize_2 = 8\noffsets = 1,0;0,1\n");
  REQUIRE(config.stencil.offsets.size() == 2);
  CHECK(config.stencil.offsets[0] == std::array<int, 2>{1, 0});
  CHECK(config.stencil.offsets[1] == std::array<int, 2>{0, 1});
}

TEST_CASE("coo round trip") {
  TempDir dir;
  const SensingModel chain = build_chain(5);
  const auto path = dir.path / "b.coo";
  io::write_coo(path, chain.map.B);
  const SparseMatrix back = io::read_coo(path);
  CHECK(back.rows() == chain.map.B.rows());
  CHECK(back.cols() == chain.map.B.cols());
  CHECK((Matrix(back) - Matrix(chain.map.B)).cwiseAbs().maxCoeff() == 0.0);

  // Header is "# rows cols nnz".
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  CHECK(header == "# 4 5 8");
}

TEST_CASE("trace binary round trip") {
  TempDir dir;
  SimulationTrace trace;
  trace.dt = 0.25;
  trace.horizon = 1.0;
  trace.seed = 99;
  trace.channels = {"y0", "y1"};
  trace.y.resize(4, 2);
  trace.y << 1, 2, 3, 4, 5, 6, 7, 8.5;

  const auto path = dir.path / "trace.bin";
  io::write_trace_binary(path, trace);
  const SimulationTrace back = io::read_trace_binary(path);
  CHECK(back.dt == trace.dt);
  CHECK(back.horizon == trace.horizon);
  CHECK(back.seed == trace.seed);
  CHECK(back.channels == trace.channels);
  CHECK((back.y - trace.y).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("controller json round trip") {
  ModalController c = ModalController::disabled(3);
  c.integral_gain << 1.0, 2.0, 0.0;
  c.leakage << 0.0, 0.5, 0.0;
  c.rolloff_pole = 125.0;
  c.observable_count = 2;

  const ModalController back = io::controller_from_json(io::controller_to_json(c));
  CHECK((back.integral_gain - c.integral_gain).cwiseAbs().maxCoeff() == 0.0);
  CHECK((back.leakage - c.leakage).cwiseAbs().maxCoeff() == 0.0);
  CHECK(back.rolloff_pole == c.rolloff_pole);
  CHECK(back.observable_count == 2);
}

TEST_CASE("geometry json carries segments and sensors") {
  const HexMirrorModel mirror = build_hex_mirror(2, 0, 0.7, 0.25);
  const nlohmann::json j = io::geometry_to_json(mirror.geometry);
  CHECK(j["segments"].size() == 7);
  CHECK(j["sensors"].size() == 24);
  CHECK(j["segments"][0]["h_points"].size() == 3);
}

TEST_SUITE_END();
