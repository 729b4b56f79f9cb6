#include "relsense/io.hpp"

#include <nlohmann/json.hpp>

#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace relsense::io {

namespace {

std::ofstream open_out(const std::filesystem::path& path, std::ios::openmode mode = {}) {
  std::ofstream out(path, mode);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  return out;
}

std::ifstream open_in(const std::filesystem::path& path, std::ios::openmode mode = {}) {
  std::ifstream in(path, mode);
  if (!in) throw std::runtime_error("cannot open for reading: " + path.string());
  return in;
}

}  // namespace

void write_coo(const std::filesystem::path& path, const SparseMatrix& matrix) {
  std::ofstream out = open_out(path);
  out << "# " << matrix.rows() << " " << matrix.cols() << " " << matrix.nonZeros() << "\n";
  out << std::setprecision(17);
  for (int col = 0; col < matrix.outerSize(); ++col) {
    for (SparseMatrix::InnerIterator it(matrix, col); it; ++it) {
      out << it.row() << "," << it.col() << "," << it.value() << "\n";
    }
  }
}

SparseMatrix read_coo(const std::filesystem::path& path) {
  std::ifstream in = open_in(path);
  std::string line;
  if (!std::getline(in, line) || line.empty() || line[0] != '#') {
    throw std::runtime_error("coo file missing '# rows cols nnz' header: " + path.string());
  }
  std::istringstream header(line.substr(1));
  long rows = 0, cols = 0, nnz = 0;
  header >> rows >> cols >> nnz;

  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(nnz);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream fields(line);
    long r = 0, c = 0;
    double v = 0.0;
    fields >> r >> c >> v;
    triplets.emplace_back(r, c, v);
  }
  SparseMatrix m(rows, cols);
  m.setFromTriplets(triplets.begin(), triplets.end());
  m.makeCompressed();
  return m;
}

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const Matrix& rows) {
  if (header.size() != static_cast<std::size_t>(rows.cols())) {
    throw std::invalid_argument("write_csv: header width does not match the data");
  }
  std::ofstream out = open_out(path);
  out << std::setprecision(17);
  for (std::size_t i = 0; i < header.size(); ++i) {
    out << header[i] << (i + 1 < header.size() ? "," : "\n");
  }
  for (int r = 0; r < rows.rows(); ++r) {
    for (int c = 0; c < rows.cols(); ++c) {
      out << rows(r, c) << (c + 1 < rows.cols() ? "," : "\n");
    }
  }
}

nlohmann::json geometry_to_json(const SegmentGeometry& geometry) {
  nlohmann::json j;
  j["edge_length_m"] = geometry.edge_length;
  j["segments"] = nlohmann::json::array();
  for (const auto& seg : geometry.segments) {
    nlohmann::json s;
    s["center"] = {seg.center.x(), seg.center.y()};
    s["vertices"] = nlohmann::json::array();
    for (const auto& v : seg.vertices) s["vertices"].push_back({v.x(), v.y()});
    s["h_points"] = nlohmann::json::array();
    for (const auto& h : seg.h_points) s["h_points"].push_back({h.x(), h.y()});
    j["segments"].push_back(std::move(s));
  }
  j["sensors"] = nlohmann::json::array();
  for (const auto& sensor : geometry.sensors) {
    nlohmann::json s;
    s["positive_segment"] = sensor.positive_segment;
    s["negative_segment"] = sensor.negative_segment;
    s["point"] = {sensor.point.x(), sensor.point.y()};
    s["weights_positive"] = {sensor.weights_positive(0), sensor.weights_positive(1),
                             sensor.weights_positive(2)};
    s["weights_negative"] = {sensor.weights_negative(0), sensor.weights_negative(1),
                             sensor.weights_negative(2)};
    j["sensors"].push_back(std::move(s));
  }
  return j;
}

nlohmann::json certificate_to_json(const WalshCertificate& certificate) {
  nlohmann::json j;
  j["groups"] = certificate.groups;
  j["bound"] = certificate.bound;
  j["residuals"] = std::vector<double>(certificate.residuals.begin(), certificate.residuals.end());
  j["vectors"] = nlohmann::json::array();
  for (int i = 0; i < certificate.vectors.cols(); ++i) {
    j["vectors"].push_back(
        std::vector<double>(certificate.vectors.col(i).begin(), certificate.vectors.col(i).end()));
  }
  return j;
}

nlohmann::json controller_to_json(const ModalController& controller) {
  nlohmann::json j;
  j["integral_gain_rad_per_s"] =
      std::vector<double>(controller.integral_gain.begin(), controller.integral_gain.end());
  j["leakage_rad_per_s"] =
      std::vector<double>(controller.leakage.begin(), controller.leakage.end());
  j["rolloff_pole_rad_per_s"] =
      controller.has_rolloff() ? nlohmann::json(controller.rolloff_pole) : nlohmann::json();
  j["observable_count"] = controller.observable_count;
  return j;
}

ModalController controller_from_json(const nlohmann::json& j) {
  ModalController c;
  const auto ki = j.at("integral_gain_rad_per_s").get<std::vector<double>>();
  const auto ai = j.at("leakage_rad_per_s").get<std::vector<double>>();
  c.integral_gain = Eigen::Map<const Vector>(ki.data(), ki.size());
  c.leakage = Eigen::Map<const Vector>(ai.data(), ai.size());
  c.rolloff_pole = j.at("rolloff_pole_rad_per_s").is_null()
                       ? std::numeric_limits<double>::infinity()
                       : j.at("rolloff_pole_rad_per_s").get<double>();
  c.observable_count = j.at("observable_count").get<int>();
  return c;
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  std::ofstream out = open_out(path);
  out << j.dump(2) << "\n";
}

void write_trace_csv(const std::filesystem::path& path, const SimulationTrace& trace) {
  std::ofstream out = open_out(path);
  out << "t,channel_id,value\n" << std::setprecision(17);
  auto emit = [&](const Matrix& block, long channel_offset) {
    for (long t = 0; t < block.rows(); ++t) {
      for (int c = 0; c < block.cols(); ++c) {
        out << t * trace.dt << "," << trace.channels[channel_offset + c] << "," << block(t, c)
            << "\n";
      }
    }
  };
  emit(trace.y, 0);
  if (trace.u.size() != 0) emit(trace.u, trace.y.cols());
  if (trace.z.size() != 0) emit(trace.z, trace.y.cols() + trace.u.cols());
}

namespace {

template <typename T>
void put(std::ofstream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::ifstream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  return value;
}

}  // namespace

void write_trace_binary(const std::filesystem::path& path, const SimulationTrace& trace) {
  std::ofstream out = open_out(path, std::ios::binary);
  out.write("RSTRACE1", 8);
  put(out, trace.dt);
  put(out, trace.horizon);
  put(out, trace.seed);
  const auto n_channels = static_cast<std::uint32_t>(trace.channels.size());
  const auto n_steps = static_cast<std::uint32_t>(trace.steps());
  put(out, n_channels);
  put(out, n_steps);
  for (const std::string& name : trace.channels) {
    put(out, static_cast<std::uint32_t>(name.size()));
    out.write(name.data(), name.size());
  }
  auto emit = [&](const Matrix& block) {
    for (int c = 0; c < block.cols(); ++c) {
      for (long t = 0; t < block.rows(); ++t) put(out, block(t, c));
    }
  };
  emit(trace.y);
  if (trace.u.size() != 0) emit(trace.u);
  if (trace.z.size() != 0) emit(trace.z);
}

SimulationTrace read_trace_binary(const std::filesystem::path& path) {
  std::ifstream in = open_in(path, std::ios::binary);
  char magic[8];
  in.read(magic, 8);
  if (std::memcmp(magic, "RSTRACE1", 8) != 0) {
    throw std::runtime_error("not an RSTRACE1 file: " + path.string());
  }
  SimulationTrace trace;
  trace.dt = get<double>(in);
  trace.horizon = get<double>(in);
  trace.seed = get<std::uint64_t>(in);
  const auto n_channels = get<std::uint32_t>(in);
  const auto n_steps = get<std::uint32_t>(in);
  for (std::uint32_t i = 0; i < n_channels; ++i) {
    const auto len = get<std::uint32_t>(in);
    std::string name(len, '\0');
    in.read(name.data(), len);
    trace.channels.push_back(std::move(name));
  }
  // All channels land in y when read back; the split is a writer concern.
  trace.y.resize(n_steps, n_channels);
  for (std::uint32_t c = 0; c < n_channels; ++c) {
    for (std::uint32_t t = 0; t < n_steps; ++t) trace.y(t, c) = get<double>(in);
  }
  if (!in) throw std::runtime_error("truncated trace file: " + path.string());
  return trace;
}

}  // namespace relsense::io
