#include "relsense/sensing_model.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <vector>

namespace relsense {

namespace {

Vector point1(double x) {
  Vector p(1);
  p << x;
  return p;
}

Vector point2(double x, double y) {
  Vector p(2);
  p << x, y;
  return p;
}

}  // namespace

SensingModel build_chain(int subsystems) {
  if (subsystems < 2) {
    throw std::invalid_argument("build_chain: need at least 2 subsystems");
  }
  const int m = subsystems;

  SensingModel model;
  model.structure.dimension = 1;
  model.structure.positions.reserve(m);
  for (int k = 0; k < m; ++k) {
    model.structure.positions.push_back(point1(static_cast<double>(k)));
  }

  SparseMatrix b(m - 1, m);
  b.reserve(Eigen::VectorXi::Constant(m, 2));
  for (int k = 0; k < m - 1; ++k) {
    b.insert(k, k) = -1.0;
    b.insert(k, k + 1) = 1.0;
    model.map.edges.push_back({k, k + 1, k});
  }
  b.makeCompressed();

  model.map.B = std::move(b);
  model.map.block_size = 1;
  model.map.subsystem_count = m;
  return model;
}

SensingModel build_ring(int subsystems) {
  if (subsystems < 3) {
    throw std::invalid_argument("build_ring: need at least 3 subsystems");
  }
  const int m = subsystems;

  SensingModel model;
  model.structure.dimension = 2;
  // Circle radius chosen so adjacent subsystems sit at unit distance.
  const double radius = 0.5 / std::sin(M_PI / m);
  model.structure.positions.reserve(m);
  for (int k = 0; k < m; ++k) {
    const double a = 2.0 * M_PI * k / m;
    model.structure.positions.push_back(point2(radius * std::cos(a), radius * std::sin(a)));
  }

  SparseMatrix b(m, m);
  b.reserve(Eigen::VectorXi::Constant(m, 2));
  for (int k = 0; k < m; ++k) {
    const int next = (k + 1) % m;
    b.insert(k, k) = -1.0;
    b.insert(k, next) = 1.0;
    model.map.edges.push_back({k, next, k});
  }
  b.makeCompressed();

  model.map.B = std::move(b);
  model.map.block_size = 1;
  model.map.subsystem_count = m;
  return model;
}

namespace {

// Barycentric coordinates of p w.r.t. triangle (t1, t2, t3). Weights tiny
// enough to be roundoff of an on-edge point are snapped to zero so sensors
// lying exactly on the triangle boundary stay convex.
Eigen::Vector3d barycentric(const Eigen::Vector2d& p, const Eigen::Vector2d& t1,
                            const Eigen::Vector2d& t2, const Eigen::Vector2d& t3) {
  const double det = (t2.y() - t3.y()) * (t1.x() - t3.x()) + (t3.x() - t2.x()) * (t1.y() - t3.y());
  Eigen::Vector3d w;
  w(0) = ((t2.y() - t3.y()) * (p.x() - t3.x()) + (t3.x() - t2.x()) * (p.y() - t3.y())) / det;
  w(1) = ((t3.y() - t1.y()) * (p.x() - t3.x()) + (t1.x() - t3.x()) * (p.y() - t3.y())) / det;
  w(2) = 1.0 - w(0) - w(1);
  for (int i = 0; i < 3; ++i) {
    if (std::abs(w(i)) < 1e-13) w(i) = 0.0;
  }
  w /= w.sum();
  return w;
}

struct Axial {
  int q = 0;
  int r = 0;
  bool operator<(const Axial& o) const { return q != o.q ? q < o.q : r < o.r; }
  Axial operator+(const Axial& o) const { return {q + o.q, r + o.r}; }
};

// Walking order for ring enumeration; any fixed order works, this one starts
// south of the center and goes counterclockwise.
constexpr std::array<Axial, 6> kAxialDirections = {
    Axial{1, 0}, Axial{0, 1}, Axial{-1, 1}, Axial{-1, 0}, Axial{0, -1}, Axial{1, -1}};

std::vector<Axial> hex_cells(int rings, int hole_rings) {
  std::vector<Axial> cells;
  if (hole_rings == 0) cells.push_back({0, 0});
  for (int r = std::max(1, hole_rings); r < rings; ++r) {
    Axial c{0, -r};
    for (const Axial& dir : kAxialDirections) {
      for (int step = 0; step < r; ++step) {
        cells.push_back(c);
        c = c + dir;
      }
    }
  }
  return cells;
}

}  // namespace

HexMirrorModel build_hex_mirror(int rings, int hole_rings, double edge_length,
                                double sensor_offset) {
  if (rings < 1) throw std::invalid_argument("build_hex_mirror: rings must be >= 1");
  if (hole_rings < 0 || hole_rings >= rings) {
    throw std::invalid_argument("build_hex_mirror: hole_rings must satisfy 0 <= H < rings");
  }
  if (edge_length <= 0.0) throw std::invalid_argument("build_hex_mirror: edge_length must be > 0");
  if (sensor_offset <= 0.0 || sensor_offset >= 0.5) {
    throw std::invalid_argument("build_hex_mirror: sensor_offset must lie in (0, 0.5)");
  }

  const double e = edge_length;
  const double sqrt3 = std::sqrt(3.0);
  const double pitch = sqrt3 * e;  // center distance of adjacent segments

  const std::vector<Axial> cells = hex_cells(rings, hole_rings);
  const int m = static_cast<int>(cells.size());

  std::map<Axial, int> index_of;
  for (int i = 0; i < m; ++i) index_of[cells[i]] = i;

  // Lattice basis for axial coordinates (q, r).
  const Eigen::Vector2d a1(1.5 * e, 0.5 * sqrt3 * e);
  const Eigen::Vector2d a2(0.0, sqrt3 * e);

  HexMirrorModel model;
  model.structure.dimension = 2;
  model.geometry.edge_length = e;
  model.geometry.segments.resize(m);

  for (int i = 0; i < m; ++i) {
    const Eigen::Vector2d c = cells[i].q * a1 + cells[i].r * a2;
    model.structure.positions.push_back(point2(c.x() / pitch, c.y() / pitch));

    SegmentGeometry::Segment seg;
    seg.center = c;
    for (int v = 0; v < 6; ++v) {
      const double a = M_PI / 3.0 * v;
      seg.vertices[v] = c + e * Eigen::Vector2d(std::cos(a), std::sin(a));
    }
    // The h-points span the equilateral triangle obtained by extending the
    // bottom, upper-left and upper-right hexagon edges. It contains the whole
    // hexagon, so every sensor point has convex barycentric weights.
    seg.h_points[0] = c + Eigen::Vector2d(-1.5 * e, -0.5 * sqrt3 * e);
    seg.h_points[1] = c + Eigen::Vector2d(1.5 * e, -0.5 * sqrt3 * e);
    seg.h_points[2] = c + Eigen::Vector2d(0.0, sqrt3 * e);
    model.geometry.segments[i] = seg;
  }

  // Two sensors per shared edge, symmetric about the edge midpoint.
  std::vector<Eigen::Triplet<double>> triplets;
  int sensor = 0;
  for (int j = 0; j < m; ++j) {
    for (const Axial& dir : kAxialDirections) {
      const auto it = index_of.find(cells[j] + dir);
      if (it == index_of.end() || it->second < j) continue;  // each pair once
      const int k = it->second;

      const Eigen::Vector2d cj = model.geometry.segments[j].center;
      const Eigen::Vector2d ck = model.geometry.segments[k].center;
      const Eigen::Vector2d mid = 0.5 * (cj + ck);
      Eigen::Vector2d tangent(-(ck - cj).y(), (ck - cj).x());
      tangent.normalize();

      for (const double s : {-sensor_offset, sensor_offset}) {
        const Eigen::Vector2d p = mid + s * e * tangent;

        SegmentGeometry::Sensor sens;
        sens.positive_segment = j;
        sens.negative_segment = k;
        sens.point = p;
        sens.weights_positive = barycentric(p, model.geometry.segments[j].h_points[0],
                                            model.geometry.segments[j].h_points[1],
                                            model.geometry.segments[j].h_points[2]);
        sens.weights_negative = barycentric(p, model.geometry.segments[k].h_points[0],
                                            model.geometry.segments[k].h_points[1],
                                            model.geometry.segments[k].h_points[2]);
        model.geometry.sensors.push_back(sens);

        for (int i = 0; i < 3; ++i) {
          if (sens.weights_positive(i) != 0.0) {
            triplets.emplace_back(sensor, 3 * j + i, sens.weights_positive(i));
          }
          if (sens.weights_negative(i) != 0.0) {
            triplets.emplace_back(sensor, 3 * k + i, -sens.weights_negative(i));
          }
        }
        model.map.edges.push_back({sensor, j, k});
        ++sensor;
      }
    }
  }

  SparseMatrix b(sensor, 3 * m);
  b.setFromTriplets(triplets.begin(), triplets.end());
  b.makeCompressed();
  model.map.B = std::move(b);
  model.map.block_size = 3;
  model.map.subsystem_count = m;
  return model;
}

RelativeReport validate_relative(const MeasurementMap& map, double tol) {
  RelativeReport report;
  const int n = map.block_size;
  const SparseMatrix bt = SparseMatrix(map.B.transpose());  // column-major rows

  for (int row = 0; row < map.sensors(); ++row) {
    // Gather per-block sums of entries and absolute entries.
    std::map<int, std::pair<double, double>> blocks;  // block -> (sum, abs sum)
    for (SparseMatrix::InnerIterator it(bt, row); it; ++it) {
      if (it.value() == 0.0) continue;
      auto& acc = blocks[static_cast<int>(it.row()) / n];
      acc.first += it.value();
      acc.second += std::abs(it.value());
    }

    auto flag = [&](const std::string& reason, double magnitude) {
      report.violations.push_back({row, reason, magnitude});
      report.worst_violation = std::max(report.worst_violation, magnitude);
    };

    if (blocks.size() != 2) {
      flag("row must touch exactly two subsystem blocks",
           std::abs(static_cast<double>(blocks.size()) - 2.0));
      continue;
    }
    for (const auto& [block, acc] : blocks) {
      const double mixed = acc.second - std::abs(acc.first);
      if (mixed > tol) flag("mixed signs within block " + std::to_string(block), mixed);
    }
    auto it = blocks.begin();
    double s0 = it->second.first;
    ++it;
    double s1 = it->second.first;
    if (s0 < s1) std::swap(s0, s1);
    const double unit_gain = std::max(std::abs(s0 - 1.0), std::abs(s1 + 1.0));
    if (unit_gain > tol) flag("block sums must be +1 and -1", unit_gain);
  }

  report.pass = report.violations.empty();
  return report;
}

LocalityReport validate_local(const MeasurementMap& map, const SpatialStructure& structure,
                              double range) {
  if (range < 1.0) throw std::invalid_argument("validate_local: range must be >= 1");
  LocalityReport report;
  for (const SensorEdge& edge : map.edges) {
    const double dist =
        (structure.positions.at(edge.positive_subsystem) - structure.positions.at(edge.negative_subsystem))
            .norm();
    report.worst_distance = std::max(report.worst_distance, dist);
    if (dist > range + 1e-12) report.violating_sensors.push_back(edge.sensor);
  }
  report.pass = report.violating_sensors.empty();
  return report;
}

SparseMatrix laplacian(const MeasurementMap& map) {
  SparseMatrix bt = SparseMatrix(map.B.transpose());
  SparseMatrix l = bt * map.B;
  l.makeCompressed();
  return l;
}

}  // namespace relsense
