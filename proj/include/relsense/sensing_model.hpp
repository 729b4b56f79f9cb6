#pragma once

#include "relsense/types.hpp"

#include <array>
#include <string>
#include <vector>

namespace relsense {

/// Positions of the subsystems, in units of the subsystem spacing
/// (nearest neighbors are at distance 1).
struct SpatialStructure {
  int dimension = 1;
  std::vector<Vector> positions;

  int subsystem_count() const { return static_cast<int>(positions.size()); }
};

/// One sensor row: which subsystem carries the +1 block and which the -1 block.
struct SensorEdge {
  int sensor = 0;
  int positive_subsystem = 0;
  int negative_subsystem = 0;
};

/// Sparse relative-sensing map B together with its interconnection graph.
/// Each row of B compares a convex combination of one subsystem's outputs
/// with a convex combination of a neighbor's.
struct MeasurementMap {
  SparseMatrix B;                 // N_z x N_y
  int block_size = 1;             // N outputs per subsystem
  int subsystem_count = 0;        // M
  std::vector<SensorEdge> edges;  // one entry per row of B

  int sensors() const { return static_cast<int>(B.rows()); }
  int outputs() const { return static_cast<int>(B.cols()); }
};

/// Planar geometry of the segmented mirror: hexagon outlines, the three
/// reference points whose heights are the segment's degrees of freedom, and
/// the edge-sensor locations with their barycentric weights.
struct SegmentGeometry {
  double edge_length = 0.7;

  struct Segment {
    Eigen::Vector2d center;
    std::array<Eigen::Vector2d, 6> vertices;
    std::array<Eigen::Vector2d, 3> h_points;
  };
  struct Sensor {
    int positive_segment = 0;
    int negative_segment = 0;
    Eigen::Vector2d point;
    Eigen::Vector3d weights_positive;  // barycentric w.r.t. positive segment's h-points
    Eigen::Vector3d weights_negative;  // barycentric w.r.t. negative segment's h-points
  };

  std::vector<Segment> segments;
  std::vector<Sensor> sensors;
};

/// A builder output: the map plus the spatial structure it lives on.
struct SensingModel {
  SpatialStructure structure;
  MeasurementMap map;
};

struct HexMirrorModel {
  SpatialStructure structure;
  MeasurementMap map;
  SegmentGeometry geometry;
};

/// Path interconnection of M vehicles: sensor k reads y_{k+1} - y_k.
/// Throws std::invalid_argument for M < 2.
SensingModel build_chain(int subsystems);

/// Periodic counterpart of the chain: sensor k reads y_{(k+1) mod M} - y_k.
/// Throws std::invalid_argument for M < 3.
SensingModel build_ring(int subsystems);

/// Hexagonal segmented mirror with `rings` rings of segments (ring 0 is the
/// central segment) and the innermost `hole_rings` rings removed. Each
/// segment has 3 degrees of freedom (piston, tip, tilt represented as the
/// heights of its three h-points); each shared edge carries two sensors at
/// +- sensor_offset * edge_length from the edge midpoint.
HexMirrorModel build_hex_mirror(int rings, int hole_rings, double edge_length,
                                double sensor_offset);

struct RowViolation {
  int row = 0;
  std::string reason;
  double magnitude = 0.0;
};

struct RelativeReport {
  bool pass = true;
  double worst_violation = 0.0;
  std::vector<RowViolation> violations;
};

/// Checks every row of B against the two relative-measurement conditions:
/// entries confined to exactly two subsystem blocks, and per block same-signed
/// entries summing to +1 / -1.
RelativeReport validate_relative(const MeasurementMap& map, double tol = 1e-12);

struct LocalityReport {
  bool pass = true;
  double worst_distance = 0.0;
  std::vector<int> violating_sensors;
};

/// Confirms every sensor connects subsystems within spatial range `range`.
LocalityReport validate_local(const MeasurementMap& map, const SpatialStructure& structure,
                              double range);

/// Generalized graph Laplacian L = B^T B (symmetric positive semidefinite).
SparseMatrix laplacian(const MeasurementMap& map);

}  // namespace relsense
