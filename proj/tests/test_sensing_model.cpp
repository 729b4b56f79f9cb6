#include "relsense/sensing_model.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <set>

using namespace relsense;

namespace {

// Independent spectrum oracle: eigenvalues of a dense symmetric matrix,
// ascending.
Vector symmetric_eigenvalues(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m);
  return es.eigenvalues();
}

}  // namespace

TEST_SUITE_BEGIN("sensing_model");

TEST_CASE("chain layout matches the path interconnection") {
  const SensingModel chain = build_chain(3);
  const Matrix b = Matrix(chain.map.B);
  Matrix expected(2, 3);
  expected << -1, 1, 0, 0, -1, 1;
  CHECK((b - expected).cwiseAbs().maxCoeff() == 0.0);
  CHECK(chain.map.block_size == 1);
  CHECK(chain.structure.dimension == 1);
  for (int k = 0; k < 3; ++k) CHECK(chain.structure.positions[k](0) == double(k));
}

TEST_CASE("smallest chain") {
  const SensingModel chain = build_chain(2);
  const Matrix b = Matrix(chain.map.B);
  CHECK(b(0, 0) == -1.0);
  CHECK(b(0, 1) == 1.0);
  CHECK_THROWS_AS(build_chain(1), std::invalid_argument);
}

TEST_CASE("chain Laplacian eigenvalues follow the path closed form") {
  // Oracle: lambda_k = 2 - 2 cos(k pi / M), frozen from the closed form.
  for (const int m : {3, 10, 25}) {
    const SensingModel chain = build_chain(m);
    const Vector eigs = symmetric_eigenvalues(Matrix(laplacian(chain.map)));
    std::vector<double> expected;
    for (int k = 0; k < m; ++k) expected.push_back(2.0 - 2.0 * std::cos(k * M_PI / m));
    std::sort(expected.begin(), expected.end());
    for (int k = 0; k < m; ++k) CHECK(eigs(k) == doctest::Approx(expected[k]).epsilon(1e-9));
  }
}

TEST_CASE("chain M=3 eigenvalues are 0, 1, 3") {
  const Vector eigs = symmetric_eigenvalues(Matrix(laplacian(build_chain(3).map)));
  CHECK(eigs(0) == doctest::Approx(0.0).scale(1).epsilon(1e-12));
  CHECK(eigs(1) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(eigs(2) == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("ring spectrum matches the circulant closed form") {
  const SensingModel ring = build_ring(4);
  const Vector eigs = symmetric_eigenvalues(Matrix(laplacian(ring.map)));
  // 2 - 2 cos(2 pi k / 4) -> {0, 2, 2, 4}
  CHECK(eigs(0) == doctest::Approx(0.0).scale(1).epsilon(1e-12));
  CHECK(eigs(1) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(eigs(2) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(eigs(3) == doctest::Approx(4.0).epsilon(1e-12));

  SUBCASE("ring diagonal entries are all 2") {
    const Matrix l = Matrix(laplacian(ring.map));
    for (int i = 0; i < 4; ++i) CHECK(l(i, i) == doctest::Approx(2.0));
  }
}

TEST_CASE("large ring has exactly one zero eigenvalue") {
  const Vector eigs = symmetric_eigenvalues(Matrix(laplacian(build_ring(100).map)));
  int zeros = 0;
  for (int k = 0; k < eigs.size(); ++k) {
    if (std::abs(eigs(k)) < 1e-9 * eigs(eigs.size() - 1)) ++zeros;
  }
  CHECK(zeros == 1);
}

TEST_CASE("relative-sensing nullspace: B 1 = 0") {
  for (const auto& model : {build_chain(7), build_ring(3)}) {
    const Vector residual = model.map.B * Vector::Ones(model.map.outputs());
    CHECK(residual.cwiseAbs().maxCoeff() == 0.0);
  }
  CHECK_THROWS_AS(build_ring(2), std::invalid_argument);
}

TEST_CASE("hex mirror segment counts") {
  CHECK(build_hex_mirror(5, 0, 0.7, 0.25).map.subsystem_count == 61);
  CHECK(build_hex_mirror(2, 0, 0.7, 0.25).map.subsystem_count == 7);
  CHECK(build_hex_mirror(1, 0, 0.7, 0.25).map.subsystem_count == 1);
  CHECK(build_hex_mirror(4, 1, 0.7, 0.25).map.subsystem_count == 36);
  CHECK_THROWS_AS(build_hex_mirror(3, 3, 0.7, 0.25), std::invalid_argument);
  CHECK_THROWS_AS(build_hex_mirror(3, 0, 0.7, 0.6), std::invalid_argument);
}

TEST_CASE("hex flower has 12 shared edges and 24 sensors") {
  const HexMirrorModel mirror = build_hex_mirror(2, 0, 0.7, 0.25);
  CHECK(mirror.map.sensors() == 24);
  CHECK(mirror.map.outputs() == 21);
  CHECK(mirror.geometry.sensors.size() == 24);
}

TEST_CASE("hex sensors sit on the perpendicular bisector of adjacent centers") {
  const HexMirrorModel mirror = build_hex_mirror(3, 0, 0.7, 0.3);
  for (const auto& s : mirror.geometry.sensors) {
    const auto& cj = mirror.geometry.segments[s.positive_segment].center;
    const auto& ck = mirror.geometry.segments[s.negative_segment].center;
    CHECK((s.point - cj).norm() == doctest::Approx((s.point - ck).norm()).epsilon(1e-12));
  }
}

TEST_CASE("hex barycentric weights are convex") {
  // Including sensors close to the segment corners and a non-default scale.
  for (const HexMirrorModel& mirror :
       {build_hex_mirror(3, 0, 0.7, 0.25), build_hex_mirror(3, 0, 1.3, 0.49),
        build_hex_mirror(4, 2, 0.7, 0.05)}) {
    for (const auto& s : mirror.geometry.sensors) {
      for (int i = 0; i < 3; ++i) {
        CHECK(s.weights_positive(i) >= 0.0);
        CHECK(s.weights_negative(i) >= 0.0);
      }
      CHECK(s.weights_positive.sum() == doctest::Approx(1.0).epsilon(1e-13));
      CHECK(s.weights_negative.sum() == doctest::Approx(1.0).epsilon(1e-13));
    }
    CHECK(validate_relative(mirror.map).pass);
  }
}

TEST_CASE("builders pass validate_relative and validate_local") {
  SUBCASE("chain") {
    const SensingModel chain = build_chain(10);
    CHECK(validate_relative(chain.map).pass);
    CHECK(validate_local(chain.map, chain.structure, 1.5).pass);
  }
  SUBCASE("ring") {
    const SensingModel ring = build_ring(9);
    CHECK(validate_relative(ring.map).pass);
    CHECK(validate_local(ring.map, ring.structure, 1.1).pass);
  }
  SUBCASE("hex") {
    const HexMirrorModel mirror = build_hex_mirror(3, 0, 0.7, 0.25);
    const RelativeReport rel = validate_relative(mirror.map);
    CHECK(rel.pass);
    // Only adjacent hexagons share edges, so 1.3 pitches is enough range.
    CHECK(validate_local(mirror.map, mirror.structure, 1.3).pass);
  }
}

TEST_CASE("validate_relative flags a scaled row with its violation size") {
  SensingModel chain = build_chain(3);
  Matrix b = Matrix(chain.map.B);
  b.row(0) *= 1.01;
  chain.map.B = b.sparseView();
  const RelativeReport report = validate_relative(chain.map);
  CHECK_FALSE(report.pass);
  CHECK(report.worst_violation == doctest::Approx(0.01).epsilon(1e-9));
}

TEST_CASE("validate_local flags a long-range sensor") {
  SensingModel chain = build_chain(6);
  // Splice in an extra sensor comparing subsystems 1 and 5.
  Matrix b = Matrix::Zero(chain.map.sensors() + 1, chain.map.outputs());
  b.topRows(chain.map.sensors()) = Matrix(chain.map.B);
  b(chain.map.sensors(), 0) = -1.0;
  b(chain.map.sensors(), 4) = 1.0;
  chain.map.B = b.sparseView();
  chain.map.edges.push_back({chain.map.sensors() - 1, 4, 0});

  const LocalityReport report = validate_local(chain.map, chain.structure, 1.5);
  CHECK_FALSE(report.pass);
  CHECK(report.violating_sensors == std::vector<int>{chain.map.sensors() - 1});
  CHECK(report.worst_distance == doctest::Approx(4.0));
}

TEST_CASE("laplacian of the 3-chain") {
  const Matrix l = Matrix(laplacian(build_chain(3).map));
  Matrix expected(3, 3);
  expected << 1, -1, 0, -1, 2, -1, 0, -1, 1;
  CHECK((l - expected).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("laplacian is positive semidefinite with L 1 = 0") {
  const HexMirrorModel mirror = build_hex_mirror(3, 1, 0.7, 0.25);
  const Matrix l = Matrix(laplacian(mirror.map));
  CHECK((l - l.transpose()).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(symmetric_eigenvalues(l)(0) > -1e-12);
  const Vector ones_residual = l * Vector::Ones(l.cols());
  CHECK(ones_residual.cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("hex mirror nullspace is exactly piston, two tilts and defocus") {
  const HexMirrorModel mirror = build_hex_mirror(5, 0, 0.7, 0.25);
  const int n_y = mirror.map.outputs();
  const int m = mirror.map.subsystem_count;

  // Construct the four configurations explicitly from the geometry: heights
  // of the h-points under a global piston, two global tilt planes, and the
  // paraboloid tangent-plane (defocus) configuration.
  Matrix witnesses = Matrix::Zero(n_y, 4);
  for (int s = 0; s < m; ++s) {
    const auto& seg = mirror.geometry.segments[s];
    for (int i = 0; i < 3; ++i) {
      const Eigen::Vector2d h = seg.h_points[i];
      witnesses(3 * s + i, 0) = 1.0;       // piston
      witnesses(3 * s + i, 1) = h.x();     // tilt about y
      witnesses(3 * s + i, 2) = h.y();     // tilt about x
      // Tangent plane of z = |x|^2 at the segment center, evaluated at h.
      witnesses(3 * s + i, 3) = 2.0 * seg.center.dot(h) - seg.center.squaredNorm();
    }
  }

  const Matrix b = Matrix(mirror.map.B);
  const double sigma1 = std::sqrt(symmetric_eigenvalues(b.transpose() * b).maxCoeff());
  for (int w = 0; w < 4; ++w) {
    const double residual = (b * witnesses.col(w)).norm();
    CHECK(residual < 1e-9 * witnesses.col(w).norm() * sigma1);
  }

  // The four witnesses are independent and there is no fifth null direction.
  Eigen::JacobiSVD<Matrix> wsvd(witnesses);
  CHECK(wsvd.singularValues()(3) > 1e-9 * wsvd.singularValues()(0));
  const Vector lambda = symmetric_eigenvalues(b.transpose() * b);
  int zeros = 0;
  for (int k = 0; k < lambda.size(); ++k) {
    if (lambda(k) < 1e-9 * lambda(lambda.size() - 1)) ++zeros;
  }
  CHECK(zeros == 4);
}

TEST_SUITE_END();
