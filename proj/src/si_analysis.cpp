#include "relsense/si_analysis.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace relsense {

namespace {

double norm_angle(double a) {
  while (a > M_PI) a -= 2.0 * M_PI;
  while (a <= -M_PI) a += 2.0 * M_PI;
  return a;
}

}  // namespace

bool on_frequency_grid(const SIStencil& stencil, double xi1, double xi2, double tol) {
  const double k1 = xi1 * stencil.sizes[0] / (2.0 * M_PI);
  const double k2 = xi2 * stencil.sizes[1] / (2.0 * M_PI);
  return std::abs(k1 - std::round(k1)) < tol && std::abs(k2 - std::round(k2)) < tol;
}

double lambda_xi(const SIStencil& stencil, double xi1, double xi2) {
  if (!on_frequency_grid(stencil, xi1, xi2)) {
    throw std::invalid_argument("lambda_xi: frequency not on the lattice grid");
  }
  double acc = 0.0;
  for (const auto& l : stencil.offsets) {
    const double s = std::sin(0.5 * (l[0] * xi1 + l[1] * xi2));
    acc += s * s;
  }
  return 2.0 * acc;
}

double lambda_xi_circulant(const SIStencil& stencil, double xi1, double xi2) {
  return 2.0 * lambda_xi(stencil, xi1, xi2);
}

double lambda_convention_ratio() { return 2.0; }

long noise_floor_count(double c, const SIStencil& stencil, double locality_range) {
  if (c <= 0.0) throw std::invalid_argument("noise_floor_count: c must be > 0");
  const double d = stencil.sensors_per_node();
  const double gamma = stencil.dimension;
  long w = 1;
  for (int j = 0; j < stencil.dimension; ++j) {
    const double arg = c * stencil.sizes[j] / (std::sqrt(2.0 * d) * gamma * locality_range * M_PI);
    w *= 2 * static_cast<long>(std::floor(arg)) + 1;
  }
  return w;
}

PhiBar phi_bar(const SIStencil& stencil, double epsilon, double xi1, double xi2) {
  if (!on_frequency_grid(stencil, xi1, xi2)) {
    throw std::invalid_argument("phi_bar: frequency not on the lattice grid");
  }
  double num = 0.0;  // sum sin^2 / tan = sum sin * cos
  double den = 0.0;
  for (const auto& l : stencil.offsets) {
    const double x = 0.5 * (l[0] * xi1 + l[1] * xi2);
    num += std::sin(x) * std::cos(x);
    den += std::sin(x) * std::sin(x);
  }
  PhiBar out;
  if (den == 0.0) {
    out.undefined = true;
    return out;
  }
  out.value = Complex(0.0, epsilon * num / den);
  return out;
}

ExclusionZone exclusion_arc(const PhiBar& phi) {
  ExclusionZone zone;
  if (phi.undefined) {
    throw std::invalid_argument("exclusion_arc: phi_bar undefined at this frequency");
  }
  zone.theta = 2.0 * std::atan(std::abs(phi.value));
  return zone;
}

ExclusionZone margin_zone(const ExclusionZone& arc, double gain_margin, double phase_margin) {
  if (gain_margin < 1.0) throw std::invalid_argument("margin_zone: gain margin must be >= 1");
  if (phase_margin < 0.0) throw std::invalid_argument("margin_zone: phase margin must be >= 0");
  ExclusionZone zone = arc;
  zone.gain_margin = gain_margin;
  zone.phase_margin = phase_margin;
  return zone;
}

Complex ExclusionZone::arc_point(double beta) const {
  const double t = std::tan(0.5 * theta);
  return -1.0 / Complex(1.0, beta * t);
}

// Zone points in polar form: modulus r cos(u) with r in [1/g_m, 1], argument
// pi - u + alpha with u in [-theta/2, theta/2] and alpha in [-phi_m, phi_m].
// The radius condition is tested on cosine values directly; angle-domain
// comparisons are ill-conditioned near u = 0 because of the acos cliff.
bool ExclusionZone::contains(Complex w) const {
  const double m_w = std::abs(w);
  const double tol = 1e-12 * std::max(1.0, m_w);
  if (m_w == 0.0 || m_w > 1.0 + tol) return false;
  const double u_max = 0.5 * theta;

  const double center = M_PI - std::arg(w);  // target for u - alpha, up to 2 pi
  for (const double shift : {-2.0 * M_PI, 0.0, 2.0 * M_PI}) {
    const double lo = std::max(center - phase_margin + shift, -u_max);
    const double hi = std::min(center + phase_margin + shift, u_max);
    if (lo > hi) continue;
    // cos(u) over [lo, hi] spans [c_min, c_max]; membership needs a u with
    // m_w <= cos(u) <= g_m m_w.
    const double c_max = std::cos(std::clamp(0.0, lo, hi));
    const double c_min = std::min(std::cos(lo), std::cos(hi));
    if (std::max(c_min, m_w) <= std::min(c_max, gain_margin * m_w) + tol) return true;
  }
  return false;
}

bool ExclusionZone::crosses_imaginary_axis() const {
  return 0.5 * theta + phase_margin >= 0.5 * M_PI - 1e-12;
}

namespace {

// Distance from w to the annular sector {m e^{i psi}: m in [r_lo, r_hi],
// psi in [psi_c - half, psi_c + half]}.
double sector_distance(Complex w, double r_lo, double r_hi, double psi_c, double half) {
  const double m_w = std::abs(w);
  const double d_ang = std::abs(norm_angle(std::arg(w) - psi_c));
  if (d_ang <= half) {
    if (m_w < r_lo) return r_lo - m_w;
    if (m_w > r_hi) return m_w - r_hi;
    return 0.0;
  }
  double best = std::numeric_limits<double>::infinity();
  for (const double s : {-1.0, 1.0}) {
    const double psi = psi_c + s * half;
    const Complex dir(std::cos(psi), std::sin(psi));
    // Projection of w onto the boundary ray, clamped to the radial segment.
    const double t = std::clamp(w.real() * dir.real() + w.imag() * dir.imag(), r_lo, r_hi);
    best = std::min(best, std::abs(w - t * dir));
  }
  return best;
}

}  // namespace

double ExclusionZone::distance(Complex w) const {
  if (contains(w)) return 0.0;
  const double u_max = 0.5 * theta;
  const int n_grid = 257;
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n_grid; ++i) {
    const double u = n_grid == 1 ? 0.0 : -u_max + 2.0 * u_max * i / (n_grid - 1);
    const double r_hi = std::cos(u);
    best = std::min(best, sector_distance(w, r_hi / gain_margin, r_hi, M_PI - u, phase_margin));
    if (theta == 0.0) break;
  }
  return best;
}

NyquistClearance nyquist_clearance(const std::vector<Complex>& curve, const ExclusionZone& zone) {
  if (curve.empty()) throw std::invalid_argument("nyquist_clearance: empty curve");

  NyquistClearance out;
  out.min_distance = std::numeric_limits<double>::infinity();
  for (const Complex& w : curve) {
    if (zone.contains(w)) {
      out.violation = true;
      out.min_distance = 0.0;
    }
    if (!out.violation) out.min_distance = std::min(out.min_distance, zone.distance(w));
  }

  // Winding number of the closed curve around the arc midpoint and endpoints.
  for (const double beta : {-1.0, 0.0, 1.0}) {
    const Complex p = zone.arc_point(beta);
    double total = 0.0;
    for (std::size_t i = 0; i < curve.size(); ++i) {
      const Complex a = curve[i] - p;
      const Complex b = curve[(i + 1) % curve.size()] - p;
      total += std::atan2(a.real() * b.imag() - a.imag() * b.real(),
                          a.real() * b.real() + a.imag() * b.imag());
    }
    if (std::lround(total / (2.0 * M_PI)) != 0) out.encirclement = true;
  }
  return out;
}

LtsiEvaluation ltsi_eval(const LtsiController& controller, double xi1, double xi2) {
  const double c1 = std::cos(xi1);
  const double c2 = std::cos(xi2);
  const double c12 = std::cos(xi1 - xi2);
  LtsiEvaluation eval;
  eval.integral_gain = controller.k_alpha + c1 * controller.k_beta + c2 * controller.k_gamma +
                       c12 * controller.k_delta;
  eval.leakage = controller.a_alpha + c1 * controller.a_beta + c2 * controller.a_gamma +
                 c12 * controller.a_delta;
  // Leakage cannot be negative; clamp the per-DOF diagonal.
  for (int i = 0; i < eval.leakage.rows(); ++i) {
    eval.leakage(i, i) = std::max(0.0, eval.leakage(i, i));
  }
  return eval;
}

LtsiFit ltsi_fit(const SIStencil& stencil, const std::vector<Matrix>& target_k,
                 const std::vector<Matrix>& target_a, int dof) {
  const int m1 = stencil.sizes[0];
  const int m2 = stencil.sizes[1];
  const long n_grid = static_cast<long>(m1) * m2;
  if (static_cast<long>(target_k.size()) != n_grid ||
      static_cast<long>(target_a.size()) != n_grid) {
    throw std::invalid_argument("ltsi_fit: targets must cover the full frequency grid");
  }
  const bool two_d = stencil.dimension == 2 && m2 > 1;
  if (m1 < 4 || (two_d && m2 < 4)) {
    throw std::invalid_argument("ltsi_fit: grid smaller than 4 points per axis");
  }
  const int n_basis = two_d ? 4 : 2;

  Matrix design(n_grid, n_basis);
  long g = 0;
  for (int i1 = 0; i1 < m1; ++i1) {
    for (int i2 = 0; i2 < m2; ++i2, ++g) {
      const double xi1 = 2.0 * M_PI * i1 / m1;
      const double xi2 = 2.0 * M_PI * i2 / m2;
      design(g, 0) = 1.0;
      design(g, 1) = std::cos(xi1);
      if (two_d) {
        design(g, 2) = std::cos(xi2);
        design(g, 3) = std::cos(xi1 - xi2);
      }
    }
  }

  Matrix rhs_k(n_grid, dof * dof), rhs_a(n_grid, dof * dof);
  for (long p = 0; p < n_grid; ++p) {
    for (int i = 0; i < dof; ++i) {
      for (int j = 0; j < dof; ++j) {
        rhs_k(p, i * dof + j) = target_k[p](i, j);
        rhs_a(p, i * dof + j) = target_a[p](i, j);
      }
    }
  }

  const Eigen::ColPivHouseholderQR<Matrix> qr(design);
  const Matrix coef_k = qr.solve(rhs_k);
  const Matrix coef_a = qr.solve(rhs_a);

  LtsiFit fit;
  fit.controller.dof = dof;
  auto unpack = [&](const Matrix& coef, int row) {
    Matrix block = Matrix::Zero(dof, dof);
    if (row < coef.rows()) {
      for (int i = 0; i < dof; ++i) {
        for (int j = 0; j < dof; ++j) block(i, j) = coef(row, i * dof + j);
      }
    }
    return block;
  };
  fit.controller.k_alpha = unpack(coef_k, 0);
  fit.controller.k_beta = unpack(coef_k, 1);
  fit.controller.k_gamma = unpack(coef_k, 2);
  fit.controller.k_delta = unpack(coef_k, 3);
  fit.controller.a_alpha = unpack(coef_a, 0);
  fit.controller.a_beta = unpack(coef_a, 1);
  fit.controller.a_gamma = unpack(coef_a, 2);
  fit.controller.a_delta = unpack(coef_a, 3);

  const double denom = std::sqrt(static_cast<double>(n_grid * dof * dof));
  fit.residual_integral = (design * coef_k - rhs_k).norm() / denom;
  fit.residual_leakage = (design * coef_a - rhs_a).norm() / denom;

  // Residual with the nonnegativity clamp applied to the evaluated series.
  double clamped = 0.0;
  g = 0;
  for (int i1 = 0; i1 < m1; ++i1) {
    for (int i2 = 0; i2 < m2; ++i2, ++g) {
      const LtsiEvaluation eval =
          ltsi_eval(fit.controller, 2.0 * M_PI * i1 / m1, 2.0 * M_PI * i2 / m2);
      clamped += (eval.leakage - target_a[g]).squaredNorm();
    }
  }
  fit.residual_leakage_clamped = std::sqrt(clamped) / denom;
  return fit;
}

LtsiVerification ltsi_verify(const LtsiController& controller, const SIStencil& stencil,
                             double epsilon, double p0, double gain_margin, double phase_margin,
                             const Vector& omega_grid) {
  if (controller.dof != 1) {
    throw std::invalid_argument("ltsi_verify: only scalar (dof = 1) loops are supported");
  }
  LtsiVerification report;
  report.max_pole = -std::numeric_limits<double>::infinity();

  const int m1 = stencil.sizes[0];
  const int m2 = stencil.sizes[1];
  for (int i1 = 0; i1 < m1; ++i1) {
    for (int i2 = 0; i2 < m2; ++i2) {
      if (i1 == 0 && i2 == 0) continue;  // unobservable zero mode
      const double xi1 = 2.0 * M_PI * i1 / m1;
      const double xi2 = 2.0 * M_PI * i2 / m2;
      const double lam = lambda_xi_circulant(stencil, xi1, xi2);
      if (lam == 0.0) continue;
      const LtsiEvaluation eval = ltsi_eval(controller, xi1, xi2);
      const double gain = eval.integral_gain(0, 0);
      const double leak = eval.leakage(0, 0);

      const double pole = -(leak + std::sqrt(lam) * gain);
      report.max_pole = std::max(report.max_pole, pole);
      if (pole > -p0 + 1e-12) report.stable = false;

      const PhiBar phi = phi_bar(stencil, epsilon, xi1, xi2);
      if (phi.undefined) continue;
      const ExclusionZone zone = margin_zone(exclusion_arc(phi), gain_margin, phase_margin);
      std::vector<Complex> curve(omega_grid.size());
      for (int w = 0; w < omega_grid.size(); ++w) {
        const Complex s(0.0, omega_grid(w));
        Complex k = std::sqrt(lam) * gain / (s + leak);
        if (std::isfinite(controller.rolloff_pole)) {
          const Complex f = s / controller.rolloff_pole + 1.0;
          k /= f * f;
        }
        curve[w] = k;
      }
      if (nyquist_clearance(curve, zone).violation) ++report.zone_violations;
    }
  }
  return report;
}

Matrix local_estimator(const SegmentGeometry& geometry, int segment) {
  if (segment < 0 || segment >= static_cast<int>(geometry.segments.size())) {
    throw std::invalid_argument("local_estimator: segment index out of range");
  }
  std::vector<Eigen::Vector3d> rows;
  for (const SegmentGeometry::Sensor& s : geometry.sensors) {
    if (s.positive_segment == segment) {
      rows.push_back(s.weights_positive);
    } else if (s.negative_segment == segment) {
      rows.push_back(-s.weights_negative);
    }
  }
  if (rows.size() < 3) {
    throw std::runtime_error("local_estimator: segment has fewer than 3 sensors");
  }
  Matrix local(rows.size(), 3);
  for (std::size_t i = 0; i < rows.size(); ++i) local.row(i) = rows[i].transpose();

  const auto cod = local.completeOrthogonalDecomposition();
  if (cod.rank() < 3) {
    throw std::runtime_error("local_estimator: local sensor matrix is rank deficient");
  }
  return cod.pseudoInverse();
}

DcSensitivity si_dc_sensitivity(const Matrix& dc_loop_gain) {
  const int d = static_cast<int>(dc_loop_gain.rows());
  DcSensitivity out;
  const Matrix m = Matrix::Identity(d, d) + dc_loop_gain;
  const Eigen::FullPivLU<Matrix> lu(m);
  if (!lu.isInvertible()) {
    out.infinite_rejection = true;
    out.S = Matrix::Zero(d, d);
    return out;
  }
  out.S = lu.inverse();
  out.norm = out.S.jacobiSvd().singularValues()(0);
  return out;
}

DcSensitivity si_dc_sensitivity(double sqrt_lambda, double integral_gain, double leakage) {
  DcSensitivity out;
  if (leakage == 0.0) {
    out.infinite_rejection = true;
    out.S = Matrix::Zero(1, 1);
    return out;
  }
  Matrix k(1, 1);
  k(0, 0) = sqrt_lambda * integral_gain / leakage;
  return si_dc_sensitivity(k);
}

}  // namespace relsense
