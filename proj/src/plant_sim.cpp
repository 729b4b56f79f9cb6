#include "relsense/plant_sim.hpp"

#include "relsense/kernels.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace relsense {

PlantModel PlantModel::statics() {
  PlantModel p;
  p.kind = Kind::Static;
  return p;
}

PlantModel PlantModel::vehicle(double mass, double drag) {
  PlantModel p;
  p.kind = Kind::Vehicle;
  p.mass = mass;
  p.drag = drag;
  return p;
}

PlantModel PlantModel::mirror_segment(int dof, double resonance_hz, double damping_ratio) {
  PlantModel p;
  p.kind = Kind::SecondOrder;
  p.inertia = Matrix::Identity(dof, dof);
  const double omega = 2.0 * M_PI * resonance_hz;
  p.actuator_stiffness = omega * omega;  // with unit inertia
  p.actuator_damping = 2.0 * damping_ratio * omega;
  p.input_gain = p.actuator_stiffness;  // DC gain 1
  return p;
}

ScalarPlant PlantModel::scalar() const {
  ScalarPlant s;
  switch (kind) {
    case Kind::Static:
      s.kind = ScalarPlant::Kind::Static;
      s.gain = input_gain / actuator_stiffness;
      break;
    case Kind::SecondOrder: {
      if (inertia.size() == 0 || !inertia.isDiagonal(1e-14) ||
          (inertia.diagonal().array() != inertia(0, 0)).any()) {
        throw std::runtime_error(
            "scalar plant approximation needs an inertia proportional to the identity");
      }
      s.kind = ScalarPlant::Kind::SecondOrder;
      s.inertia = inertia(0, 0);
      s.damping = actuator_damping;
      s.stiffness = actuator_stiffness;
      s.gain = input_gain;
      break;
    }
    case Kind::Vehicle:
      s.kind = ScalarPlant::Kind::Vehicle;
      s.inertia = mass;
      s.damping = drag;
      break;
  }
  return s;
}

namespace {

Matrix dense_measurement(const MeasurementMap& map, const SparseMatrix& delta) {
  Matrix b = Matrix(map.B);
  if (delta.size() != 0) {
    if (delta.rows() != map.B.rows() || delta.cols() != map.B.cols()) {
      throw std::invalid_argument("sensing error has a different shape than B");
    }
    b += Matrix(delta);
  }
  return b;
}

}  // namespace

ClosedLoopSystem assemble_closed_loop(const PlantModel& plant, const ModalController& controller,
                                      const ModalDecomposition& decomp, const MeasurementMap& map,
                                      const SparseMatrix& delta) {
  const int n_y = map.outputs();
  const int n_z = map.sensors();
  const int n = map.block_size;
  if (controller.modes() != n_y || decomp.outputs() != n_y) {
    throw std::invalid_argument("assemble_closed_loop: dimension mismatch");
  }

  std::vector<int> active;
  for (int k = 0; k < std::min(n_y, controller.modes()); ++k) {
    if (controller.integral_gain(k) != 0.0) active.push_back(k);
  }
  const int na = static_cast<int>(active.size());
  const bool rolloff = controller.has_rolloff() && na > 0;

  const int n_p = plant.states_per_output() * n_y;
  const int n_r = rolloff ? 2 * na : 0;
  const int n_states = n_p + n_r + na;
  const int off_r1 = n_p;
  const int off_r2 = n_p + na;
  const int off_i = n_p + n_r;

  const Matrix b_eff = dense_measurement(map, delta);

  Matrix q_act(n_y, na), u_act(n_z, na);
  Vector gain_act(na), leak_act(na);
  for (int i = 0; i < na; ++i) {
    q_act.col(i) = decomp.Q.col(active[i]);
    u_act.col(i) = decomp.U.col(active[i]);
    gain_act(i) = controller.integral_gain(active[i]);
    leak_act(i) = controller.leakage(active[i]);
  }

  // u = -Q_a diag(K_I) x_I
  Matrix u_from_xi = na > 0 ? Matrix(-q_act * gain_act.asDiagonal()) : Matrix::Zero(n_y, 0);

  // y as a linear function of the state and of d.
  Matrix y_x = Matrix::Zero(n_y, n_states);
  Matrix y_d = Matrix::Zero(n_y, n_y);
  if (plant.kind == PlantModel::Kind::Static) {
    const double g = plant.input_gain / plant.actuator_stiffness;
    if (na > 0) y_x.middleCols(off_i, na) = g * u_from_xi;
    y_d = g * Matrix::Identity(n_y, n_y);
  } else {
    y_x.leftCols(n_y) = Matrix::Identity(n_y, n_y);
  }

  // Sensor and modal measurement paths.
  const Matrix z_x = b_eff * y_x;
  const Matrix z_d = b_eff * y_d;
  Matrix v_x, v_d, v_n;
  if (na > 0) {
    v_x = u_act.transpose() * z_x;
    v_d = u_act.transpose() * z_d;
    v_n = u_act.transpose();
  }

  ClosedLoopSystem sys;
  sys.n_outputs = n_y;
  sys.n_sensors = n_z;
  sys.A = Matrix::Zero(n_states, n_states);
  sys.B_d = Matrix::Zero(n_states, n_y);
  sys.B_n = Matrix::Zero(n_states, n_z);

  // Plant block.
  if (plant.kind == PlantModel::Kind::SecondOrder) {
    if (plant.inertia.rows() != n || plant.inertia.cols() != n) {
      throw std::invalid_argument("assemble_closed_loop: inertia block does not match DOF count");
    }
    const Matrix j_inv = plant.inertia.inverse();
    Matrix jinv_full = Matrix::Zero(n_y, n_y);
    for (int s = 0; s < map.subsystem_count; ++s) {
      jinv_full.block(s * n, s * n, n, n) = j_inv;
    }
    sys.A.block(0, n_y, n_y, n_y).setIdentity();
    sys.A.block(n_y, 0, n_y, n_y) = -plant.actuator_stiffness * jinv_full;
    sys.A.block(n_y, n_y, n_y, n_y) = -plant.actuator_damping * jinv_full;
    const Matrix b_force = plant.input_gain * jinv_full;
    if (na > 0) sys.A.block(n_y, off_i, n_y, na) = b_force * u_from_xi;
    sys.B_d.middleRows(n_y, n_y) = b_force;
  } else if (plant.kind == PlantModel::Kind::Vehicle) {
    sys.A.block(0, n_y, n_y, n_y).setIdentity();
    sys.A.block(n_y, n_y, n_y, n_y) = -(plant.drag / plant.mass) * Matrix::Identity(n_y, n_y);
    if (na > 0) sys.A.block(n_y, off_i, n_y, na) = (1.0 / plant.mass) * u_from_xi;
    sys.B_d.middleRows(n_y, n_y) = (1.0 / plant.mass) * Matrix::Identity(n_y, n_y);
  }

  if (na > 0) {
    if (rolloff) {
      const double p = controller.rolloff_pole;
      sys.A.block(off_r1, 0, na, n_states) = p * v_x;
      sys.A.block(off_r1, off_r1, na, na) -= p * Matrix::Identity(na, na);
      sys.B_d.middleRows(off_r1, na) = p * v_d;
      sys.B_n.middleRows(off_r1, na) = p * v_n;
      sys.A.block(off_r2, off_r1, na, na) = p * Matrix::Identity(na, na);
      sys.A.block(off_r2, off_r2, na, na) = -p * Matrix::Identity(na, na);
      // Integrator driven by the filtered measurement.
      sys.A.block(off_i, off_r2, na, na) = Matrix::Identity(na, na);
      sys.A.block(off_i, off_i, na, na) -= leak_act.asDiagonal();
    } else {
      sys.A.block(off_i, 0, na, n_states) += v_x;
      sys.A.block(off_i, off_i, na, na) -= leak_act.asDiagonal();
      sys.B_d.middleRows(off_i, na) = v_d;
      sys.B_n.middleRows(off_i, na) = v_n;
    }
  }

  sys.C_y = y_x;
  sys.D_yd = y_d;
  sys.C_u = Matrix::Zero(n_y, n_states);
  if (na > 0) sys.C_u.middleCols(off_i, na) = u_from_xi;
  sys.C_z = z_x;
  sys.D_zd = z_d;
  sys.D_zn = Matrix::Identity(n_z, n_z);
  return sys;
}

WindField wind_field(const SpatialStructure& structure, double correlation_length,
                     double cutoff_hz, double rms, double dt, long n_steps, std::uint64_t seed) {
  if (correlation_length <= 0.0) {
    throw std::invalid_argument("wind_field: correlation length must be > 0");
  }
  const int m = structure.subsystem_count();

  Matrix kernel(m, m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      kernel(i, j) = std::exp(-(structure.positions[i] - structure.positions[j]).norm() /
                              correlation_length);
    }
  }

  WindField field;
  Eigen::LLT<Matrix> llt(kernel);
  if (llt.info() != Eigen::Success) {
    kernel += 1e-10 * Matrix::Identity(m, m);
    field.regularized = true;
    llt.compute(kernel);
    if (llt.info() != Eigen::Success) {
      throw std::runtime_error("wind_field: correlation kernel is not positive semidefinite");
    }
  }

  const Matrix spatial = kernels::correlated_noise_parallel(Matrix(llt.matrixL()), n_steps, seed);

  // First-order low pass, scaled to the requested stationary RMS.
  const double a = std::exp(-2.0 * M_PI * cutoff_hz * dt);
  const double scale = rms * std::sqrt((1.0 + a) / (1.0 - a));
  field.series.resize(n_steps, m);
  Vector state = Vector::Zero(m);
  for (long t = 0; t < n_steps; ++t) {
    state = a * state + (1.0 - a) * spatial.col(t);
    field.series.row(t) = scale * state.transpose();
  }
  return field;
}

SimulationTrace simulate(const ClosedLoopSystem& system, const SpatialStructure& structure,
                         const DisturbanceModel& disturbance, const SimulateOptions& options) {
  const int n_states = static_cast<int>(system.A.rows());
  const int n_y = system.n_outputs;
  const int n_z = system.n_sensors;
  const long n_steps = static_cast<long>(std::llround(options.horizon / options.dt));
  if (n_steps < 1) throw std::invalid_argument("simulate: horizon shorter than one step");

  if (n_states > 0) {
    Eigen::EigenSolver<Matrix> es(system.A, /*computeEigenvectors=*/false);
    const double fastest = es.eigenvalues().cwiseAbs().maxCoeff();
    if (options.dt * fastest >= 0.1) {
      throw std::invalid_argument("simulate: dt too large for the fastest closed-loop pole");
    }
  }

  // Exact zero-order-hold discretization via the augmented matrix exponential.
  const int n_in = n_y + n_z;
  Matrix aug = Matrix::Zero(n_states + n_in, n_states + n_in);
  aug.topLeftCorner(n_states, n_states) = system.A;
  aug.block(0, n_states, n_states, n_y) = system.B_d;
  aug.block(0, n_states + n_y, n_states, n_z) = system.B_n;
  const Matrix aug_exp = (aug * options.dt).exp();
  const Matrix ad = aug_exp.topLeftCorner(n_states, n_states);
  const Matrix bd_d = aug_exp.block(0, n_states, n_states, n_y);
  const Matrix bd_n = aug_exp.block(0, n_states + n_y, n_states, n_z);

  // Disturbance: quasi-static offsets plus wind force on the first DOF of
  // each subsystem.
  const int m = structure.subsystem_count();
  const int dof = m > 0 ? n_y / m : 1;
  Vector static_offset = Vector::Zero(n_y);
  if (disturbance.enable_static && disturbance.static_amplitude > 0.0) {
    std::mt19937_64 engine(mix_seed(options.seed, 0x5747u));
    std::normal_distribution<double> gauss(0.0, disturbance.static_amplitude);
    for (int i = 0; i < n_y; ++i) static_offset(i) = gauss(engine);
  }
  Matrix wind;  // n_steps x M
  if (disturbance.enable_wind && disturbance.wind_rms > 0.0) {
    wind = wind_field(structure, disturbance.wind_correlation_length, disturbance.wind_cutoff_hz,
                      disturbance.wind_rms, options.dt, n_steps, mix_seed(options.seed, 0x71d0u))
               .series;
  }

  std::mt19937_64 noise_engine(mix_seed(options.seed, 0x4015eu));
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double noise_std =
      options.sensor_noise_per_sqrt_hz > 0.0
          ? options.sensor_noise_per_sqrt_hz / std::sqrt(options.dt)
          : 0.0;

  SimulationTrace trace;
  trace.dt = options.dt;
  trace.horizon = options.horizon;
  trace.seed = options.seed;
  trace.y.resize(n_steps, n_y);
  if (options.record_u) trace.u.resize(n_steps, n_y);
  if (options.record_z) trace.z.resize(n_steps, n_z);
  for (int i = 0; i < n_y; ++i) trace.channels.push_back("y" + std::to_string(i));
  if (options.record_u)
    for (int i = 0; i < n_y; ++i) trace.channels.push_back("u" + std::to_string(i));
  if (options.record_z)
    for (int i = 0; i < n_z; ++i) trace.channels.push_back("z" + std::to_string(i));

  Vector x = Vector::Zero(n_states);
  Vector d(n_y), noise(n_z);
  double ref_scale = 0.0;
  const long ref_window = std::min<long>(100, n_steps);

  for (long t = 0; t < n_steps; ++t) {
    d = static_offset;
    if (wind.size() != 0) {
      for (int s = 0; s < m; ++s) d(s * dof) += wind(t, s);
    }
    if (noise_std > 0.0) {
      for (int i = 0; i < n_z; ++i) noise(i) = noise_std * gauss(noise_engine);
    } else {
      noise.setZero(n_z);
    }

    trace.y.row(t) = (system.C_y * x + system.D_yd * d).transpose();
    if (options.record_u) trace.u.row(t) = (system.C_u * x).transpose();
    if (options.record_z) {
      trace.z.row(t) = (system.C_z * x + system.D_zd * d + system.D_zn * noise).transpose();
    }

    x = ad * x + bd_d * d + bd_n * noise;
    x = x.cwiseMax(-1e300).cwiseMin(1e300);  // keep overflow out of the arithmetic

    const double norm = x.norm();
    if (t < ref_window) {
      ref_scale = std::max(ref_scale, norm);
    } else if (norm > 1e6 * std::max(ref_scale, 1e-300)) {
      trace.diverged = true;
    }
    if (!x.allFinite()) {
      trace.diverged = true;
      x = x.unaryExpr([](double v) { return std::isfinite(v) ? v : 0.0; });
    }
  }
  return trace;
}

PsdEstimate psd(const Vector& signal, double dt, long segment_length, double overlap) {
  if (segment_length < 8) throw std::invalid_argument("psd: segment too short");
  if (segment_length > signal.size()) {
    throw std::invalid_argument("psd: segment longer than the trace");
  }
  if (overlap < 0.0 || overlap >= 1.0) throw std::invalid_argument("psd: overlap must be in [0,1)");

  const long hop = std::max<long>(1, std::lround(segment_length * (1.0 - overlap)));
  std::vector<long> starts;
  for (long s = 0; s + segment_length <= signal.size(); s += hop) starts.push_back(s);

  Vector window(segment_length);
  for (long i = 0; i < segment_length; ++i) {
    window(i) = 0.5 * (1.0 - std::cos(2.0 * M_PI * i / segment_length));
  }
  const double u = window.squaredNorm();
  const double fs = 1.0 / dt;

  const Vector acc = kernels::welch_accumulate_parallel(signal, window, starts);
  const long n_freq = segment_length / 2 + 1;

  PsdEstimate est;
  est.averages = static_cast<int>(starts.size());
  est.frequency.resize(n_freq);
  est.power.resize(n_freq);
  for (long k = 0; k < n_freq; ++k) {
    est.frequency(k) = k * fs / segment_length;
    double p = acc(k) / (static_cast<double>(starts.size()) * fs * u);
    if (k != 0 && !(segment_length % 2 == 0 && k == n_freq - 1)) p *= 2.0;  // one-sided
    est.power(k) = p;
  }
  return est;
}

RejectionRatio rejection_ratio(const SimulationTrace& closed, const SimulationTrace& open,
                               int mode, const ModalDecomposition& decomp, long segment_length,
                               double overlap, double floor_rel) {
  if (closed.seed != open.seed || closed.dt != open.dt || closed.steps() != open.steps()) {
    throw std::invalid_argument(
        "rejection_ratio: traces must share the disturbance seed and time grid");
  }
  if (mode < 1 || mode > decomp.outputs()) {
    throw std::invalid_argument("rejection_ratio: mode index out of range");
  }
  const Vector q = decomp.Q.col(mode - 1);
  const Vector closed_modal = closed.y * q;
  const Vector open_modal = open.y * q;

  const PsdEstimate pc = psd(closed_modal, closed.dt, segment_length, overlap);
  const PsdEstimate po = psd(open_modal, open.dt, segment_length, overlap);

  RejectionRatio out;
  out.frequency = pc.frequency;
  out.ratio.resize(pc.power.size());
  out.floor_flag.resize(pc.power.size());
  const double floor = floor_rel * po.power.maxCoeff();
  for (int k = 0; k < pc.power.size(); ++k) {
    out.floor_flag[k] = po.power(k) < floor;
    out.ratio(k) = out.floor_flag[k] ? std::numeric_limits<double>::quiet_NaN()
                                     : pc.power(k) / po.power(k);
  }
  return out;
}

double rms_metric(const Matrix& data, const std::vector<int>& columns, double dt,
                  double burn_in) {
  const long first = std::min<long>(data.rows(), static_cast<long>(std::ceil(burn_in / dt)));
  const long rows = data.rows() - first;
  if (rows <= 0 || columns.empty()) return 0.0;
  double acc = 0.0;
  for (int c : columns) acc += data.col(c).tail(rows).squaredNorm();
  return std::sqrt(acc / (static_cast<double>(rows) * columns.size()));
}

}  // namespace relsense
