#include "exo/friction.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "exo/csv.hpp"
#include "exo/random.hpp"

namespace exo {

namespace {
double sgn(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }
}  // namespace

Vector4d friction_torque(const FrictionParams& p, const Vector4d& qdot) {
  Vector4d out;
  for (int j = 0; j < 4; ++j) out(j) = p.c0(j) * sgn(qdot(j)) + p.c1(j) * qdot(j);
  return out;
}

double chirp_torque(double amplitude, double period, double t) {
  if (!(period > 0.0)) throw ContractError("chirp period must be positive");
  if (t < 0.0 || t > period) throw ContractError("chirp time outside [0, T]");
  return amplitude * std::sin(6.0 * std::numbers::pi * t * t / period);
}

Eigen::VectorXd differentiate9(const Eigen::VectorXd& x, double dt) {
  const Eigen::Index n = x.size();
  if (n < 9) throw ContractError("differentiate9 needs at least 9 samples");
  if (!(dt > 0.0)) throw ContractError("sample period must be positive");
  Eigen::VectorXd d(n);
  auto central = [&](Eigen::Index i, int half) {
    switch (half) {
      case 4:
        return (3.0 * (x(i - 4) - x(i + 4)) + 32.0 * (x(i + 3) - x(i - 3)) + 168.0 * (x(i - 2) - x(i + 2)) +
                672.0 * (x(i + 1) - x(i - 1))) / (840.0 * dt);
      case 3:
        return ((x(i + 3) - x(i - 3)) - 9.0 * (x(i + 2) - x(i - 2)) + 45.0 * (x(i + 1) - x(i - 1))) / (60.0 * dt);
      case 2: return (-(x(i + 2) - x(i - 2)) + 8.0 * (x(i + 1) - x(i - 1))) / (12.0 * dt);
      default: return (x(i + 1) - x(i - 1)) / (2.0 * dt);
    }
  };
  d(0) = (-3.0 * x(0) + 4.0 * x(1) - x(2)) / (2.0 * dt);
  d(n - 1) = (3.0 * x(n - 1) - 4.0 * x(n - 2) + x(n - 3)) / (2.0 * dt);
  for (Eigen::Index i = 1; i < n - 1; ++i) {
    const int half = static_cast<int>(std::min<Eigen::Index>({4, i, n - 1 - i}));
    d(i) = central(i, half);
  }
  return d;
}

namespace {

struct Biquad {
  double b0, b1, b2, a1, a2;
};

Biquad butter2(double fc, double fs) {
  const double k = std::tan(std::numbers::pi * fc / fs);
  const double norm = 1.0 / (1.0 + std::numbers::sqrt2 * k + k * k);
  Biquad q;
  q.b0 = k * k * norm;
  q.b1 = 2.0 * q.b0;
  q.b2 = q.b0;
  q.a1 = 2.0 * (k * k - 1.0) * norm;
  q.a2 = (1.0 - std::numbers::sqrt2 * k + k * k) * norm;
  return q;
}

// Transposed direct form II, started in steady state at the first sample.
void run(const Biquad& f, std::vector<double>& x) {
  const double x0 = x.front();
  double z2 = (f.b2 - f.a2) * x0;
  double z1 = (f.b1 - f.a1) * x0 + z2;
  for (double& v : x) {
    const double in = v;
    const double y = f.b0 * in + z1;
    z1 = f.b1 * in - f.a1 * y + z2;
    z2 = f.b2 * in - f.a2 * y;
    v = y;
  }
}

}  // namespace

Eigen::VectorXd lowpass_zero_phase(const Eigen::VectorXd& signal, double fc, double fs) {
  if (!(fs > 0.0) || !(fc > 0.0)) throw ContractError("filter frequencies must be positive");
  if (fc >= 0.5 * fs) throw ContractError("cutoff must be below the Nyquist frequency");
  const Eigen::Index n = signal.size();
  if (n < 2) return signal;
  const Biquad f = butter2(fc, fs);
  // Odd reflection padding over about three filter time constants.
  const Eigen::Index pad = std::min<Eigen::Index>(n - 1, std::max<Eigen::Index>(9, std::lround(3.0 * fs / fc)));
  std::vector<double> x;
  x.reserve(static_cast<std::size_t>(n + 2 * pad));
  for (Eigen::Index i = pad; i >= 1; --i) x.push_back(2.0 * signal(0) - signal(i));
  for (Eigen::Index i = 0; i < n; ++i) x.push_back(signal(i));
  for (Eigen::Index i = 1; i <= pad; ++i) x.push_back(2.0 * signal(n - 1) - signal(n - 1 - i));
  run(f, x);
  std::reverse(x.begin(), x.end());
  run(f, x);
  std::reverse(x.begin(), x.end());
  Eigen::VectorXd out(n);
  for (Eigen::Index i = 0; i < n; ++i) out(i) = x[static_cast<std::size_t>(i + pad)];
  return out;
}

FrictionFit estimate_friction(const ExoModel& model, const IdDataset& data, const IdOptions& opt) {
  const Eigen::Index n = data.t.size();
  if (data.q.rows() != n || data.tau.rows() != n || data.q.cols() != 7 || data.tau.cols() != 4)
    throw ContractError("identification series have inconsistent shapes");
  if (n < 9 + 2 * opt.trim) throw ContractError("identification record too short");
  const double dt = data.t(1) - data.t(0);
  if (!(dt > 0.0)) throw ContractError("identification time must increase");
  for (Eigen::Index i = 1; i < n; ++i)
    if (std::abs((data.t(i) - data.t(i - 1)) - dt) > 1e-6 * dt) throw ContractError("non-uniform sampling");

  Eigen::MatrixXd qd(n, 7), qdd(n, 7);
  for (int c = 0; c < 7; ++c) {
    qd.col(c) = differentiate9(data.q.col(c), dt);
    Eigen::VectorXd acc = differentiate9(qd.col(c), dt);
    if (opt.lowpass) acc = lowpass_zero_phase(acc, opt.cutoff_hz, 1.0 / dt);
    qdd.col(c) = acc;
  }

  const Eigen::Index first = opt.trim;
  const Eigen::Index count = n - 2 * opt.trim;
  Eigen::MatrixXd y(count, 4), v(count, 4);
  for (Eigen::Index k = 0; k < count; ++k) {
    const Eigen::Index i = first + k;
    const GenCoords c = flight_coords(data.q.row(i).transpose(), qd.row(i).transpose());
    const auto d = dynamics_terms(model, c, SupportModel::flight());
    const Eigen::VectorXd eom = d.M * qdd.row(i).transpose() + d.b + d.g;
    for (int j = 0; j < 4; ++j) {
      // M qdd + b + g = tau_motor - friction on the actuated rows.
      y(k, j) = data.tau(i, j) - eom(3 + j);
      v(k, j) = qd(i, 3 + j);
    }
  }

  static const char* names[4] = {"left hip", "left knee", "right hip", "right knee"};
  FrictionFit fit;
  fit.samples = static_cast<int>(count);
  for (int j = 0; j < 4; ++j) {
    Eigen::MatrixXd A(count, 2);
    int pos = 0, neg = 0;
    for (Eigen::Index k = 0; k < count; ++k) {
      const double s = sgn(v(k, j));
      pos += s > 0.0;
      neg += s < 0.0;
      A(k, 0) = s;
      A(k, 1) = v(k, j);
    }
    if (pos == 0 || neg == 0)
      throw ContractError(std::string("friction regressor rank-deficient for ") + names[j] +
                          ": velocity never changes sign");
    const Eigen::Matrix2d N = A.transpose() * A;
    if (!(std::abs(N.determinant()) > 1e-12 * N.squaredNorm()))
      throw ContractError(std::string("friction regressor rank-deficient for ") + names[j]);
    const Eigen::Vector2d c = A.colPivHouseholderQr().solve(y.col(j));
    fit.params.c0(j) = c(0);
    fit.params.c1(j) = c(1);
    const Eigen::VectorXd r = y.col(j) - A * c;
    const double mean = y.col(j).mean();
    const double ss_tot = (y.col(j).array() - mean).square().sum();
    fit.r_squared(j) = ss_tot > 0.0 ? 1.0 - r.squaredNorm() / ss_tot : 1.0;
  }
  return fit;
}

namespace {

// Amplitude of I x'' + c x' + k x = A sin(w t), with the cap folded into the denominator so the
// envelope stays smooth. Returns a, da/dw, d2a/dw2.
struct Envelope {
  double inertia, damping, stiffness, amplitude, cap;

  std::array<double, 3> operator()(double w) const {
    const double e = stiffness - inertia * w * w;
    const double P = e * e + damping * damping * w * w + (amplitude / cap) * (amplitude / cap);
    const double dP = -4.0 * inertia * w * e + 2.0 * damping * damping * w;
    const double d2P = 8.0 * inertia * inertia * w * w - 4.0 * inertia * e + 2.0 * damping * damping;
    const double a = amplitude / std::sqrt(P);
    const double da = -0.5 * a * dP / P;
    const double d2a = a * (0.75 * dP * dP / (P * P) - 0.5 * d2P / P);
    return {a, da, d2a};
  }
};

}  // namespace

IdDataset synthesize_chirp(const ExoModel& model, const ChirpSpec& spec) {
  if (!(spec.period > 0.0) || !(spec.rate_hz > 0.0)) throw ContractError("chirp period and rate must be positive");
  if (!(spec.noise_fraction >= 0.0)) throw ContractError("noise fraction must be nonnegative");
  if (!(spec.amplitude > 0.0) || !(spec.max_swing > 0.0)) throw ContractError("chirp amplitudes must be positive");
  const auto n = static_cast<Eigen::Index>(std::lround(spec.period * spec.rate_hz)) + 1;
  const double dt = 1.0 / spec.rate_hz;
  const double w = 6.0 * std::numbers::pi / spec.period;
  const double base[4] = {0.2, -0.6, 0.2, -0.6};
  const double phase[4] = {0.0, 0.9, 1.9, 2.8};

  // Per-joint inertia and gravity stiffness at the base pose.
  Eigen::Matrix<double, 7, 1> q0 = Eigen::Matrix<double, 7, 1>::Zero();
  for (int j = 0; j < 4; ++j) q0(3 + j) = base[j];
  const Eigen::Matrix<double, 7, 1> zero = Eigen::Matrix<double, 7, 1>::Zero();
  const auto d0 = dynamics_terms(model, flight_coords(q0, zero), SupportModel::flight());
  std::array<Envelope, 4> env;
  for (int j = 0; j < 4; ++j) {
    const double h = 1e-6;
    Eigen::Matrix<double, 7, 1> qp = q0, qm = q0;
    qp(3 + j) += h;
    qm(3 + j) -= h;
    const double gp = dynamics_terms(model, flight_coords(qp, zero), SupportModel::flight()).g(3 + j);
    const double gm = dynamics_terms(model, flight_coords(qm, zero), SupportModel::flight()).g(3 + j);
    env[j] = Envelope{d0.M(3 + j, 3 + j), model.friction.c1(j), std::max(0.0, (gp - gm) / (2.0 * h)),
                      spec.amplitude, spec.max_swing};
  }

  IdDataset d;
  d.t.resize(n);
  d.q = Eigen::MatrixXd::Zero(n, 7);
  d.tau.resize(n, 4);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double t = double(i) * dt;
    const double om = 2.0 * w * t;  // instantaneous angular frequency, d(om)/dt = 2 w
    Eigen::Matrix<double, 7, 1> q = zero, qd = zero, qdd = zero;
    for (int j = 0; j < 4; ++j) {
      const double th = w * t * t + phase[j];
      const double s = std::sin(th), c = std::cos(th);
      const auto [a, da, d2a] = env[j](om);
      const double at = da * 2.0 * w, att = d2a * 4.0 * w * w;
      q(3 + j) = base[j] + a * s;
      qd(3 + j) = at * s + a * c * om;
      qdd(3 + j) = att * s + 2.0 * at * c * om + a * (c * 2.0 * w - s * om * om);
    }
    const auto dyn = dynamics_terms(model, flight_coords(q, qd), SupportModel::flight());
    const Eigen::VectorXd eom = dyn.M * qdd + dyn.b + dyn.g;
    const Vector4d fr = friction_torque(model.friction, qd.tail<4>());
    d.t(i) = t;
    d.q.row(i) = q.transpose();
    for (int j = 0; j < 4; ++j) d.tau(i, j) = eom(3 + j) + fr(j);
  }
  if (spec.noise_fraction > 0.0) {
    Gaussian g(spec.seed);
    for (int j = 0; j < 4; ++j) {
      const double sd = spec.noise_fraction * d.tau.col(j).cwiseAbs().maxCoeff();
      for (Eigen::Index i = 0; i < n; ++i) d.tau(i, j) += sd * g();
    }
  }
  return d;
}

IdDataset read_id_csv(const std::string& path) {
  const csv::Table t = csv::read(path);
  static const char* cols[12] = {"t", "x0", "y0", "theta0", "theta1", "theta2", "theta3", "theta4",
                                 "tau1", "tau2", "tau3", "tau4"};
  int idx[12];
  for (int k = 0; k < 12; ++k) {
    idx[k] = t.column(cols[k]);
    if (idx[k] < 0) throw std::runtime_error(path + ": missing column '" + cols[k] + "'");
  }
  IdDataset d;
  const auto n = static_cast<Eigen::Index>(t.rows.size());
  d.t.resize(n);
  d.q.resize(n, 7);
  d.tau.resize(n, 4);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& r = t.rows[static_cast<std::size_t>(i)];
    d.t(i) = csv::to_double(r[idx[0]]);
    for (int c = 0; c < 7; ++c) d.q(i, c) = csv::to_double(r[idx[1 + c]]);
    for (int c = 0; c < 4; ++c) d.tau(i, c) = csv::to_double(r[idx[8 + c]]);
  }
  return d;
}

void write_id_csv(const std::string& path, const IdDataset& d) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw std::runtime_error("cannot write " + path);
  std::fprintf(f, "# exo-iddata v1; t [s], x0 y0 [m], theta0..theta4 [rad], tau1..tau4 motor [N*m]\n");
  std::fprintf(f, "t,x0,y0,theta0,theta1,theta2,theta3,theta4,tau1,tau2,tau3,tau4\n");
  for (Eigen::Index i = 0; i < d.t.size(); ++i) {
    std::fprintf(f, "%.17g", d.t(i));
    for (int c = 0; c < 7; ++c) std::fprintf(f, ",%.17g", d.q(i, c));
    for (int c = 0; c < 4; ++c) std::fprintf(f, ",%.17g", d.tau(i, c));
    std::fprintf(f, "\n");
  }
  std::fclose(f);
}

}  // namespace exo
