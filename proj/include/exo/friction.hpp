#pragma once

#include <cstdint>
#include <string>

#include "exo/model.hpp"

namespace exo {

/// c0 * sign(qdot) + c1 * qdot per joint, sign(0) = 0. This is the torque lost to
/// friction; the torque friction applies to the joint is its negative.
Vector4d friction_torque(const FrictionParams& p, const Vector4d& qdot);

/// A * sin(6 pi t^2 / T), defined on [0, T].
double chirp_torque(double amplitude, double period, double t);

/// Eighth-order central difference; near the ends the stencil shrinks to 6th, 4th and
/// 2nd order central differences, and the end samples use 2nd-order one-sided formulas.
Eigen::VectorXd differentiate9(const Eigen::VectorXd& signal, double dt);

/// Second-order Butterworth low-pass run forward and backward (zero phase, unit DC gain).
Eigen::VectorXd lowpass_zero_phase(const Eigen::VectorXd& signal, double fc, double fs);

/// Hanging-exoskeleton identification record. q columns follow Flight7 ordering
/// [x0, y0, theta0..theta4]; tau columns are motor torques [L-hip, L-knee, R-hip, R-knee].
struct IdDataset {
  Eigen::VectorXd t;
  Eigen::MatrixXd q;    // N x 7
  Eigen::MatrixXd tau;  // N x 4
};

struct IdOptions {
  bool lowpass = true;       // filter the differentiated acceleration
  double cutoff_hz = 10.0;
  int trim = 8;              // samples dropped at each end
};

struct FrictionFit {
  FrictionParams params;
  Vector4d r_squared = Vector4d::Zero();
  int samples = 0;
};

/// Per-joint least squares of the flight equation-of-motion residual on [sign(qdot), qdot].
FrictionFit estimate_friction(const ExoModel& model, const IdDataset& data, const IdOptions& opt = {});

/// Hanging-exoskeleton record with the base fixed. Each joint follows
/// q0 + a(w) sin(6 pi t^2 / T + phase) with w = 12 pi t / T, where a(w) is the amplitude of the
/// linearized joint answering a torque sine of the given amplitude, softly capped at max_swing.
/// The motor torques are the exact inverse dynamics plus friction. Optional Gaussian torque noise
/// with standard deviation noise_fraction * max|tau| per joint.
struct ChirpSpec {
  double amplitude = 10.0;   // N*m
  double period = 60.0;      // s
  double rate_hz = 1000.0;
  double max_swing = 0.5;    // rad
  double noise_fraction = 0.0;
  std::uint64_t seed = 1;
};

IdDataset synthesize_chirp(const ExoModel& model, const ChirpSpec& spec);

IdDataset read_id_csv(const std::string& path);
void write_id_csv(const std::string& path, const IdDataset& data);

}  // namespace exo
