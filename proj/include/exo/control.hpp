#pragma once

#include "exo/estimation.hpp"
#include "exo/gait.hpp"
#include "exo/qp.hpp"

namespace exo {

/// Diagonal admittance inertias per generalized coordinate (kg*m^2).
struct VirtualMass {
  Vector5d single_stance;
  Vector5d double_stance;

  static VirtualMass defaults();
  const Vector5d& select(GaitState s) const;
  void validate() const;
};

/// qdd* = M_virt^-1 (tau_int - tau_int_des), with the set chosen by the gait state.
Vector5d virtual_mass_accel(const Vector5d& tau_int, const Vector5d& tau_int_des, const VirtualMass& m_virt,
                            GaitState state);

/// Spring-damper gains per coordinate; entry 0 (backpack) must stay zero.
struct HapticParams {
  Vector5d k_stance = Vector5d::Zero();
  Vector5d c_stance = Vector5d::Zero();
  Vector5d k_swing = Vector5d::Zero();
  Vector5d c_swing = Vector5d::Zero();
  Vector5d q_star = Vector5d::Zero();
  double cutoff_hz = 5.0;

  static HapticParams defaults();
  void validate() const;
};

/// First-order causal low-pass state.
struct HapticFilter {
  Vector5d y = Vector5d::Zero();
  bool primed = false;
};

/// K (q - q*) + C qdot per joint with stance or swing gains, backpack row zero.
Vector5d haptic_raw(const GenCoords& coords, const HapticParams& p, LegPhase left, LegPhase right);

/// Filtered haptic reference; the first call primes the filter with its input.
Vector5d haptic_reference(const GenCoords& coords, const HapticParams& p, LegPhase left, LegPhase right,
                          HapticFilter& filter, double dt);

struct Limits {
  double tau_max = 80.0;   // N*m
  double p_max = 100.0;    // W
  double qdot_max = 3.0;   // rad/s
  double dt = 0.003;       // s
  double eps_vel = 1e-3;   // rad/s, floor of |qdot| in the power bound

  void validate() const;
};

/// Number of inequality rows: torque, power and velocity bounds, upper then lower, four joints each.
inline constexpr int kWeccInequalities = 24;

/// QP over x = [qdd (5); tau_motor (4)] for the gait state's dynamics.
QpProblem assemble_wecc_qp(const ExoModel& model, const GenCoords& coords, const GaitContext& gait,
                           const Vector5d& tau_int, const Vector5d& qdd_star, const Limits& limits);

struct WeccContext {
  GaitContext gait;
  QpSolver solver;
  bool has_warm = false;
  QpWarmStart warm;
  Vector4d last_command = Vector4d::Zero();
  int failures = 0;
  double force_limit_fraction = kForceLimitFraction;
};

struct WeccDiagnostics {
  GaitState state = GaitState::DoubleStance;
  double alpha = 0.0;
  double gamma = 0.0;
  bool gamma_fallback = false;
  bool negative_load = false;
  Vector5d tau_int_est = Vector5d::Zero();
  Vector5d qdd_star = Vector5d::Zero();
  Vector5d qdd = Vector5d::Zero();
  QpStatus status = QpStatus::Optimal;
  int iterations = 0;
  KktResiduals kkt;
  bool fallback = false;
};

struct WeccOutput {
  Vector4d tau_motor = Vector4d::Zero();  // motor command, friction compensation included
  WeccDiagnostics diag;
};

/// Gait update, interaction estimate, virtual mass, QP. On a non-optimal QP the previous command
/// is held; after three consecutive failures the command is zero. Throws in flight.
WeccOutput wecc_step(const ExoModel& model, const GenCoords& coords, const Grf& grf, const Vector4d& tau_joint,
                     const Vector5d& tau_int_des, const Limits& limits, const VirtualMass& m_virt, WeccContext& ctx,
                     double now);

/// One leg of the simplified controller: tau_motor = M qdd* + b + g - tau_int + friction.
struct LegCommand {
  Vector2d tau_motor = Vector2d::Zero();
  Vector2d tau_int_est = Vector2d::Zero();
  Vector2d qdd_star = Vector2d::Zero();
};

LegCommand simplified_leg_step(const ExoModel& model, const GenCoords& leg_coords, const Vector2d& tau_joint,
                               const Vector2d& tau_int_des, const Vector2d& m_virt, double stance_weight);

struct SimplifiedContext {
  GaitContext gait;
  double force_limit_fraction = kForceLimitFraction;
};

struct SimplifiedOutput {
  Vector4d tau_motor = Vector4d::Zero();
  Vector5d tau_int_est = Vector5d::Zero();  // backpack row unused
  Vector5d qdd_star = Vector5d::Zero();
  GaitState state = GaitState::DoubleStance;
};

/// Both legs, with per-leg stance weights from the gait state (alpha-blended in double stance).
SimplifiedOutput simplified_step(const ExoModel& model, const GenCoords& coords, const Grf& grf,
                                 const Vector4d& tau_joint, const Vector5d& tau_int_des, const VirtualMass& m_virt,
                                 SimplifiedContext& ctx, double now);

}  // namespace exo
