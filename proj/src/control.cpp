#include "exo/control.hpp"

#include <cmath>
#include <numbers>

#include "exo/friction.hpp"

namespace exo {

VirtualMass VirtualMass::defaults() {
  VirtualMass v;
  v.single_stance << 2.0, 0.7, 0.5, 0.7, 0.5;
  v.double_stance << 3.5, 1.2, 0.87, 1.2, 0.87;
  return v;
}

const Vector5d& VirtualMass::select(GaitState s) const {
  switch (s) {
    case GaitState::LeftStance:
    case GaitState::RightStance: return single_stance;
    case GaitState::DoubleStance: return double_stance;
    case GaitState::Flight: break;
  }
  throw ContractError("no virtual mass set for flight");
}

void VirtualMass::validate() const {
  if (!(single_stance.array() > 0.0).all() || !(double_stance.array() > 0.0).all() ||
      !single_stance.allFinite() || !double_stance.allFinite())
    throw ContractError("virtual masses must be positive");
}

Vector5d virtual_mass_accel(const Vector5d& tau_int, const Vector5d& tau_int_des, const VirtualMass& m_virt,
                            GaitState state) {
  const Vector5d& m = m_virt.select(state);
  if (!(m.array() > 0.0).all()) throw ContractError("virtual masses must be positive");
  return (tau_int - tau_int_des).cwiseQuotient(m);
}

HapticParams HapticParams::defaults() {
  const double deg = std::numbers::pi / 180.0;
  HapticParams p;
  p.k_stance << 0.0, 50.0, 30.0, 50.0, 30.0;
  p.c_stance << 0.0, 10.0, 6.0, 10.0, 6.0;
  p.k_swing << 0.0, 30.0, 25.0, 30.0, 25.0;
  p.c_swing << 0.0, 6.0, 5.0, 6.0, 5.0;
  p.q_star << 0.0, 25.0 * deg, -45.0 * deg, 25.0 * deg, -45.0 * deg;
  p.cutoff_hz = 5.0;
  return p;
}

void HapticParams::validate() const {
  for (const Vector5d* v : {&k_stance, &c_stance, &k_swing, &c_swing}) {
    if (!v->allFinite() || (v->array() < 0.0).any()) throw ContractError("haptic gains must be nonnegative");
    if ((*v)(0) != 0.0) throw ContractError("haptic gains on the backpack must be zero");
  }
  if (!q_star.allFinite()) throw ContractError("non-finite haptic neutral angles");
  if (!(cutoff_hz > 0.0)) throw ContractError("haptic filter cutoff must be positive");
}

Vector5d haptic_raw(const GenCoords& c, const HapticParams& p, LegPhase left, LegPhase right) {
  if (c.param != Parameterization::Stance5 || c.q.size() != 5 || c.qdot.size() != 5)
    throw ContractError("haptic reference needs Stance5 coordinates");
  Vector5d tau = Vector5d::Zero();
  for (int i = 1; i < 5; ++i) {
    const bool stance = (i < 3 ? left : right) == LegPhase::Stance;
    const double k = stance ? p.k_stance(i) : p.k_swing(i);
    const double d = stance ? p.c_stance(i) : p.c_swing(i);
    tau(i) = k * (c.q(i) - p.q_star(i)) + d * c.qdot(i);
  }
  return tau;
}

Vector5d haptic_reference(const GenCoords& c, const HapticParams& p, LegPhase left, LegPhase right,
                          HapticFilter& f, double dt) {
  if (!(dt > 0.0)) throw ContractError("filter step must be positive");
  const Vector5d x = haptic_raw(c, p, left, right);
  if (!f.primed) {
    f.y = x;
    f.primed = true;
    return f.y;
  }
  const double a = std::exp(-2.0 * std::numbers::pi * p.cutoff_hz * dt);
  f.y = a * f.y + (1.0 - a) * x;
  return f.y;
}

void Limits::validate() const {
  if (!(tau_max > 0.0 && p_max > 0.0 && qdot_max > 0.0 && dt > 0.0 && eps_vel > 0.0))
    throw ContractError("controller limits must be positive");
}

QpProblem assemble_wecc_qp(const ExoModel& model, const GenCoords& coords, const GaitContext& gait,
                           const Vector5d& tau_int, const Vector5d& qdd_star, const Limits& lim) {
  lim.validate();
  SupportModel sup;
  switch (gait.state) {
    case GaitState::LeftStance: sup = SupportModel::left_stance(); break;
    case GaitState::RightStance: sup = SupportModel::right_stance(); break;
    case GaitState::DoubleStance: sup = SupportModel::double_stance(gait.alpha); break;
    case GaitState::Flight: throw ContractError("WECC is undefined in flight");
  }
  const DynamicsTerms d = support_dynamics(model, coords, sup);
  const Vector4d qd = coords.qdot.tail<4>();
  const Vector4d tau_friction = -friction_torque(model.friction, qd);
  const Eigen::Matrix<double, 5, 4> St = selection_transpose();

  QpProblem p;
  p.C = Eigen::MatrixXd::Zero(5, 9);
  p.C.leftCols(5).setIdentity();
  p.d = qdd_star;
  p.A_eq.resize(5, 9);
  p.A_eq.leftCols(5) = d.M;
  p.A_eq.rightCols(4) = -St;
  p.b_eq = -d.b - d.g + tau_int + St * tau_friction;

  p.D = Eigen::MatrixXd::Zero(kWeccInequalities, 9);
  p.f.resize(kWeccInequalities);
  for (int j = 0; j < 4; ++j) {
    const double speed = std::max(std::abs(qd(j)), lim.eps_vel);
    const double p_bound = lim.p_max / speed;
    // torque
    p.D(j, 5 + j) = 1.0;
    p.f(j) = lim.tau_max;
    p.D(4 + j, 5 + j) = -1.0;
    p.f(4 + j) = lim.tau_max;
    // power
    p.D(8 + j, 5 + j) = 1.0;
    p.f(8 + j) = p_bound;
    p.D(12 + j, 5 + j) = -1.0;
    p.f(12 + j) = p_bound;
    // next-step velocity
    p.D(16 + j, 1 + j) = 1.0;
    p.f(16 + j) = (lim.qdot_max - qd(j)) / lim.dt;
    p.D(20 + j, 1 + j) = -1.0;
    p.f(20 + j) = (lim.qdot_max + qd(j)) / lim.dt;
  }
  return p;
}

WeccOutput wecc_step(const ExoModel& model, const GenCoords& coords, const Grf& grf, const Vector4d& tau_joint,
                     const Vector5d& tau_int_des, const Limits& limits, const VirtualMass& m_virt, WeccContext& ctx,
                     double now) {
  ctx.gait = update(ctx.gait, grf, default_force_limit(grf, ctx.force_limit_fraction), now);
  WeccOutput out;
  WeccDiagnostics& dg = out.diag;
  dg.state = ctx.gait.state;
  dg.alpha = ctx.gait.alpha;
  dg.gamma = ctx.gait.gamma;
  dg.gamma_fallback = ctx.gait.gamma_fallback;

  switch (ctx.gait.state) {
    case GaitState::Flight: throw ContractError("WECC is undefined in flight");
    case GaitState::LeftStance:
    case GaitState::RightStance: {
      const Side s = ctx.gait.state == GaitState::LeftStance ? Side::Left : Side::Right;
      dg.tau_int_est = estimate_single_stance(model, coords, tau_joint, s).values;
      break;
    }
    case GaitState::DoubleStance: {
      const double a = ctx.gait.alpha;
      if (a >= 1.0) {
        dg.tau_int_est = estimate_single_stance(model, coords, tau_joint, Side::Left).values;
      } else if (a <= 0.0) {
        dg.tau_int_est = estimate_single_stance(model, coords, tau_joint, Side::Right).values;
      } else {
        const DsSolution ds = estimate_double_stance(model, coords, tau_joint, a, ctx.gait.gamma);
        dg.tau_int_est = ds.tau_int;
        dg.negative_load = ds.negative_load;
      }
      break;
    }
  }

  dg.qdd_star = virtual_mass_accel(dg.tau_int_est, tau_int_des, m_virt, ctx.gait.state);
  const QpProblem qp = assemble_wecc_qp(model, coords, ctx.gait, dg.tau_int_est, dg.qdd_star, limits);
  const QpSolution sol = ctx.solver.solve(qp, ctx.has_warm ? &ctx.warm : nullptr);
  ctx.warm = ctx.solver.last_iterate();
  ctx.has_warm = true;
  dg.status = sol.status;
  dg.iterations = sol.iterations;
  dg.kkt = sol.kkt;

  if (sol.status == QpStatus::Optimal) {
    dg.qdd = sol.x.head<5>();
    out.tau_motor = sol.x.tail<4>();
    ctx.last_command = out.tau_motor;
    ctx.failures = 0;
  } else {
    dg.fallback = true;
    ++ctx.failures;
    if (ctx.failures >= 3) ctx.last_command.setZero();
    out.tau_motor = ctx.last_command;
  }
  return out;
}

LegCommand simplified_leg_step(const ExoModel& model, const GenCoords& leg, const Vector2d& tau_joint,
                               const Vector2d& tau_int_des, const Vector2d& m_virt, double w) {
  if (!tau_int_des.allFinite()) throw ContractError("non-finite desired interaction torque");
  if (!(m_virt.array() > 0.0).all()) throw ContractError("virtual masses must be positive");
  const DynamicsTerms d = simplified_terms(model, leg, w);
  LegCommand c;
  // The leg estimator takes strain-gauge readings, the negative of the joint torque.
  c.tau_int_est = estimate_simplified(model, leg, Vector2d(-tau_joint), w).values;
  c.qdd_star = (c.tau_int_est - tau_int_des).cwiseQuotient(m_virt);
  Vector4d qd = Vector4d::Zero();
  const int h = hip_index(leg.leg) - 1;
  qd.segment<2>(h) = leg.qdot;
  const Vector2d fr = friction_torque(model.friction, qd).segment<2>(h);
  c.tau_motor = d.M * c.qdd_star + d.b + d.g - c.tau_int_est + fr;
  return c;
}

SimplifiedOutput simplified_step(const ExoModel& model, const GenCoords& coords, const Grf& grf,
                                 const Vector4d& tau_joint, const Vector5d& tau_int_des, const VirtualMass& m_virt,
                                 SimplifiedContext& ctx, double now) {
  ctx.gait = update(ctx.gait, grf, default_force_limit(grf, ctx.force_limit_fraction), now);
  SimplifiedOutput out;
  out.state = ctx.gait.state;
  double w_left = 0.0;
  switch (ctx.gait.state) {
    case GaitState::LeftStance: w_left = 1.0; break;
    case GaitState::RightStance: w_left = 0.0; break;
    case GaitState::DoubleStance: w_left = ctx.gait.alpha; break;
    case GaitState::Flight: break;
  }
  const bool flight = ctx.gait.state == GaitState::Flight;
  const Vector5d& mv = m_virt.select(flight ? GaitState::LeftStance : ctx.gait.state);
  for (Side s : {Side::Left, Side::Right}) {
    const int h = hip_index(s);
    const double w = flight ? 0.0 : (s == Side::Left ? w_left : 1.0 - w_left);
    const LegCommand c = simplified_leg_step(model, leg_slice(coords, s), tau_joint.segment<2>(h - 1),
                                             tau_int_des.segment<2>(h), mv.segment<2>(h), w);
    out.tau_motor.segment<2>(h - 1) = c.tau_motor;
    out.tau_int_est.segment<2>(h) = c.tau_int_est;
    out.qdd_star.segment<2>(h) = c.qdd_star;
  }
  return out;
}

}  // namespace exo
