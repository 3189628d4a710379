#include "exo/sim.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "exo/friction.hpp"
#include "exo/random.hpp"

namespace exo {

const char* to_string(ControllerKind k) {
  switch (k) {
    case ControllerKind::Wecc: return "wecc";
    case ControllerKind::Simplified: return "simplified";
    case ControllerKind::NoDrive: return "nodrive";
  }
  return "?";
}

const char* to_string(DesiredMode m) { return m == DesiredMode::Haptic ? "haptic" : "transparency"; }

ControllerKind controller_from_string(const std::string& s) {
  if (s == "wecc") return ControllerKind::Wecc;
  if (s == "simplified") return ControllerKind::Simplified;
  if (s == "nodrive") return ControllerKind::NoDrive;
  throw ContractError("unknown controller '" + s + "' (expected wecc, simplified or nodrive)");
}

DesiredMode desired_mode_from_string(const std::string& s) {
  if (s == "transparency") return DesiredMode::Transparency;
  if (s == "haptic") return DesiredMode::Haptic;
  throw ContractError("unknown desired mode '" + s + "' (expected transparency or haptic)");
}

double FourierSeries::value(double w, double t) const {
  double v = mean;
  for (std::size_t k = 0; k < a.size(); ++k) v += a[k] * std::cos(double(k + 1) * w * t);
  for (std::size_t k = 0; k < b.size(); ++k) v += b[k] * std::sin(double(k + 1) * w * t);
  return v;
}

double FourierSeries::rate(double w, double t) const {
  double v = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) v -= a[k] * double(k + 1) * w * std::sin(double(k + 1) * w * t);
  for (std::size_t k = 0; k < b.size(); ++k) v += b[k] * double(k + 1) * w * std::cos(double(k + 1) * w * t);
  return v;
}

ReferenceGait ReferenceGait::defaults() {
  ReferenceGait g;
  g.period = 3.0;
  g.backpack = {-0.05, {0.0, 0.02}, {}};
  // Hip flexed at heel strike; knee flexion peaks at 70 % of the stride.
  g.hip = {0.1, {0.3}, {}};
  g.knee = {-0.45, {0.108}, {0.333}};
  return g;
}

Vector5d ReferenceGait::position(double t) const {
  const double w = 2.0 * std::numbers::pi / period;
  const double tr = t - 0.5 * period;
  Vector5d q;
  q << backpack.value(w, t), hip.value(w, t), knee.value(w, t), hip.value(w, tr), knee.value(w, tr);
  return q;
}

Vector5d ReferenceGait::velocity(double t) const {
  const double w = 2.0 * std::numbers::pi / period;
  const double tr = t - 0.5 * period;
  Vector5d v;
  v << backpack.rate(w, t), hip.rate(w, t), knee.rate(w, t), hip.rate(w, tr), knee.rate(w, tr);
  return v;
}

HumanModel HumanModel::defaults() {
  HumanModel h;
  h.K << 600.0, 200.0, 200.0, 200.0, 200.0;
  h.C << 150.0, 30.0, 15.0, 30.0, 15.0;
  h.gait = ReferenceGait::defaults();
  return h;
}

void HumanModel::validate() const {
  if (!K.allFinite() || !C.allFinite() || (K.array() < 0.0).any() || (C.array() < 0.0).any())
    throw ContractError("human impedance must be finite and nonnegative");
  if (!(gait.period > 0.0)) throw ContractError("reference gait period must be positive");
}

Vector5d human_torque(const HumanModel& h, const GenCoords& c, double t) {
  if (c.param != Parameterization::Stance5) throw ContractError("human torque needs Stance5 coordinates");
  const Vector5d e = h.gait.position(t) - c.q;
  const Vector5d ed = h.gait.velocity(t) - c.qdot;
  return h.K.cwiseProduct(e) + h.C.cwiseProduct(ed);
}

ScheduledPhase GaitSchedule::at(double t) const {
  const double T = stride();
  const double s = t - T * std::floor(t / T);
  const double d = ds_fraction * step_period;
  double a = 0.0;
  if (s < d) a = 0.5 * (1.0 - std::cos(std::numbers::pi * s / d));
  else if (s < step_period) a = 1.0;
  else if (s < step_period + d) a = 0.5 * (1.0 + std::cos(std::numbers::pi * (s - step_period) / d));
  ScheduledPhase p;
  p.alpha = a;
  p.gamma = gamma;
  p.state = a >= 1.0 ? GaitState::LeftStance : (a <= 0.0 ? GaitState::RightStance : GaitState::DoubleStance);
  return p;
}

Grf GaitSchedule::grf(double t) const {
  const ScheduledPhase p = at(t);
  const double total = total_weight + human_share;
  Grf g;
  g.left = Vector2d(p.gamma * p.alpha * total, p.alpha * total);
  g.right = Vector2d(-g.left(0), (1.0 - p.alpha) * total);
  return g;
}

void GaitSchedule::validate() const {
  if (!(step_period > 0.0)) throw ContractError("step period must be positive");
  if (!(ds_fraction > 0.0 && ds_fraction < 0.5)) throw ContractError("double stance fraction must be in (0, 0.5)");
  if (!std::isfinite(gamma)) throw ContractError("non-finite gamma");
  if (!(human_share >= 0.0) || !(total_weight >= 0.0)) throw ContractError("vertical loads must be nonnegative");
}

SupportModel scheduled_support(const ScheduledPhase& p) {
  if (p.state == GaitState::LeftStance) return SupportModel::left_stance();
  if (p.state == GaitState::RightStance) return SupportModel::right_stance();
  return SupportModel::double_stance(p.alpha);
}

Vector5d forward_dynamics(const ExoModel& plant, const GenCoords& c, const Vector4d& tau_joint,
                          const Vector5d& tau_int, const SupportModel& sup) {
  const DynamicsTerms d = support_dynamics(plant, c, sup);
  const Vector5d rhs = selection_transpose() * tau_joint + tau_int - d.b - d.g;
  return Matrix5d(d.M).ldlt().solve(rhs);
}

namespace {

struct Deriv {
  Vector5d qd, qdd;
};

}  // namespace

PlantStep plant_step(const ExoModel& plant, const PlantState& s, const Vector4d& tau_motor,
                     const InteractionFn& tau_int, const GaitSchedule& schedule, double dt) {
  if (!(dt > 0.0)) throw ContractError("plant step must be positive");
  PlantStep out;
  auto eval = [&](const Vector5d& q, const Vector5d& qd, double t, bool record) {
    const GenCoords c = stance_coords(q, qd, t);
    const ScheduledPhase ph = schedule.at(t);
    const Vector4d tj = tau_motor - friction_torque(plant.friction, qd.tail<4>());
    const Vector5d ti = tau_int(c, t);
    const Vector5d qdd = forward_dynamics(plant, c, tj, ti, scheduled_support(ph));
    if (!qdd.allFinite()) throw std::runtime_error("simulation diverged at t = " + std::to_string(t) + " s");
    if (record) {
      out.phase = ph;
      out.grf = schedule.grf(t);
      out.qdd = qdd;
      out.tau_int = ti;
      out.tau_joint = tj;
    }
    return Deriv{qd, qdd};
  };
  const double h = dt;
  const Deriv k1 = eval(s.q, s.qdot, s.t, true);
  const Deriv k2 = eval(s.q + 0.5 * h * k1.qd, s.qdot + 0.5 * h * k1.qdd, s.t + 0.5 * h, false);
  const Deriv k3 = eval(s.q + 0.5 * h * k2.qd, s.qdot + 0.5 * h * k2.qdd, s.t + 0.5 * h, false);
  const Deriv k4 = eval(s.q + h * k3.qd, s.qdot + h * k3.qdd, s.t + h, false);
  out.next.q = s.q + (h / 6.0) * (k1.qd + 2.0 * k2.qd + 2.0 * k3.qd + k4.qd);
  out.next.qdot = s.qdot + (h / 6.0) * (k1.qdd + 2.0 * k2.qdd + 2.0 * k3.qdd + k4.qdd);
  out.next.t = s.t + h;
  if (!out.next.q.allFinite() || !out.next.qdot.allFinite())
    throw std::runtime_error("simulation diverged at t = " + std::to_string(s.t) + " s");
  return out;
}

ScenarioConfig ScenarioConfig::defaults() {
  ScenarioConfig c;
  c.model = default_model();
  c.human = HumanModel::defaults();
  c.haptic = HapticParams::defaults();
  c.virtual_mass = VirtualMass::defaults();
  c.sensor.cutoff_hz = 4.0;
  return c;
}

int ScenarioConfig::control_ratio() const {
  const double r = limits.dt / plant_dt;
  const long n = std::lround(r);
  if (n < 1 || std::abs(r - double(n)) > 1e-9) throw ContractError("control period must be a multiple of the plant step");
  return static_cast<int>(n);
}

void ScenarioConfig::validate() const {
  exo::validate(model);
  if (!(duration > 0.0) || !std::isfinite(duration)) throw ContractError("duration must be positive");
  if (!(plant_dt > 0.0)) throw ContractError("plant step must be positive");
  if (!(mass_mismatch > -1.0) || !std::isfinite(mass_mismatch)) throw ContractError("mass mismatch must exceed -1");
  if (!(friction_mismatch >= -1.0) || !std::isfinite(friction_mismatch))
    throw ContractError("friction mismatch must be at least -1");
  if (!(nodrive_friction_scale >= 0.0)) throw ContractError("no-drive friction scale must be nonnegative");
  if (!(sensor.cutoff_hz >= 0.0) || !(sensor.noise_std >= 0.0)) throw ContractError("sensor parameters must be nonnegative");
  schedule.validate();
  human.validate();
  haptic.validate();
  virtual_mass.validate();
  limits.validate();
  control_ratio();
  if (std::abs(human.gait.period - schedule.stride()) > 1e-9)
    throw ContractError("reference gait period must equal the schedule stride (two steps)");
}

ExoModel plant_model(const ScenarioConfig& cfg) {
  ExoModel m = cfg.model;
  for (auto& l : m.links) {
    l.mass *= 1.0 + cfg.mass_mismatch;
    l.com_inertia *= 1.0 + cfg.mass_mismatch;
  }
  m.friction.c0 *= 1.0 + cfg.friction_mismatch;
  m.friction.c1 *= 1.0 + cfg.friction_mismatch;
  if (cfg.controller == ControllerKind::NoDrive) m = no_drive_model(m, cfg.nodrive_friction_scale);
  return m;
}

SimLog run_scenario(const ScenarioConfig& cfg_in) {
  cfg_in.validate();
  ScenarioConfig cfg = cfg_in;
  const ExoModel plant = plant_model(cfg);
  if (cfg.schedule.total_weight == 0.0) cfg.schedule.total_weight = plant.total_weight();
  const int ratio = cfg.control_ratio();
  const double dt = cfg.plant_dt;
  const auto steps = static_cast<long>(std::lround(cfg.duration / dt));
  const bool driven = cfg.controller != ControllerKind::NoDrive;

  SimLog log;
  log.scenario = cfg.name;
  log.controller = cfg.controller;
  log.desired = cfg.desired;
  log.seed = cfg.seed;
  log.plant_dt = dt;
  log.control_dt = cfg.limits.dt;
  log.exo_mass = plant.total_mass();
  log.samples.reserve(static_cast<std::size_t>(steps));

  const HumanModel& human = cfg.human;
  const InteractionFn interaction = [&human](const GenCoords& c, double t) { return human_torque(human, c, t); };

  PlantState st;
  st.q = human.gait.position(0.0);
  st.qdot = human.gait.velocity(0.0);
  st.t = 0.0;

  const ScheduledPhase p0 = cfg.schedule.at(0.0);
  GaitContext g0;
  g0.state = p0.state;
  g0.alpha = p0.alpha;
  WeccContext wctx;
  wctx.gait = g0;
  wctx.solver = QpSolver(cfg.qp);
  SimplifiedContext sctx;
  sctx.gait = g0;
  GaitContext shadow = g0;
  HapticFilter hfilter;
  Gaussian noise(cfg.seed);

  const double fa = cfg.sensor.cutoff_hz > 0.0 ? std::exp(-2.0 * std::numbers::pi * cfg.sensor.cutoff_hz * dt) : 0.0;
  Vector4d sensor = Vector4d::Zero();
  bool sensor_primed = false;
  auto sense = [&](const Vector4d& tau_joint, const Vector5d& qdd) {
    Vector4d raw = tau_joint;
    if (cfg.sensor.link_side) raw -= plant.rotor_inertia * qdd.tail<4>();
    if (cfg.sensor.noise_std > 0.0)
      for (int j = 0; j < 4; ++j) raw(j) += cfg.sensor.noise_std * noise();
    if (!sensor_primed) {
      sensor = raw;
      sensor_primed = true;
    } else {
      sensor = fa * sensor + (1.0 - fa) * raw;
    }
  };

  Vector4d tau_motor = Vector4d::Zero();
  Vector5d tau_est = Vector5d::Zero();
  Vector5d tau_des = Vector5d::Zero();
  int qp_status = -1;
  int qp_iter = 0;
  bool fallback = false;
  GaitState ctrl_state = g0.state;
  PlantStep prev;
  bool have_prev = false;

  for (long k = 0; k < steps; ++k) {
    const double t = double(k) * dt;
    st.t = t;
    const Grf grf = cfg.schedule.grf(t);
    shadow = update(shadow, grf, default_force_limit(grf), t);

    // The sensor sees the previous plant step (one sample of latency).
    if (have_prev) {
      sense(prev.tau_joint, prev.qdd);
    } else {
      const GenCoords c = stance_coords(st.q, st.qdot, t);
      const Vector4d tj = tau_motor - friction_torque(plant.friction, st.qdot.tail<4>());
      sense(tj, forward_dynamics(plant, c, tj, interaction(c, t), scheduled_support(cfg.schedule.at(t))));
    }

    if (driven && k % ratio == 0) {
      const GenCoords c = stance_coords(st.q, st.qdot, t);
      if (cfg.desired == DesiredMode::Haptic) {
        const GaitState gs = cfg.controller == ControllerKind::Wecc ? wctx.gait.state : sctx.gait.state;
        const LegPhase pl = loaded(gs, Side::Left) ? LegPhase::Stance : LegPhase::Swing;
        const LegPhase pr = loaded(gs, Side::Right) ? LegPhase::Stance : LegPhase::Swing;
        tau_des = haptic_reference(c, cfg.haptic, pl, pr, hfilter, cfg.limits.dt);
      }
      if (cfg.controller == ControllerKind::Wecc) {
        const WeccOutput o = wecc_step(cfg.model, c, grf, sensor, tau_des, cfg.limits, cfg.virtual_mass, wctx, t);
        tau_motor = o.tau_motor;
        tau_est = o.diag.tau_int_est;
        qp_status = static_cast<int>(o.diag.status);
        qp_iter = o.diag.iterations;
        fallback = o.diag.fallback;
        ctrl_state = o.diag.state;
      } else {
        const SimplifiedOutput o = simplified_step(cfg.model, c, grf, sensor, tau_des, cfg.virtual_mass, sctx, t);
        tau_motor = o.tau_motor;
        tau_est = o.tau_int_est;
        ctrl_state = o.state;
      }
    }

    const PlantStep ps = plant_step(plant, st, tau_motor, interaction, cfg.schedule, dt);
    SimSample s;
    s.t = t;
    s.state = ps.phase.state;
    s.ctrl_state = driven ? ctrl_state : ps.phase.state;
    s.shadow_state = shadow.state;
    s.alpha = ps.phase.alpha;
    s.gamma = ps.phase.gamma;
    s.q = st.q;
    s.qdot = st.qdot;
    s.qdd = ps.qdd;
    s.tau_motor = tau_motor;
    s.tau_joint = ps.tau_joint;
    s.tau_sensor = sensor;
    s.tau_int = ps.tau_int;
    s.tau_est = tau_est;
    s.tau_des = tau_des;
    s.grf = ps.grf;
    s.qp_status = qp_status;
    s.qp_iterations = qp_iter;
    s.fallback = fallback;
    log.samples.push_back(s);

    prev = ps;
    have_prev = true;
    st = ps.next;
  }
  return log;
}

}  // namespace exo
