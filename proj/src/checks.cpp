#include "exo/checks.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "exo/estimation.hpp"
#include "exo/qp.hpp"
#include "exo/sim.hpp"

namespace exo {

GenCoords random_stance_coords(UniformSource& u, double rate_scale) {
  Vector5d q, qd;
  q << u(-0.3, 0.3), u(-0.6, 0.9), u(-1.2, -0.05), u(-0.6, 0.9), u(-1.2, -0.05);
  for (int i = 0; i < 5; ++i) qd(i) = u(-rate_scale, rate_scale);
  return stance_coords(q, qd);
}

namespace {

CheckResult make(const std::string& name, double worst, double tol, const std::string& detail = {}) {
  CheckResult r;
  r.name = name;
  r.value = worst;
  r.tolerance = tol;
  r.pass = std::isfinite(worst) && worst <= tol;
  r.detail = detail;
  return r;
}

double inf(const Eigen::VectorXd& v) { return v.lpNorm<Eigen::Infinity>(); }

// Both feet on the ground: right ankle velocity and acceleration vanish in the left stance frame.
CheckResult ds_projection(const ExoModel& m, UniformSource& u, int n) {
  double worst = 0.0;
  for (int k = 0; k < n; ++k) {
    GenCoords c = random_stance_coords(u);
    const Eigen::Matrix<double, 5, 3> H = constraint_matrix(m, c, Side::Right);
    c.qdot = H * Eigen::Vector3d(u(-2, 2), u(-2, 2), u(-2, 2));
    const auto ak = ankle_kinematics(m, c, Side::Right, SupportModel::left_stance());
    const Eigen::Matrix<double, 2, 5> J = ak.J;
    const Vector5d qdd = J.completeOrthogonalDecomposition().solve(Vector2d(-ak.Jdot_qdot)) +
                         H * Eigen::Vector3d(u(-5, 5), u(-5, 5), u(-5, 5));
    const double a = u(0.0, 1.0);
    const auto ls = dynamics_terms(m, c, SupportModel::left_stance());
    const auto ds = support_dynamics(m, c, SupportModel::double_stance(a));
    worst = std::max(worst, inf(H.transpose() * (ds.g - ls.g)));
    worst = std::max(worst, inf(H.transpose() * ((ds.M * qdd + ds.b) - (ls.M * qdd + ls.b))));
  }
  return make("double stance dynamics equal left stance on the constraint manifold", worst, 1e-9);
}

CheckResult alpha_derivation(const ExoModel& m, UniformSource& u, int n) {
  double worst = 0.0;
  const double W = m.total_weight();
  for (int k = 0; k < n; ++k) {
    const GenCoords c = random_stance_coords(u);
    Eigen::Matrix<double, 7, 1> q7, qd7;
    q7 << u(-1, 1), u(-1, 1), c.q;
    qd7 << 0, 0, c.qdot;
    const GenCoords f = flight_coords(q7, qd7);
    const auto fly = dynamics_terms(m, f, SupportModel::flight());
    const Eigen::Matrix<double, 2, 5> Jl = ankle_jacobian(m, f, Side::Left, SupportModel::flight()).rightCols(5);
    const Eigen::Matrix<double, 2, 5> Jr = ankle_jacobian(m, f, Side::Right, SupportModel::flight()).rightCols(5);
    const double a = u(0.0, 1.0);
    const Vector5d expected = fly.g.tail(5) - Jl.row(1).transpose() * (a * W) - Jr.row(1).transpose() * ((1 - a) * W);
    const auto ds = support_dynamics(m, c, SupportModel::double_stance(a));
    worst = std::max(worst, inf(ds.g - expected));
  }
  return make("interpolated gravity equals flight gravity minus reflected vertical loads", worst, 1e-9);
}

CheckResult leg_gravity(const ExoModel& m, UniformSource& u, int n) {
  double worst = 0.0;
  for (int k = 0; k < n; ++k) {
    const GenCoords c = random_stance_coords(u);
    for (Side stance : {Side::Left, Side::Right}) {
      const Side swing = other(stance);
      const auto whole = dynamics_terms(m, c, SupportModel::stance(stance));
      const auto sw = dynamics_terms(m, leg_slice(c, swing), SupportModel::simplified_swing());
      const auto st = dynamics_terms(m, leg_slice(c, stance), SupportModel::simplified_stance());
      const auto rs = leg_rows(swing);
      const auto rt = leg_rows(stance);
      worst = std::max(worst, std::abs(whole.g(rs[0]) - sw.g(0)));
      worst = std::max(worst, std::abs(whole.g(rs[1]) - sw.g(1)));
      // Gap: weight above the stance hip times the hip height gradient.
      const double carried = m.links[kBackpack].mass + m.links[thigh_link(swing)].mass + m.links[shank_link(swing)].mass;
      const int h = hip_index(stance);
      const double ft = c.q(0) + c.q(h);
      const double fs = ft + c.q(h + 1);
      const double Lt = m.links[thigh_link(stance)].length;
      const double Ls = m.links[shank_link(stance)].length;
      const double gap_hip = carried * kGravity * (-Lt * std::sin(ft) - Ls * std::sin(fs));
      const double gap_knee = carried * kGravity * (-Ls * std::sin(fs));
      worst = std::max(worst, std::abs(whole.g(rt[0]) - st.g(0) - gap_hip));
      worst = std::max(worst, std::abs(whole.g(rt[1]) - st.g(1) - gap_knee));
    }
  }
  return make("leg gravity: swing rows match, stance gap is the carried weight", worst, 1e-11);
}

CheckResult jacobians(const ExoModel& m, UniformSource& u, int n) {
  double worst = 0.0;
  const double h = 1e-6;
  for (int k = 0; k < n / 10 + 1; ++k) {
    const GenCoords c = random_stance_coords(u);
    for (SupportModel sup : {SupportModel::left_stance(), SupportModel::right_stance()}) {
      const auto kin = com_kinematics(m, c, sup);
      for (int i = 0; i < 5; ++i) {
        GenCoords p = c, q = c;
        p.q(i) += h;
        q.q(i) -= h;
        const auto kp = com_kinematics(m, p, sup);
        const auto kq = com_kinematics(m, q, sup);
        for (std::size_t l = 0; l < kin.size(); ++l)
          worst = std::max(worst, inf((kp[l].com - kq[l].com) / (2 * h) - kin[l].JS.col(i)));
      }
      GenCoords p = c, q = c;
      p.q += h * c.qdot;
      q.q -= h * c.qdot;
      const auto kp = com_kinematics(m, p, sup);
      const auto kq = com_kinematics(m, q, sup);
      for (std::size_t l = 0; l < kin.size(); ++l)
        worst = std::max(worst, inf((kp[l].JS - kq[l].JS) * c.qdot / (2 * h) - kin[l].JSdot_qdot));
    }
  }
  return make("analytic Jacobians and Jdot*qdot match central differences", worst, 1e-6);
}

CheckResult energy(const ExoModel& base, UniformSource& u) {
  ExoModel m = base;
  m.friction = FrictionParams{};
  GenCoords c = random_stance_coords(u, 1.0);
  const SupportModel sup = SupportModel::left_stance();
  const double e0 = mechanical_energy(m, c, sup);
  const double dt = 1e-4;
  auto acc = [&](const Vector5d& q, const Vector5d& qd) {
    return forward_dynamics(m, stance_coords(q, qd), Vector4d::Zero(), Vector5d::Zero(), sup);
  };
  Vector5d q = c.q, qd = c.qdot;
  for (int k = 0; k < 5000; ++k) {
    const Vector5d a1 = acc(q, qd);
    const Vector5d a2 = acc(q + 0.5 * dt * qd, qd + 0.5 * dt * a1);
    const Vector5d a3 = acc(q + 0.5 * dt * (qd + 0.5 * dt * a1), qd + 0.5 * dt * a2);
    const Vector5d a4 = acc(q + dt * (qd + 0.5 * dt * a2), qd + dt * a3);
    q += dt * qd + dt * dt / 6.0 * (a1 + a2 + a3);
    qd += dt / 6.0 * (a1 + 2 * a2 + 2 * a3 + a4);
  }
  const double e1 = mechanical_energy(m, stance_coords(q, qd), sup);
  const double scale = std::max(1.0, std::abs(e0));
  return make("passive left stance conserves mechanical energy over 0.5 s", std::abs(e1 - e0) / scale, 1e-6);
}

CheckResult qp_kkt(UniformSource& u, int n) {
  double worst = 0.0;
  int not_optimal = 0;
  QpSolver solver;
  for (int k = 0; k < n; ++k) {
    const int nv = 2 + static_cast<int>(u(0, 7.999));
    const int me = static_cast<int>(u(0, std::min(nv - 1, 3) + 0.999));
    const int mi = static_cast<int>(u(0, 6.999));
    QpProblem p;
    p.C = Eigen::MatrixXd::NullaryExpr(nv + 1, nv, [&]() { return u(-1, 1); });
    p.d = Eigen::VectorXd::NullaryExpr(nv + 1, [&]() { return u(-2, 2); });
    p.A_eq = Eigen::MatrixXd::NullaryExpr(me, nv, [&]() { return u(-1, 1); });
    p.D = Eigen::MatrixXd::NullaryExpr(mi, nv, [&]() { return u(-1, 1); });
    // Feasible by construction around a random point.
    const Eigen::VectorXd x0 = Eigen::VectorXd::NullaryExpr(nv, [&]() { return u(-1, 1); });
    p.b_eq = p.A_eq * x0;
    p.f = p.D * x0 + Eigen::VectorXd::NullaryExpr(mi, [&]() { return u(0, 0.5); });
    const QpSolution s = solver.solve(p);
    if (s.status != QpStatus::Optimal) ++not_optimal;
    worst = std::max(worst, s.kkt.max());
  }
  char buf[64];
  std::snprintf(buf, sizeof buf, "%d not optimal", not_optimal);
  CheckResult r = make("QP solutions are KKT points", worst, 1e-6, buf);
  r.pass = r.pass && not_optimal == 0;
  return r;
}

CheckResult estimator_statics(const ExoModel& m, UniformSource& u, int n) {
  double worst = 0.0;
  const double W = m.total_weight();
  for (int k = 0; k < n; ++k) {
    GenCoords c = random_stance_coords(u);
    c.qdot.setZero();
    Vector5d tau_int;
    tau_int << 0, u(-20, 20), u(-20, 20), u(-20, 20), u(-20, 20);
    // single stance
    for (Side s : {Side::Left, Side::Right}) {
      const auto d = dynamics_terms(m, c, SupportModel::stance(s));
      Vector5d ti = tau_int;
      ti(0) = d.g(0);
      const Vector4d tj = d.g.tail<4>() - ti.tail<4>();
      worst = std::max(worst, inf(estimate_single_stance(m, c, tj, s).values - ti));
    }
    // double stance, gamma = 0
    const double a = u(0.05, 0.95);
    const auto d = support_dynamics(m, c, SupportModel::double_stance(a));
    Vector5d ti = tau_int;
    ti(0) = d.g(0);
    const Vector4d tj = d.g.tail<4>() - ti.tail<4>();
    try {
      const DsSolution ds = estimate_double_stance(m, c, tj, a, 0.0);
      worst = std::max(worst, inf(ds.tau_int - ti));
      worst = std::max(worst, inf(ds.f_left - Vector2d(0, a * W)));
      worst = std::max(worst, inf(ds.f_right - Vector2d(0, (1 - a) * W)));
    } catch (const DegenerateConfiguration&) {
    }
  }
  return make("static estimator round trip (single and double stance)", worst, 1e-6);
}

CheckResult schedule_alpha(const ExoModel& m) {
  GaitSchedule s;
  s.total_weight = m.total_weight();
  double worst = 0.0;
  double prev = s.at(0).alpha;
  double jump = 0.0;
  for (int k = 0; k < 6000; ++k) {
    const double t = k * 1e-3;
    const ScheduledPhase p = s.at(t);
    worst = std::max(worst, std::abs(alpha(s.grf(t)) - p.alpha));
    jump = std::max(jump, std::abs(p.alpha - prev));
    prev = p.alpha;
  }
  char buf[64];
  std::snprintf(buf, sizeof buf, "max alpha step %.3g per ms", jump);
  CheckResult r = make("alpha recovered from synthesized GRF", worst, 1e-9, buf);
  r.pass = r.pass && jump < 0.01;
  return r;
}

CheckResult determinism(std::uint64_t seed) {
  ScenarioConfig c = ScenarioConfig::defaults();
  c.duration = 1.0;
  c.seed = seed;
  c.sensor.noise_std = 0.05;
  const std::string a = simlog_to_csv(run_scenario(c));
  const std::string b = simlog_to_csv(run_scenario(c));
  return make("seeded scenario logs are bit-identical", a == b ? 0.0 : 1.0, 0.0);
}

}  // namespace

std::vector<CheckResult> run_invariant_checks(std::uint64_t seed, int samples) {
  const ExoModel m = default_model();
  UniformSource u(seed);
  std::vector<CheckResult> out;
  out.push_back(jacobians(m, u, samples));
  out.push_back(energy(m, u));
  out.push_back(ds_projection(m, u, samples));
  out.push_back(alpha_derivation(m, u, samples));
  out.push_back(leg_gravity(m, u, samples));
  out.push_back(estimator_statics(m, u, samples));
  out.push_back(qp_kkt(u, samples));
  out.push_back(schedule_alpha(m));
  out.push_back(determinism(seed));
  return out;
}

}  // namespace exo
