#include "doctest.h"

#include <cmath>

#include "exo/checks.hpp"
#include "exo/estimation.hpp"
#include "oracles.hpp"

using namespace exo;

namespace {

Vector4d random_joint_torque(UniformSource& u, double scale = 20.0) {
  return Vector4d(u(-scale, scale), u(-scale, scale), u(-scale, scale), u(-scale, scale));
}

GenCoords static_coords(UniformSource& u) {
  GenCoords c = random_stance_coords(u);
  c.qdot.setZero();
  return c;
}

}  // namespace

TEST_CASE("gravity-compensating joint torques leave only the backpack row") {
  const ExoModel m = default_model();
  UniformSource u(1);
  const GenCoords c = static_coords(u);
  for (Side s : {Side::Left, Side::Right}) {
    const auto d = dynamics_terms(m, c, SupportModel::stance(s));
    const Vector5d est = estimate_single_stance(m, c, d.g.tail<4>(), s).values;
    CHECK(std::abs(est(0) - d.g(0)) < 1e-12);
    CHECK(est.tail<4>().isZero(1e-12));
  }
}

TEST_CASE("single stance round trip on a slow trajectory") {
  const ExoModel m = default_model();
  UniformSource u(2);
  const GenCoords c0 = static_coords(u);
  // q(t) = q0 + 0.2 sin(w t): rates of order 1e-4, accelerations of order 1e-8
  const double w = 5e-4;
  double worst = 0.0;
  for (int k = 0; k < 200; ++k) {
    const double t = k * 10.0;
    GenCoords c = c0;
    Vector5d qdd;
    for (int i = 0; i < 5; ++i) {
      c.q(i) += 0.2 * std::sin(w * t + i);
      c.qdot(i) = 0.2 * w * std::cos(w * t + i);
      qdd(i) = -0.2 * w * w * std::sin(w * t + i);
    }
    const Side side = k % 2 ? Side::Left : Side::Right;
    const auto d = dynamics_terms(m, c, SupportModel::stance(side));
    const Vector5d rhs = d.M * qdd + d.b + d.g;
    Vector5d tau_int;
    tau_int(0) = rhs(0);
    tau_int.tail<4>() = random_joint_torque(u);
    const Vector4d tau_joint = rhs.tail<4>() - tau_int.tail<4>();
    worst = std::max(worst, (estimate_single_stance(m, c, tau_joint, side).values - tau_int).cwiseAbs().maxCoeff());
  }
  CHECK(worst <= 1e-4);
}

TEST_CASE("double stance statics oracle is consistent in both frames") {
  const ExoModel m = default_model();
  UniformSource u(3);
  const GenCoords c = static_coords(u);
  const auto s = oracle::ds_statics(m, c, 0.3, 0.08, random_joint_torque(u));
  const auto rs = dynamics_terms(m, c, SupportModel::right_stance());
  const Eigen::Matrix<double, 2, 5> Jl = ankle_jacobian(m, c, Side::Left, SupportModel::right_stance());
  const Vector5d resid = rs.g - selection_transpose() * s.tau_joint - s.tau_int - Jl.transpose() * s.f_left;
  CHECK(resid.cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("double stance system layout") {
  const ExoModel m = default_model();
  UniformSource u(4);
  const GenCoords c = static_coords(u);
  const DsSystem s = build_ds_system(m, c, random_joint_torque(u), 0.5, 0.0);
  CHECK(s.K.rows() == 12);
  CHECK(s.K.cols() == 9);
  CHECK(Eigen::JacobiSVD<Eigen::MatrixXd>(s.K).rank() == 9);
  // alpha = 0.5: 0.5 F_l,y - 0.5 F_r,y = 0
  CHECK(s.K(10, 3) == 0.5);
  CHECK(s.K(10, 1) == -0.5);
  // gamma = 0: F_l,x = 0
  CHECK(s.K(11, 2) == 1.0);
  CHECK(s.K(11, 3) == 0.0);
  CHECK(s.m(10) == 0.0);
  CHECK(s.m(11) == 0.0);
  CHECK_THROWS_AS(build_ds_system(m, c, Vector4d::Zero(), 1.0, 0.0), ContractError);
  CHECK_THROWS_AS(build_ds_system(m, c, Vector4d::Zero(), 0.0, 0.0), ContractError);
}

TEST_CASE("double stance round trip with known forces") {
  const ExoModel m = default_model();
  UniformSource u(5);
  double worst_tau = 0.0, worst_f = 0.0, worst_ratio = 0.0;
  for (int k = 0; k < 200; ++k) {
    const GenCoords c = static_coords(u);
    const double a = u(0.02, 0.98);
    const double g = u(-0.1, 0.1);
    const auto s = oracle::ds_statics(m, c, a, g, random_joint_torque(u));
    const DsSolution sol = estimate_double_stance(m, c, s.tau_joint, a, g);
    worst_tau = std::max(worst_tau, (sol.tau_int - s.tau_int).cwiseAbs().maxCoeff());
    worst_f = std::max(worst_f, (sol.f_left - s.f_left).cwiseAbs().maxCoeff());
    worst_f = std::max(worst_f, (sol.f_right - s.f_right).cwiseAbs().maxCoeff());
    const double fy = sol.f_left(1) + sol.f_right(1);
    worst_ratio = std::max(worst_ratio, std::abs((1 - a) * sol.f_left(1) - a * sol.f_right(1)) / fy);
    CHECK_FALSE(sol.negative_load);
    CHECK(sol.residual_norm < 1e-8);
  }
  CHECK(worst_tau <= 1e-6);
  CHECK(worst_f <= 1e-6);
  CHECK(worst_ratio <= 1e-8);
}

TEST_CASE("double stance estimate meets the single stance one as alpha goes to 1") {
  const ExoModel m = default_model();
  UniformSource u(6);
  for (int k = 0; k < 20; ++k) {
    const GenCoords c = static_coords(u);
    const double a = 1.0 - 1e-6;
    const auto s = oracle::ds_statics(m, c, a, 0.0, random_joint_torque(u));
    const Vector5d ds = estimate_double_stance(m, c, s.tau_joint, a, 0.0).tau_int;
    const Vector5d ss = estimate_single_stance(m, c, s.tau_joint, Side::Left).values;
    CHECK((ds - ss).cwiseAbs().maxCoeff() <= 1e-3);
  }
}

TEST_CASE("a wrong alpha moves the estimate continuously") {
  const ExoModel m = default_model();
  UniformSource u(7);
  const GenCoords c = static_coords(u);
  const auto s = oracle::ds_statics(m, c, 0.4, 0.0, random_joint_torque(u));
  double prev = 0.0;
  for (double da : {0.0, 0.0125, 0.025, 0.05}) {
    const double err = (estimate_double_stance(m, c, s.tau_joint, 0.4 + da, 0.0).tau_int - s.tau_int).norm();
    CHECK(err >= prev);
    prev = err;
  }
  CHECK(prev > 1e-3);
  CHECK(prev < 50.0);
}

TEST_CASE("simplified estimator against the whole-body one") {
  const ExoModel m = default_model();
  UniformSource u(8);
  for (int k = 0; k < 50; ++k) {
    const GenCoords c = static_coords(u);
    const Vector4d tau = random_joint_torque(u);
    for (Side stance : {Side::Left, Side::Right}) {
      const Side swing = other(stance);
      const Vector5d whole = estimate_single_stance(m, c, tau, stance).values;
      const int hs = hip_index(swing), ht = hip_index(stance);
      // the strain-gauge reading is the negative joint torque
      const Vector2d sw =
          estimate_simplified(m, leg_slice(c, swing), Vector2d(-tau.segment<2>(hs - 1)), LegPhase::Swing).values;
      CHECK((sw - whole.segment<2>(hs)).cwiseAbs().maxCoeff() <= 1e-9);
      const Vector2d st =
          estimate_simplified(m, leg_slice(c, stance), Vector2d(-tau.segment<2>(ht - 1)), LegPhase::Stance).values;
      // missing weight above the stance hip: backpack and swing leg
      const double carried =
          m.links[kBackpack].mass + m.links[thigh_link(swing)].mass + m.links[shank_link(swing)].mass;
      const double ft = c.q(0) + c.q(ht), fs = ft + c.q(ht + 1);
      const double Lt = m.links[thigh_link(stance)].length, Ls = m.links[shank_link(stance)].length;
      const Vector2d gap(-carried * kGravity * (Lt * std::sin(ft) + Ls * std::sin(fs)),
                         -carried * kGravity * Ls * std::sin(fs));
      CHECK((whole.segment<2>(ht) - st - gap).cwiseAbs().maxCoeff() <= 1e-9);
    }
  }
}

TEST_CASE("vertical still leg with no torque reads zero") {
  const ExoModel m = default_model();
  const GenCoords c = stance_coords(Vector5d::Zero(), Vector5d::Zero());
  for (LegPhase p : {LegPhase::Stance, LegPhase::Swing})
    CHECK(estimate_simplified(m, leg_slice(c, Side::Left), Vector2d::Zero(), p).values.isZero(1e-12));
}

TEST_CASE("stance weight blends the leg models") {
  const ExoModel m = default_model();
  UniformSource u(9);
  const GenCoords leg = leg_slice(random_stance_coords(u), Side::Right);
  const Vector2d tau(3.0, -2.0);
  const Vector2d st = estimate_simplified(m, leg, tau, 1.0).values;
  const Vector2d sw = estimate_simplified(m, leg, tau, 0.0).values;
  const Vector2d mid = estimate_simplified(m, leg, tau, 0.25).values;
  CHECK((mid - (0.25 * st + 0.75 * sw)).norm() < 1e-12);
  CHECK_THROWS_AS(estimate_simplified(m, leg, tau, 1.5), ContractError);
  CHECK_THROWS_AS(estimate_simplified(m, leg, Vector2d(std::nan(""), 0.0), LegPhase::Swing), ContractError);
}
