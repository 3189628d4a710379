#include "doctest.h"

#include <cmath>

#include "exo/checks.hpp"
#include "exo/model.hpp"
#include "oracles.hpp"

using namespace exo;

namespace {

ExoModel unit_model() {
  ExoModel m = default_model();
  for (auto& l : m.links) {
    l.length = 1.0;
    l.com_offset = 0.5;
  }
  return m;
}

}  // namespace

TEST_CASE("zero configuration puts the stance shank CoM above the ankle") {
  const ExoModel m = unit_model();
  const GenCoords c = stance_coords(Vector5d::Zero(), Vector5d::Zero());
  const auto kin = com_kinematics(m, c, SupportModel::left_stance());
  const auto& shank = kin[kLeftShank];
  CHECK(shank.link == kLeftShank);
  CHECK(shank.com(0) == doctest::Approx(0.0).epsilon(1e-15));
  // offsets are measured from the knee, so the CoM sits length - offset above the ankle
  CHECK(shank.com(1) == doctest::Approx(0.5));
  CHECK(kin[kLeftThigh].com(1) == doctest::Approx(1.5));
  CHECK(kin[kBackpack].com(1) == doctest::Approx(2.5));
}

TEST_CASE("single active joint gives the planar pendulum Jacobian") {
  const ExoModel m = default_model();
  Vector5d q;
  q << 0.1, 0.3, -0.4, -0.2, -0.5;
  const GenCoords c = stance_coords(q, Vector5d::Zero());
  const auto kin = com_kinematics(m, c, SupportModel::left_stance());
  // the right thigh CoM moves with the right hip on a circle of radius com_offset about the hip
  const double r = m.links[kRightThigh].com_offset;
  const double phi = q(0) + q(3);
  const Vector2d col = kin[kRightThigh].JS.col(3);
  CHECK(std::abs(col(0) - r * std::cos(phi)) < 1e-12);
  CHECK(std::abs(col(1) - r * std::sin(phi)) < 1e-12);
  // swing ankle, only the swing hip moving: lever arm from the hip to the ankle
  const Vector2d lever = ankle_kinematics(m, c, Side::Right, SupportModel::left_stance()).position -
                         (kin[kRightThigh].com - r * Vector2d(std::sin(phi), -std::cos(phi)));
  const Vector2d ja = ankle_jacobian(m, c, Side::Right, SupportModel::left_stance()).col(3);
  CHECK((ja - Vector2d(-lever(1), lever(0))).norm() < 1e-12);
}

TEST_CASE("CoM Jacobians match central differences") {
  const ExoModel m = default_model();
  UniformSource u(7);
  const double h = 1e-6;
  for (int k = 0; k < 20; ++k) {
    const GenCoords c = random_stance_coords(u);
    for (SupportModel sup : {SupportModel::left_stance(), SupportModel::right_stance()}) {
      const auto kin = com_kinematics(m, c, sup);
      for (int i = 0; i < 5; ++i) {
        GenCoords p = c, n = c;
        p.q(i) += h;
        n.q(i) -= h;
        const auto kp = com_kinematics(m, p, sup);
        const auto kn = com_kinematics(m, n, sup);
        for (std::size_t l = 0; l < kin.size(); ++l)
          CHECK(((kp[l].com - kn[l].com) / (2 * h) - kin[l].JS.col(i)).norm() < 1e-5);
      }
    }
  }
}

TEST_CASE("flight ankle Jacobian matches central differences") {
  const ExoModel m = default_model();
  Eigen::Matrix<double, 7, 1> q, qd;
  q << 0.2, 0.9, 0.1, 0.4, -0.3, -0.1, -0.7;
  qd.setZero();
  const GenCoords c = flight_coords(q, qd);
  const auto J = ankle_jacobian(m, c, Side::Left, SupportModel::flight());
  const double h = 1e-6;
  for (int i = 0; i < 7; ++i) {
    GenCoords p = c, n = c;
    p.q(i) += h;
    n.q(i) -= h;
    const Vector2d fd = (ankle_kinematics(m, p, Side::Left, SupportModel::flight()).position -
                         ankle_kinematics(m, n, Side::Left, SupportModel::flight()).position) /
                        (2 * h);
    CHECK((fd - J.col(i)).norm() < 1e-6);
  }
}

TEST_CASE("pinned ankle has a zero Jacobian") {
  const ExoModel m = default_model();
  UniformSource u(3);
  const GenCoords c = random_stance_coords(u);
  CHECK(ankle_jacobian(m, c, Side::Left, SupportModel::left_stance()).isZero(0.0));
  CHECK(ankle_jacobian(m, c, Side::Right, SupportModel::right_stance()).isZero(0.0));
  CHECK_FALSE(ankle_jacobian(m, c, Side::Right, SupportModel::left_stance()).isZero(1e-6));
}

TEST_CASE("zero velocity gives zero Coriolis terms") {
  const ExoModel m = default_model();
  UniformSource u(5);
  GenCoords c = random_stance_coords(u);
  c.qdot.setZero();
  for (SupportModel sup : {SupportModel::left_stance(), SupportModel::right_stance()}) {
    const auto d = dynamics_terms(m, c, sup);
    CHECK(d.b.isZero(0.0));
  }
}

TEST_CASE("hanging leg matches the two-link Lagrangian") {
  const oracle::Pendulum pend{2.0, 1.5, 0.45, 0.4};
  const ExoModel m = oracle::point_mass_model(pend.m1, pend.m2, pend.L1, pend.L2);
  Vector5d q, qd;
  q << 0.15, 0.6, -0.9, 0.1, -0.2;
  qd << 0.0, 1.3, -2.1, 0.4, 0.2;
  const GenCoords leg = leg_slice(stance_coords(q, qd), Side::Left);
  const auto d = dynamics_terms(m, leg, SupportModel::simplified_swing());
  const double a1 = q(0) + q(1);
  const double a2 = a1 + q(2);
  CHECK((d.M - pend.M(q(2))).norm() < 1e-12);
  CHECK((d.g - pend.g(a1, a2)).norm() < 1e-12);
  CHECK((d.b - pend.b(q(2), qd(1), qd(2))).norm() < 1e-12);
}

TEST_CASE("two point masses on a stance leg: gravity from the potential by hand") {
  // thigh mass at the hip, shank mass at the knee, both links 1 m
  ExoModel m = default_model();
  m.rotor_inertia = 0.0;
  m.links[kLeftThigh] = {1.0, 0.0, 0.0, 1.0};
  m.links[kLeftShank] = {1.0, 0.0, 0.0, 1.0};
  const auto g_at = [&](double pitch, double hip, double knee) {
    Vector5d q;
    q << pitch, hip, knee, 0.0, 0.0;
    return dynamics_terms(m, leg_slice(stance_coords(q, Vector5d::Zero()), Side::Left),
                          SupportModel::simplified_stance())
        .g;
  };
  // vertical links: the potential is stationary
  CHECK(g_at(0.0, 0.0, 0.0).norm() < 1e-15);
  // V = g (y_hip + y_knee), y_knee = cos(s), y_hip = cos(t) + cos(s), t = pitch + hip, s = t + knee
  const double pitch = 0.05, hip = 0.4, knee = -0.7;
  const double t = pitch + hip, s = t + knee;
  const Vector2d expected(kGravity * (-std::sin(t) - 2.0 * std::sin(s)), kGravity * (-2.0 * std::sin(s)));
  CHECK((g_at(pitch, hip, knee) - expected).norm() < 1e-12);
}

TEST_CASE("mass matrix is symmetric and positive definite") {
  const ExoModel m = default_model();
  UniformSource u(11);
  for (int k = 0; k < 1000; ++k) {
    Vector5d q, qd;
    for (int i = 0; i < 5; ++i) {
      q(i) = u(-M_PI / 2, M_PI / 2);
      qd(i) = u(-2, 2);
    }
    const GenCoords c = stance_coords(q, qd);
    for (SupportModel sup : {SupportModel::left_stance(), SupportModel::right_stance()}) {
      const auto d = dynamics_terms(m, c, sup);
      CHECK((d.M - d.M.transpose()).cwiseAbs().maxCoeff() <= 1e-10);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(d.M);
      CHECK(es.eigenvalues().minCoeff() > 0.0);
    }
  }
}

TEST_CASE("unforced flight conserves energy") {
  ExoModel m = default_model();
  m.friction = {};
  Eigen::Matrix<double, 7, 1> q, qd;
  q << 0.0, 2.0, 0.1, 0.3, -0.6, -0.2, -0.4;
  qd << 0.3, 0.5, 0.8, -1.0, 1.5, 0.7, -1.2;
  const auto energy = [&](const Eigen::VectorXd& x, const Eigen::VectorXd& v) {
    return mechanical_energy(m, flight_coords(x, v), SupportModel::flight());
  };
  const auto accel = [&](const Eigen::VectorXd& x, const Eigen::VectorXd& v) -> Eigen::VectorXd {
    const auto d = dynamics_terms(m, flight_coords(x, v), SupportModel::flight());
    return d.M.ldlt().solve(-d.b - d.g);
  };
  const double e0 = energy(q, qd);
  Eigen::VectorXd x = q, v = qd;
  const double dt = 1e-4;
  for (int k = 0; k < 5000; ++k) {
    const Eigen::VectorXd a1 = accel(x, v);
    const Eigen::VectorXd v1 = v + 0.5 * dt * a1;
    const Eigen::VectorXd a2 = accel(x + 0.5 * dt * v, v1);
    const Eigen::VectorXd v2 = v + 0.5 * dt * a2;
    const Eigen::VectorXd a3 = accel(x + 0.5 * dt * v1, v2);
    const Eigen::VectorXd v3 = v + dt * a3;
    const Eigen::VectorXd a4 = accel(x + dt * v2, v3);
    x += dt / 6.0 * (v + 2 * v1 + 2 * v2 + v3);
    v += dt / 6.0 * (a1 + 2 * a2 + 2 * a3 + a4);
  }
  CHECK(std::abs(energy(x, v) - e0) / std::abs(e0) <= 1e-4);
  // the free body falls: the vertical CoM acceleration is -g
  const auto d = dynamics_terms(m, flight_coords(q, qd), SupportModel::flight());
  CHECK(d.g(0) == doctest::Approx(0.0));
  CHECK(d.g(1) == doctest::Approx(m.total_weight()));
}

TEST_CASE("double stance interpolation") {
  const ExoModel m = default_model();
  UniformSource u(2);
  const GenCoords c = random_stance_coords(u);
  const auto ls = dynamics_terms(m, c, SupportModel::left_stance());
  const auto rs = dynamics_terms(m, c, SupportModel::right_stance());
  const auto one = interpolate_ds(ls, rs, 1.0);
  CHECK(one.M == ls.M);
  CHECK(one.b == ls.b);
  CHECK(one.g == ls.g);
  const auto half = interpolate_ds(ls, rs, 0.5);
  CHECK((half.M - 0.5 * (ls.M + rs.M)).cwiseAbs().maxCoeff() < 1e-14);
  CHECK((half.g - 0.5 * (ls.g + rs.g)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK_THROWS_AS(interpolate_ds(ls, rs, 1.5), ContractError);
  CHECK_THROWS_AS(interpolate_ds(ls, rs, -0.1), ContractError);
}

TEST_CASE("constraint matrix spans the null space of the swing ankle Jacobian") {
  const ExoModel m = default_model();
  UniformSource u(9);
  for (int k = 0; k < 50; ++k) {
    const GenCoords c = random_stance_coords(u);
    for (Side swing : {Side::Left, Side::Right}) {
      const auto H = constraint_matrix(m, c, swing);
      const auto J = ankle_jacobian(m, c, swing, SupportModel::stance(other(swing)));
      CHECK((J * H).norm() <= 1e-10);
      CHECK((H.transpose() * H - Eigen::Matrix3d::Identity()).norm() < 1e-12);
      CHECK(Eigen::FullPivLU<Eigen::MatrixXd>(H).rank() == 3);
    }
  }
}

TEST_CASE("straight collinear legs are degenerate") {
  const ExoModel m = default_model();
  Vector5d q;
  q << 0.1, 0.2, 0.0, 0.2, 0.0;
  CHECK_THROWS_AS(constraint_matrix(m, stance_coords(q, Vector5d::Zero()), Side::Right), DegenerateConfiguration);
}

TEST_CASE("coordinate contracts") {
  const ExoModel m = default_model();
  GenCoords c = stance_coords(Vector5d::Zero(), Vector5d::Zero());
  CHECK_THROWS_AS(dynamics_terms(m, c, SupportModel::simplified_stance()), ContractError);
  CHECK_THROWS_AS(dynamics_terms(m, c, SupportModel::flight()), ContractError);
  CHECK_THROWS_AS(dynamics_terms(m, c, SupportModel::double_stance(0.5)), ContractError);
  c.q(2) = std::nan("");
  CHECK_THROWS_AS(dynamics_terms(m, c, SupportModel::left_stance()), ContractError);
  GenCoords bad = stance_coords(Vector5d::Zero(), Vector5d::Zero());
  bad.q.resize(4);
  CHECK_THROWS_AS(com_kinematics(m, bad, SupportModel::left_stance()), ContractError);
}

TEST_CASE("composite links and model defaults") {
  const LinkParams l = compose_link(1.0, {{"a", 1.0, 0.1, 0.2}, {"b", 3.0, 0.2, 0.6}});
  CHECK(l.mass == doctest::Approx(4.0));
  CHECK(l.com_offset == doctest::Approx(0.5));
  CHECK(l.com_inertia == doctest::Approx(0.1 + 1.0 * 0.09 + 0.2 + 3.0 * 0.01));
  const ExoModel m = default_model();
  CHECK(m.rotor_inertia == doctest::Approx(1.246e-4 * 122.5 * 122.5));
  CHECK(m.friction.c0(0) == 5.01);
  CHECK(m.friction.c1(3) == 5.16);
  CHECK_NOTHROW(validate(m));
  const ExoModel nd = no_drive_model(m, 0.2);
  CHECK(nd.rotor_inertia == 0.0);
  CHECK(nd.friction.c0(1) == doctest::Approx(0.2 * 4.30));
  ExoModel bad = m;
  bad.links[kLeftShank].com_offset = 2.0;
  CHECK_THROWS_AS(validate(bad), ContractError);
}
