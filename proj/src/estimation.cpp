#include "exo/estimation.hpp"

#include <cmath>

namespace exo {

Eigen::Matrix<double, 5, 4> selection_transpose() {
  Eigen::Matrix<double, 5, 4> St = Eigen::Matrix<double, 5, 4>::Zero();
  St.bottomRows<4>().setIdentity();
  return St;
}

namespace {

void require_finite(const Eigen::VectorXd& v, const char* what) {
  if (!v.allFinite()) throw ContractError(std::string("non-finite ") + what);
}

}  // namespace

InteractionTorque estimate_single_stance(const ExoModel& model, const GenCoords& coords, const Vector4d& tau_joint,
                                         Side stance_side) {
  require_finite(tau_joint, "joint torque");
  const auto d = dynamics_terms(model, coords, SupportModel::stance(stance_side));
  InteractionTorque out;
  out.values = -selection_transpose() * tau_joint + d.b + d.g;
  return out;
}

DsSystem build_ds_system(const ExoModel& model, const GenCoords& coords, const Vector4d& tau_joint, double alpha,
                         double gamma) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw ContractError("double stance estimate needs alpha in (0, 1); use the single stance estimator");
  require_finite(tau_joint, "joint torque");
  if (!std::isfinite(gamma)) throw ContractError("non-finite gamma");
  const auto ls = dynamics_terms(model, coords, SupportModel::left_stance());
  const auto rs = dynamics_terms(model, coords, SupportModel::right_stance());
  const Eigen::Matrix<double, 2, 5> Jr = ankle_jacobian(model, coords, Side::Right, SupportModel::left_stance());
  const Eigen::Matrix<double, 2, 5> Jl = ankle_jacobian(model, coords, Side::Left, SupportModel::right_stance());
  const Vector5d St_tau = selection_transpose() * tau_joint;

  DsSystem s;
  s.K.setZero();
  s.m.setZero();
  // Left stance with the right ankle wrench.
  s.K.block<5, 2>(0, 0) = Jr.transpose();
  s.K.block<5, 5>(0, 4).setIdentity();
  s.m.segment<5>(0) = -St_tau + ls.b + ls.g;
  // Right stance with the left ankle wrench.
  s.K.block<5, 2>(5, 2) = Jl.transpose();
  s.K.block<5, 5>(5, 4).setIdentity();
  s.m.segment<5>(5) = -St_tau + rs.b + rs.g;
  // Vertical load split: (1 - alpha) F_l,y - alpha F_r,y = 0.
  s.K(10, 3) = 1.0 - alpha;
  s.K(10, 1) = -alpha;
  // Left force direction: F_l,x - gamma F_l,y = 0.
  s.K(11, 2) = 1.0;
  s.K(11, 3) = -gamma;
  return s;
}

DsSolution estimate_double_stance(const ExoModel& model, const GenCoords& coords, const Vector4d& tau_joint,
                                  double alpha, double gamma) {
  const DsSystem s = build_ds_system(model, coords, tau_joint, alpha, gamma);
  // Column equilibration: K mixes N and N*m.
  Eigen::Matrix<double, 9, 1> scale;
  for (int c = 0; c < 9; ++c) {
    const double nrm = s.K.col(c).norm();
    scale(c) = nrm > 0.0 ? 1.0 / nrm : 1.0;
  }
  const Eigen::Matrix<double, 12, 9> Ks = s.K * scale.asDiagonal();
  Eigen::ColPivHouseholderQR<Eigen::Matrix<double, 12, 9>> qr(Ks);
  qr.setThreshold(1e-10);
  if (qr.rank() < 9) throw DegenerateConfiguration("double stance system is rank deficient");
  const Eigen::Matrix<double, 9, 1> xi = scale.asDiagonal() * qr.solve(s.m);

  DsSolution out;
  out.f_right = xi.segment<2>(0);
  out.f_left = xi.segment<2>(2);
  out.tau_int = xi.segment<5>(4);
  out.residual_norm = (s.K * xi - s.m).norm();
  out.negative_load = out.f_left(1) < -1.0 || out.f_right(1) < -1.0;
  return out;
}

DynamicsTerms simplified_terms(const ExoModel& model, const GenCoords& leg, double w) {
  if (!(w >= 0.0 && w <= 1.0)) throw ContractError("stance weight outside [0, 1]");
  if (w == 1.0) return dynamics_terms(model, leg, SupportModel::simplified_stance());
  if (w == 0.0) return dynamics_terms(model, leg, SupportModel::simplified_swing());
  const auto st = dynamics_terms(model, leg, SupportModel::simplified_stance());
  const auto sw = dynamics_terms(model, leg, SupportModel::simplified_swing());
  DynamicsTerms d;
  d.M = w * st.M + (1.0 - w) * sw.M;
  d.b = w * st.b + (1.0 - w) * sw.b;
  d.g = w * st.g + (1.0 - w) * sw.g;
  return d;
}

InteractionTorque estimate_simplified(const ExoModel& model, const GenCoords& leg, const Vector2d& tau_sensor,
                                      double stance_weight) {
  require_finite(tau_sensor, "joint torque");
  const auto d = simplified_terms(model, leg, stance_weight);
  InteractionTorque out;
  out.values = tau_sensor + d.b + d.g;
  out.source = EstimatorKind::Simplified;
  return out;
}

InteractionTorque estimate_simplified(const ExoModel& model, const GenCoords& leg, const Vector2d& tau_sensor,
                                      LegPhase phase) {
  return estimate_simplified(model, leg, tau_sensor, phase == LegPhase::Stance ? 1.0 : 0.0);
}

}  // namespace exo
