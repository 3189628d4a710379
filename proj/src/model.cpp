#include "exo/model.hpp"

#include <cmath>

namespace exo {

LinkParams compose_link(double length, const std::vector<BodyPart>& parts) {
  LinkParams lp;
  lp.length = length;
  double m = 0.0;
  double moment = 0.0;
  for (const auto& p : parts) {
    m += p.mass;
    moment += p.mass * p.offset;
  }
  lp.mass = m;
  lp.com_offset = m > 0.0 ? moment / m : 0.0;
  double inertia = 0.0;
  for (const auto& p : parts) {
    const double d = p.offset - lp.com_offset;
    inertia += p.com_inertia + p.mass * d * d;
  }
  lp.com_inertia = inertia;
  return lp;
}

ExoModel default_model() {
  ExoModel m;
  // Backpack: one body, CoM above the hip axis.
  m.links[kBackpack] = LinkParams{10.3, 0.201, 0.20, 0.45};
  const LinkParams thigh = compose_link(0.42, {{"upper_thigh", 0.7, 0.002197, 0.08},
                                               {"lower_thigh", 2.14, 0.005901, 0.25}});
  // The passive foot is merged into the shank at the ankle.
  const LinkParams shank = compose_link(0.42, {{"upper_shank", 0.64, 0.002346, 0.08},
                                               {"lower_shank", 0.47, 0.0007941, 0.24},
                                               {"foot", 1.25, 0.004441, 0.42}});
  m.links[kLeftThigh] = m.links[kRightThigh] = thigh;
  m.links[kLeftShank] = m.links[kRightShank] = shank;
  m.rotor_inertia = 1.246e-4 * 122.5 * 122.5;
  m.friction.c0 << 5.01, 4.30, 3.26, 4.45;
  m.friction.c1 << 4.58, 3.25, 4.67, 5.16;
  return m;
}

ExoModel no_drive_model(const ExoModel& m, double friction_scale) {
  ExoModel out = m;
  out.rotor_inertia = 0.0;
  out.friction.c0 *= friction_scale;
  out.friction.c1 *= friction_scale;
  return out;
}

void validate(const ExoModel& m) {
  for (const auto& l : m.links) {
    if (!(l.mass >= 0.0) || !(l.com_inertia >= 0.0))
      throw ContractError("link mass and inertia must be nonnegative");
    if (!(l.com_offset >= 0.0) || !(l.com_offset <= l.length))
      throw ContractError("link CoM offset must lie within the link");
  }
  if (!(m.rotor_inertia >= 0.0)) throw ContractError("rotor inertia must be nonnegative");
  if ((m.friction.c0.array() < 0.0).any() || (m.friction.c1.array() < 0.0).any())
    throw ContractError("friction coefficients must be nonnegative");
}

GenCoords stance_coords(const Vector5d& q, const Vector5d& qdot, double t) {
  GenCoords c;
  c.param = Parameterization::Stance5;
  c.q = q;
  c.qdot = qdot;
  c.t = t;
  return c;
}

GenCoords flight_coords(const Eigen::Matrix<double, 7, 1>& q, const Eigen::Matrix<double, 7, 1>& qdot, double t) {
  GenCoords c;
  c.param = Parameterization::Flight7;
  c.q = q;
  c.qdot = qdot;
  c.t = t;
  return c;
}

GenCoords leg_slice(const GenCoords& s, Side leg) {
  if (s.param != Parameterization::Stance5) throw ContractError("leg_slice needs Stance5 coordinates");
  GenCoords c;
  c.param = Parameterization::Leg2;
  c.leg = leg;
  const int h = hip_index(leg);
  c.q = s.q.segment(h, 2);
  c.qdot = s.qdot.segment(h, 2);
  c.base_pitch = s.q(0);
  c.t = s.t;
  return c;
}

namespace detail {

std::vector<Term> link_com_terms(const ExoModel& m, int link) {
  const auto& lp = m.links[link];
  switch (link) {
    case kBackpack: return {{-lp.com_offset, kMaskBackpack}};
    case kLeftThigh: return {{lp.com_offset, kMaskThighL}};
    case kRightThigh: return {{lp.com_offset, kMaskThighR}};
    case kLeftShank: return {{m.links[kLeftThigh].length, kMaskThighL}, {lp.com_offset, kMaskShankL}};
    default: return {{m.links[kRightThigh].length, kMaskThighR}, {lp.com_offset, kMaskShankR}};
  }
}

std::vector<Term> ankle_terms(const ExoModel& m, Side s) {
  return {{m.links[thigh_link(s)].length, thigh_mask(s)}, {m.links[shank_link(s)].length, shank_mask(s)}};
}

std::vector<Term> support_terms(const ExoModel& m, const std::vector<Term>& hip_relative, const SupportModel& sup,
                                Side leg) {
  std::vector<Term> out = hip_relative;
  switch (sup.kind) {
    case Support::LeftStance: append_negated(out, ankle_terms(m, Side::Left)); break;
    case Support::RightStance: append_negated(out, ankle_terms(m, Side::Right)); break;
    case Support::SimplifiedStance: append_negated(out, ankle_terms(m, leg)); break;
    case Support::Flight:
    case Support::SimplifiedSwing: break;
    case Support::DoubleStance: throw ContractError("double stance has no single frame");
  }
  return out;
}

}  // namespace detail

Eigen::Matrix<double, 5, 3> constraint_matrix(const ExoModel& model, const GenCoords& coords, Side swing_side) {
  if (coords.param != Parameterization::Stance5) throw ContractError("constraint_matrix needs Stance5 coordinates");
  const Eigen::Matrix<double, 2, 5> J =
      ankle_jacobian(model, coords, swing_side, SupportModel::stance(other(swing_side)));
  Eigen::JacobiSVD<Eigen::Matrix<double, 2, 5>> svd(J, Eigen::ComputeFullV);
  const auto sv = svd.singularValues();
  if (!(sv(0) > 0.0) || sv(1) <= 1e-9 * sv(0)) throw DegenerateConfiguration("swing ankle Jacobian has rank < 2");
  return svd.matrixV().rightCols<3>();
}

double mechanical_energy(const ExoModel& model, const GenCoords& coords, const SupportModel& support) {
  const auto d = dynamics_terms(model, coords, support);
  double e = 0.5 * coords.qdot.dot(d.M * coords.qdot);
  for (const auto& lk : com_kinematics(model, coords, support)) e += model.links[lk.link].mass * kGravity * lk.com(1);
  return e;
}

}  // namespace exo
