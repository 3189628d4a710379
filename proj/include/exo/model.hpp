#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace exo {

inline constexpr double kGravity = 9.81;

class ContractError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class DegenerateConfiguration : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Vector2d = Eigen::Vector2d;
using Vector4d = Eigen::Vector4d;
using Vector5d = Eigen::Matrix<double, 5, 1>;
using Matrix5d = Eigen::Matrix<double, 5, 5>;

enum class Side { Left, Right };

inline Side other(Side s) { return s == Side::Left ? Side::Right : Side::Left; }
inline const char* to_string(Side s) { return s == Side::Left ? "left" : "right"; }

/// Index of the hip coordinate of a leg in the Stance5 ordering
/// [backpack, L-hip, L-knee, R-hip, R-knee]. The knee follows at +1.
inline int hip_index(Side s) { return s == Side::Left ? 1 : 3; }

enum class Parameterization { Stance5, Flight7, Leg2 };

inline int dimension(Parameterization p) {
  switch (p) {
    case Parameterization::Stance5: return 5;
    case Parameterization::Flight7: return 7;
    case Parameterization::Leg2: return 2;
  }
  return 0;
}

struct LinkParams {
  double mass = 0.0;
  double com_inertia = 0.0;  // about the CoM, sagittal axis
  double com_offset = 0.0;   // from the proximal joint along the link
  double length = 0.0;
};

/// Storage order of the five rigid bodies.
enum Link : int { kBackpack = 0, kLeftThigh = 1, kLeftShank = 2, kRightThigh = 3, kRightShank = 4 };

inline int thigh_link(Side s) { return s == Side::Left ? kLeftThigh : kRightThigh; }
inline int shank_link(Side s) { return s == Side::Left ? kLeftShank : kRightShank; }

/// Coulomb (c0) and viscous (c1) coefficients, joint order [L-hip, L-knee, R-hip, R-knee].
struct FrictionParams {
  Vector4d c0 = Vector4d::Zero();
  Vector4d c1 = Vector4d::Zero();
};

struct ExoModel {
  std::array<LinkParams, 5> links{};
  double rotor_inertia = 0.0;  // apparent, per actuated joint
  FrictionParams friction;

  double total_mass() const {
    double m = 0.0;
    for (const auto& l : links) m += l.mass;
    return m;
  }
  double total_weight() const { return total_mass() * kGravity; }
};

/// A point mass that is rigidly merged into a link, offset measured from the proximal joint.
struct BodyPart {
  std::string name;
  double mass = 0.0;
  double com_inertia = 0.0;
  double offset = 0.0;
};

/// Merge parts into one rigid link (parallel-axis theorem about the composite CoM).
LinkParams compose_link(double length, const std::vector<BodyPart>& parts);

/// Table-valued defaults: masses/inertias and friction from the identified X2 values,
/// link lengths and CoM offsets are engineering estimates (see README).
ExoModel default_model();

/// Rotor inertia removed and friction scaled, for the passive no-drive condition.
ExoModel no_drive_model(const ExoModel& m, double friction_scale);

/// Checks LinkParams and rotor invariants; throws ContractError.
void validate(const ExoModel& m);

template <typename Scalar>
struct GenCoordsT {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  Parameterization param = Parameterization::Stance5;
  Vector q;
  Vector qdot;
  // Leg2 only: absolute pitch of the frame the leg chain hangs from, and which leg.
  Scalar base_pitch = Scalar(0);
  Side leg = Side::Left;
  double t = 0.0;
};
using GenCoords = GenCoordsT<double>;

GenCoords stance_coords(const Vector5d& q, const Vector5d& qdot, double t = 0.0);
GenCoords flight_coords(const Eigen::Matrix<double, 7, 1>& q, const Eigen::Matrix<double, 7, 1>& qdot,
                        double t = 0.0);
/// Two-coordinate (hip, knee) slice of a Stance5 configuration.
GenCoords leg_slice(const GenCoords& stance5, Side leg);

enum class Support { LeftStance, RightStance, DoubleStance, Flight, SimplifiedStance, SimplifiedSwing };

struct SupportModel {
  Support kind = Support::LeftStance;
  double alpha = 1.0;  // DoubleStance only

  static SupportModel left_stance() { return {Support::LeftStance, 1.0}; }
  static SupportModel right_stance() { return {Support::RightStance, 0.0}; }
  static SupportModel double_stance(double a) { return {Support::DoubleStance, a}; }
  static SupportModel flight() { return {Support::Flight, 0.0}; }
  static SupportModel simplified_stance() { return {Support::SimplifiedStance, 1.0}; }
  static SupportModel simplified_swing() { return {Support::SimplifiedSwing, 0.0}; }
  static SupportModel stance(Side s) { return s == Side::Left ? left_stance() : right_stance(); }
};

template <typename Scalar>
struct PointKinematicsT {
  Eigen::Matrix<Scalar, 2, 1> position;
  Eigen::Matrix<Scalar, 2, Eigen::Dynamic> J;    // d position / d q
  Eigen::Matrix<Scalar, 2, 1> Jdot_qdot;         // analytic
};

template <typename Scalar>
struct LinkKinematicsT {
  int link = 0;
  Eigen::Matrix<Scalar, 2, 1> com;
  Eigen::Matrix<Scalar, 2, Eigen::Dynamic> JS;
  Eigen::Matrix<Scalar, 1, Eigen::Dynamic> JR;
  Eigen::Matrix<Scalar, 2, 1> JSdot_qdot;
};

template <typename Scalar>
struct DynamicsTermsT {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  Matrix M;
  Vector b;
  Vector g;
  int n() const { return static_cast<int>(b.size()); }
};
using DynamicsTerms = DynamicsTermsT<double>;
using LinkKinematics = LinkKinematicsT<double>;
using PointKinematics = PointKinematicsT<double>;

namespace detail {

// A planar point is a sum of terms coef * e(phi), e(phi) = (sin phi, -cos phi), where phi is
// the sum of a subset of the five absolute-angle slots theta0..theta4. Link directions point
// from the proximal to the distal joint, so a zero angle hangs straight down.
struct Term {
  double coef;
  unsigned mask;  // bit k set: theta_k contributes to phi
};

constexpr unsigned kMaskBackpack = 0b00001;
constexpr unsigned kMaskThighL = 0b00011;
constexpr unsigned kMaskShankL = 0b00111;
constexpr unsigned kMaskThighR = 0b01001;
constexpr unsigned kMaskShankR = 0b11001;

inline unsigned thigh_mask(Side s) { return s == Side::Left ? kMaskThighL : kMaskThighR; }
inline unsigned shank_mask(Side s) { return s == Side::Left ? kMaskShankL : kMaskShankR; }

inline unsigned link_mask(int link) {
  switch (link) {
    case kBackpack: return kMaskBackpack;
    case kLeftThigh: return kMaskThighL;
    case kLeftShank: return kMaskShankL;
    case kRightThigh: return kMaskThighR;
    default: return kMaskShankR;
  }
}

// Hip-relative terms.
std::vector<Term> link_com_terms(const ExoModel& m, int link);
std::vector<Term> ankle_terms(const ExoModel& m, Side s);

inline void append_negated(std::vector<Term>& out, const std::vector<Term>& in) {
  for (const auto& t : in) out.push_back({-t.coef, t.mask});
}

// Where each angle slot lives in the coordinate vector (-1: constant).
template <typename Scalar>
struct SlotMap {
  std::array<int, 5> index{};
  std::array<Scalar, 5> constant{};
  bool floating = false;
  int n = 5;
  std::array<bool, 5> present{};  // slot belongs to the modeled chain
};

template <typename Scalar>
SlotMap<Scalar> slot_map(const GenCoordsT<Scalar>& c) {
  SlotMap<Scalar> s;
  s.n = dimension(c.param);
  for (int k = 0; k < 5; ++k) {
    s.constant[k] = Scalar(0);
    s.present[k] = true;
  }
  switch (c.param) {
    case Parameterization::Stance5:
      for (int k = 0; k < 5; ++k) s.index[k] = k;
      break;
    case Parameterization::Flight7:
      for (int k = 0; k < 5; ++k) s.index[k] = k + 2;
      s.floating = true;
      break;
    case Parameterization::Leg2: {
      for (int k = 0; k < 5; ++k) {
        s.index[k] = -1;
        s.present[k] = false;
      }
      s.constant[0] = c.base_pitch;
      const int h = hip_index(c.leg);
      s.index[h] = 0;
      s.index[h + 1] = 1;
      s.present[h] = s.present[h + 1] = true;
      break;
    }
  }
  return s;
}

template <typename Scalar>
PointKinematicsT<Scalar> eval_terms(const std::vector<Term>& terms, const GenCoordsT<Scalar>& c,
                                    const SlotMap<Scalar>& sm) {
  using std::cos;
  using std::sin;
  PointKinematicsT<Scalar> pk;
  pk.position.setZero();
  pk.J = Eigen::Matrix<Scalar, 2, Eigen::Dynamic>::Zero(2, sm.n);
  pk.Jdot_qdot.setZero();
  if (sm.floating) {
    pk.position(0) = c.q(0);
    pk.position(1) = c.q(1);
    pk.J(0, 0) = Scalar(1);
    pk.J(1, 1) = Scalar(1);
  }
  for (const auto& t : terms) {
    Scalar phi(0);
    Scalar rate(0);
    for (int k = 0; k < 5; ++k) {
      if (!(t.mask & (1u << k))) continue;
      const int idx = sm.index[k];
      if (idx >= 0) {
        phi += c.q(idx);
        rate += c.qdot(idx);
      } else {
        phi += sm.constant[k];
      }
    }
    const Scalar s = sin(phi);
    const Scalar co = cos(phi);
    const Scalar coef(t.coef);
    pk.position(0) += coef * s;
    pk.position(1) -= coef * co;
    for (int k = 0; k < 5; ++k) {
      if (!(t.mask & (1u << k))) continue;
      const int idx = sm.index[k];
      if (idx < 0) continue;
      pk.J(0, idx) += coef * co;
      pk.J(1, idx) += coef * s;
    }
    // d/dt (J qdot) with qdot held: -coef * e(phi) * rate^2
    pk.Jdot_qdot(0) -= coef * s * rate * rate;
    pk.Jdot_qdot(1) += coef * co * rate * rate;
  }
  return pk;
}

template <typename Scalar>
void check_coords(const GenCoordsT<Scalar>& c, const SupportModel& sup) {
  const int n = dimension(c.param);
  if (c.q.size() != n || c.qdot.size() != n)
    throw ContractError("coordinate vector size does not match its parameterization");
  for (int i = 0; i < n; ++i) {
    using std::isfinite;
    if (!isfinite(static_cast<double>(c.q(i))) || !isfinite(static_cast<double>(c.qdot(i))))
      throw ContractError("non-finite generalized coordinates");
  }
  bool ok = false;
  switch (sup.kind) {
    case Support::LeftStance:
    case Support::RightStance:
    case Support::DoubleStance: ok = c.param == Parameterization::Stance5; break;
    case Support::Flight: ok = c.param == Parameterization::Flight7; break;
    case Support::SimplifiedStance:
    case Support::SimplifiedSwing: ok = c.param == Parameterization::Leg2; break;
  }
  if (!ok) throw ContractError("coordinates inconsistent with support model");
}

// Terms of a point, expressed in the frame of the given support.
std::vector<Term> support_terms(const ExoModel& m, const std::vector<Term>& hip_relative,
                                const SupportModel& sup, Side leg);

inline std::vector<int> modeled_links(Parameterization p, Side leg) {
  if (p == Parameterization::Leg2) return {thigh_link(leg), shank_link(leg)};
  return {kBackpack, kLeftThigh, kLeftShank, kRightThigh, kRightShank};
}

inline std::vector<int> actuated_indices(Parameterization p) {
  switch (p) {
    case Parameterization::Stance5: return {1, 2, 3, 4};
    case Parameterization::Flight7: return {3, 4, 5, 6};
    case Parameterization::Leg2: return {0, 1};
  }
  return {};
}

}  // namespace detail

/// Per-link CoM positions with translational (2xn) and rotational (1xn) Jacobians.
/// Jdot*qdot is analytic: every point is a sum of rotating unit vectors.
template <typename Scalar>
std::vector<LinkKinematicsT<Scalar>> com_kinematics(const ExoModel& model, const GenCoordsT<Scalar>& coords,
                                                    const SupportModel& support) {
  if (support.kind == Support::DoubleStance)
    throw ContractError("double stance has no single kinematic frame; use left or right stance");
  detail::check_coords(coords, support);
  const auto sm = detail::slot_map(coords);
  std::vector<LinkKinematicsT<Scalar>> out;
  for (int link : detail::modeled_links(coords.param, coords.leg)) {
    const auto terms = detail::support_terms(model, detail::link_com_terms(model, link), support, coords.leg);
    const auto pk = detail::eval_terms(terms, coords, sm);
    LinkKinematicsT<Scalar> lk;
    lk.link = link;
    lk.com = pk.position;
    lk.JS = pk.J;
    lk.JSdot_qdot = pk.Jdot_qdot;
    lk.JR = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>::Zero(1, sm.n);
    const unsigned mask = detail::link_mask(link);
    for (int k = 0; k < 5; ++k)
      if ((mask & (1u << k)) && sm.index[k] >= 0) lk.JR(0, sm.index[k]) = Scalar(1);
    out.push_back(std::move(lk));
  }
  return out;
}

/// M, b, g for a single support model. g is the gradient of the potential energy (gravity
/// along -y), so the equation of motion reads M qdd + b + g = S^T tau_joint + tau_int.
template <typename Scalar>
DynamicsTermsT<Scalar> dynamics_terms(const ExoModel& model, const GenCoordsT<Scalar>& coords,
                                      const SupportModel& support) {
  if (support.kind == Support::DoubleStance)
    throw ContractError("double stance dynamics come from interpolate_ds");
  const auto kin = com_kinematics(model, coords, support);
  const int n = dimension(coords.param);
  DynamicsTermsT<Scalar> d;
  d.M = DynamicsTermsT<Scalar>::Matrix::Zero(n, n);
  d.b = DynamicsTermsT<Scalar>::Vector::Zero(n);
  d.g = DynamicsTermsT<Scalar>::Vector::Zero(n);
  for (const auto& lk : kin) {
    const auto& lp = model.links[lk.link];
    const Scalar m(lp.mass);
    const Scalar I(lp.com_inertia);
    d.M.noalias() += m * lk.JS.transpose() * lk.JS;
    d.M.noalias() += I * lk.JR.transpose() * lk.JR;
    d.b.noalias() += m * lk.JS.transpose() * lk.JSdot_qdot;
    d.g.noalias() += (m * Scalar(kGravity)) * lk.JS.row(1).transpose();
  }
  for (int i : detail::actuated_indices(coords.param)) d.M(i, i) += Scalar(model.rotor_inertia);
  // exact symmetry
  d.M = (Scalar(0.5) * (d.M + d.M.transpose())).eval();
  return d;
}

/// Convex blend alpha * ls + (1 - alpha) * rs.
template <typename Scalar>
DynamicsTermsT<Scalar> interpolate_ds(const DynamicsTermsT<Scalar>& ls, const DynamicsTermsT<Scalar>& rs,
                                      double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ContractError("interpolation factor outside [0, 1]");
  if (ls.n() != 5 || rs.n() != 5) throw ContractError("double stance interpolation needs 5-dim terms");
  if (alpha == 1.0) return ls;
  if (alpha == 0.0) return rs;
  const Scalar a(alpha);
  const Scalar ia(1.0 - alpha);
  DynamicsTermsT<Scalar> d;
  d.M = a * ls.M + ia * rs.M;
  d.b = a * ls.b + ia * rs.b;
  d.g = a * ls.g + ia * rs.g;
  return d;
}

/// Dynamics for any support, interpolating in double stance.
template <typename Scalar>
DynamicsTermsT<Scalar> support_dynamics(const ExoModel& model, const GenCoordsT<Scalar>& coords,
                                        const SupportModel& support) {
  if (support.kind != Support::DoubleStance) return dynamics_terms(model, coords, support);
  return interpolate_ds(dynamics_terms(model, coords, SupportModel::left_stance()),
                        dynamics_terms(model, coords, SupportModel::right_stance()), support.alpha);
}

/// Ankle position, Jacobian and Jdot*qdot in the frame of the support model.
template <typename Scalar>
PointKinematicsT<Scalar> ankle_kinematics(const ExoModel& model, const GenCoordsT<Scalar>& coords, Side side,
                                          const SupportModel& support) {
  if (support.kind == Support::DoubleStance)
    throw ContractError("ankle kinematics need a single support frame");
  detail::check_coords(coords, support);
  if (coords.param == Parameterization::Leg2 && side != coords.leg)
    throw ContractError("leg slice does not contain the requested ankle");
  const auto sm = detail::slot_map(coords);
  const bool pinned = (support.kind == Support::LeftStance && side == Side::Left) ||
                      (support.kind == Support::RightStance && side == Side::Right) ||
                      support.kind == Support::SimplifiedStance;
  if (pinned) {
    PointKinematicsT<Scalar> pk;
    pk.position.setZero();
    pk.J = Eigen::Matrix<Scalar, 2, Eigen::Dynamic>::Zero(2, sm.n);
    pk.Jdot_qdot.setZero();
    return pk;
  }
  const auto terms = detail::support_terms(model, detail::ankle_terms(model, side), support, coords.leg);
  return detail::eval_terms(terms, coords, sm);
}

template <typename Scalar>
Eigen::Matrix<Scalar, 2, Eigen::Dynamic> ankle_jacobian(const ExoModel& model, const GenCoordsT<Scalar>& coords,
                                                        Side side, const SupportModel& support) {
  return ankle_kinematics(model, coords, side, support).J;
}

/// Orthonormal basis (5x3) of the null space of the swing ankle Jacobian in the stance frame
/// of the other leg. Throws DegenerateConfiguration when that Jacobian has rank < 2.
Eigen::Matrix<double, 5, 3> constraint_matrix(const ExoModel& model, const GenCoords& coords, Side swing_side);

/// Kinetic plus potential energy for a single support model.
double mechanical_energy(const ExoModel& model, const GenCoords& coords, const SupportModel& support);

/// Rows of the stance leg (hip, knee) in Stance5 ordering.
inline std::array<int, 2> leg_rows(Side s) { return {hip_index(s), hip_index(s) + 1}; }

}  // namespace exo
