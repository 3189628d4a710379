#pragma once

#include "exo/model.hpp"

namespace exo {

enum class EstimatorKind { WholeBody, Simplified };

struct InteractionTorque {
  Eigen::VectorXd values;  // 5 (whole body) or 2 (hip, knee)
  EstimatorKind source = EstimatorKind::WholeBody;
};

enum class LegPhase { Stance, Swing };

/// S^T maps the four joint torques into the five Stance5 rows (backpack row unactuated).
Eigen::Matrix<double, 5, 4> selection_transpose();

/// tau_int = -S^T tau_joint + b + g for the stance model of `stance_side`; inertial terms are
/// neglected.
InteractionTorque estimate_single_stance(const ExoModel& model, const GenCoords& coords, const Vector4d& tau_joint,
                                         Side stance_side);

/// K xi = m with xi = [F_rx, F_ry, F_lx, F_ly, tau_int(5)].
struct DsSystem {
  Eigen::Matrix<double, 12, 9> K;
  Eigen::Matrix<double, 12, 1> m;
};

DsSystem build_ds_system(const ExoModel& model, const GenCoords& coords, const Vector4d& tau_joint, double alpha,
                         double gamma);

struct DsSolution {
  Vector5d tau_int = Vector5d::Zero();
  Vector2d f_left = Vector2d::Zero();
  Vector2d f_right = Vector2d::Zero();
  double residual_norm = 0.0;
  bool negative_load = false;  // some Fy below -1 N
};

DsSolution estimate_double_stance(const ExoModel& model, const GenCoords& coords, const Vector4d& tau_joint,
                                  double alpha, double gamma);

/// Per-leg double-pendulum estimate tau_int = tau + b + g. `tau_sensor` uses the strain-gauge
/// sign convention, which is the negative of the joint torque in the whole-body equations.
InteractionTorque estimate_simplified(const ExoModel& model, const GenCoords& leg_coords, const Vector2d& tau_sensor,
                                      LegPhase phase);

/// Same estimate with the leg dynamics blended by `stance_weight` (double stance).
InteractionTorque estimate_simplified(const ExoModel& model, const GenCoords& leg_coords, const Vector2d& tau_sensor,
                                      double stance_weight);

/// Simplified leg dynamics blended as w * stance + (1 - w) * swing; w in {0, 1} selects one model.
DynamicsTerms simplified_terms(const ExoModel& model, const GenCoords& leg_coords, double stance_weight);

}  // namespace exo
