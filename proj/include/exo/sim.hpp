#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "exo/control.hpp"

namespace exo {

enum class ControllerKind { Wecc, Simplified, NoDrive };
enum class DesiredMode { Transparency, Haptic };

const char* to_string(ControllerKind k);
const char* to_string(DesiredMode m);
ControllerKind controller_from_string(const std::string& s);
DesiredMode desired_mode_from_string(const std::string& s);

/// mean + sum_k (a_k cos(k w t) + b_k sin(k w t)), harmonics from k = 1.
struct FourierSeries {
  double mean = 0.0;
  std::vector<double> a;
  std::vector<double> b;

  double value(double omega, double t) const;
  double rate(double omega, double t) const;
};

/// Periodic human joint reference. The series describe the left leg; the right leg is the same
/// series delayed by half a period.
struct ReferenceGait {
  double period = 3.0;
  FourierSeries backpack, hip, knee;

  static ReferenceGait defaults();
  Vector5d position(double t) const;
  Vector5d velocity(double t) const;
};

/// Joint-space impedance of the wearer toward the reference gait.
struct HumanModel {
  Vector5d K = Vector5d::Zero();
  Vector5d C = Vector5d::Zero();
  ReferenceGait gait;

  static HumanModel defaults();
  void validate() const;
};

/// K (q_ref(t) - q) + C (qdot_ref(t) - qdot): ground-truth interaction torque.
Vector5d human_torque(const HumanModel& h, const GenCoords& coords, double t);

struct ScheduledPhase {
  GaitState state = GaitState::DoubleStance;
  double alpha = 0.5;
  double gamma = 0.0;
};

/// Walking schedule. A stride is two steps; a left heel strike opens each stride with a double
/// stance whose alpha rises from 0 to 1 along a half cosine. The middle of a double stance
/// (0 < alpha < 1) is DoubleStance; alpha = 1 and alpha = 0 are left and right stance.
struct GaitSchedule {
  double step_period = 1.5;
  double ds_fraction = 0.2;   // of a step
  double gamma = 0.0;         // F_lx / F_ly
  double human_share = 0.0;   // N added to the vertical load
  double total_weight = 0.0;  // exo weight, N; set from the model when zero

  double stride() const { return 2.0 * step_period; }
  ScheduledPhase at(double t) const;
  Grf grf(double t) const;
  void validate() const;
};

struct PlantState {
  Vector5d q = Vector5d::Zero();
  Vector5d qdot = Vector5d::Zero();
  double t = 0.0;
};

using InteractionFn = std::function<Vector5d(const GenCoords&, double)>;

SupportModel scheduled_support(const ScheduledPhase& p);

/// qdd = M^-1 (S^T tau_joint + tau_int - b - g).
Vector5d forward_dynamics(const ExoModel& plant, const GenCoords& coords, const Vector4d& tau_joint,
                          const Vector5d& tau_int, const SupportModel& support);

/// Values at the start of the step, plus the RK4 successor state.
struct PlantStep {
  PlantState next;
  ScheduledPhase phase;
  Grf grf;
  Vector5d qdd = Vector5d::Zero();
  Vector5d tau_int = Vector5d::Zero();
  Vector4d tau_joint = Vector4d::Zero();
};

/// One RK4 step with tau_joint = tau_motor - friction(qdot) of the plant model. Throws
/// std::runtime_error when the state becomes non-finite.
PlantStep plant_step(const ExoModel& plant, const PlantState& state, const Vector4d& tau_motor,
                     const InteractionFn& tau_int, const GaitSchedule& schedule, double dt);

/// Link-side joint torque sensor: reads tau_joint minus the rotor inertia torque, with
/// optional first-order low-pass and Gaussian noise.
struct SensorModel {
  double cutoff_hz = 0.0;  // 0: unfiltered
  double noise_std = 0.0;  // N*m
  bool link_side = true;
};

struct ScenarioConfig {
  std::string name = "scenario";
  ControllerKind controller = ControllerKind::Wecc;
  DesiredMode desired = DesiredMode::Transparency;
  double duration = 60.0;
  double plant_dt = 0.001;
  std::uint64_t seed = 1;
  ExoModel model;                 // controller model
  double mass_mismatch = 0.0;     // plant masses and inertias scaled by (1 + x)
  double friction_mismatch = 0.0; // plant friction scaled by (1 + x)
  double nodrive_friction_scale = 0.2;
  GaitSchedule schedule;
  HumanModel human;
  HapticParams haptic;
  VirtualMass virtual_mass;
  Limits limits;
  SensorModel sensor;
  QpSettings qp;

  static ScenarioConfig defaults();
  void validate() const;  // throws ContractError with a description
  int control_ratio() const;
};

/// The model the plant integrates for a configuration (mismatch and no-drive applied).
ExoModel plant_model(const ScenarioConfig& cfg);

struct SimSample {
  double t = 0.0;
  GaitState state = GaitState::DoubleStance;       // scheduled
  GaitState ctrl_state = GaitState::DoubleStance;  // controller's detection
  GaitState shadow_state = GaitState::DoubleStance;
  double alpha = 0.0;
  double gamma = 0.0;
  Vector5d q = Vector5d::Zero();
  Vector5d qdot = Vector5d::Zero();
  Vector5d qdd = Vector5d::Zero();
  Vector4d tau_motor = Vector4d::Zero();
  Vector4d tau_joint = Vector4d::Zero();
  Vector4d tau_sensor = Vector4d::Zero();
  Vector5d tau_int = Vector5d::Zero();  // ground truth
  Vector5d tau_est = Vector5d::Zero();
  Vector5d tau_des = Vector5d::Zero();
  Grf grf;
  int qp_status = -1;  // QpStatus, -1 without a QP
  int qp_iterations = 0;
  bool fallback = false;
};

struct SimLog {
  std::string scenario;
  ControllerKind controller = ControllerKind::Wecc;
  DesiredMode desired = DesiredMode::Transparency;
  std::uint64_t seed = 0;
  double plant_dt = 0.001;
  double control_dt = 0.003;
  double exo_mass = 0.0;
  std::vector<SimSample> samples;
};

SimLog run_scenario(const ScenarioConfig& cfg);

std::string simlog_to_csv(const SimLog& log);
void write_simlog(const std::string& path, const SimLog& log);
SimLog read_simlog(const std::string& path);

}  // namespace exo
