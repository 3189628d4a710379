#include "doctest.h"

#include <cmath>
#include <filesystem>

#include "exo/config.hpp"
#include "exo/metrics.hpp"
#include "exo/sim.hpp"

using namespace exo;

namespace {

ExoModel frictionless() {
  ExoModel m = default_model();
  m.friction = {};
  return m;
}

GaitSchedule schedule_for(const ExoModel& m) {
  GaitSchedule s;
  s.total_weight = m.total_weight();
  return s;
}

ScenarioConfig short_scenario(ControllerKind k, double duration) {
  ScenarioConfig c = ScenarioConfig::defaults();
  c.controller = k;
  c.duration = duration;
  return c;
}

}  // namespace

TEST_CASE("human impedance torque") {
  HumanModel h = HumanModel::defaults();
  const double t = 0.7;
  GenCoords c = stance_coords(h.gait.position(t), h.gait.velocity(t));
  CHECK(human_torque(h, c, t).isZero(1e-12));
  h.K.setConstant(100.0);
  c.q(2) -= 0.1;
  const Vector5d tau = human_torque(h, c, t);
  CHECK(tau(2) == doctest::Approx(10.0));
  CHECK(tau(1) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("reference gait: right leg lags half a period and velocity is the derivative") {
  const ReferenceGait g = ReferenceGait::defaults();
  const double t = 0.4;
  const Vector5d q = g.position(t);
  const Vector5d later = g.position(t + 0.5 * g.period);
  CHECK(q(1) == doctest::Approx(later(3)));
  CHECK(q(2) == doctest::Approx(later(4)));
  const double h = 1e-6;
  CHECK(((g.position(t + h) - g.position(t - h)) / (2 * h) - g.velocity(t)).norm() < 1e-6);
}

TEST_CASE("schedule: alpha ramps, states and GRF") {
  GaitSchedule s;
  s.total_weight = 300.0;
  s.gamma = 0.05;
  CHECK(s.at(0.0).alpha == 0.0);
  CHECK(s.at(0.15).alpha == doctest::Approx(0.5));
  CHECK(s.at(0.15).state == GaitState::DoubleStance);
  CHECK(s.at(1.0).state == GaitState::LeftStance);
  CHECK(s.at(1.65).alpha == doctest::Approx(0.5));
  CHECK(s.at(2.5).state == GaitState::RightStance);
  CHECK(s.at(3.15).alpha == doctest::Approx(0.5));
  const Grf g = s.grf(0.15);
  CHECK(g.left(1) + g.right(1) == doctest::Approx(300.0));
  CHECK(g.left(0) == doctest::Approx(0.05 * g.left(1)));
  CHECK(g.right(0) == doctest::Approx(-g.left(0)));
  // continuity over the ramps and agreement with the GRF ratio
  double prev = s.at(0.0).alpha;
  for (int k = 1; k < 6000; ++k) {
    const double t = k * 1e-3;
    const double a = s.at(t).alpha;
    CHECK(std::abs(a - prev) < 0.01);
    CHECK(std::abs(alpha(s.grf(t)) - a) <= 1e-9);
    prev = a;
  }
  s.ds_fraction = 0.6;
  CHECK_THROWS_AS(s.validate(), ContractError);
}

TEST_CASE("plant step at the upright equilibrium") {
  const ExoModel m = frictionless();
  const GaitSchedule s = schedule_for(m);
  PlantState st;
  const InteractionFn none = [](const GenCoords&, double) { return Vector5d::Zero(); };
  for (int k = 0; k < 1000; ++k) st = plant_step(m, st, Vector4d::Zero(), none, s, 1e-3).next;
  CHECK(st.q.cwiseAbs().maxCoeff() <= 1e-9);
  CHECK(st.qdot.cwiseAbs().maxCoeff() <= 1e-9);
  CHECK(st.t == doctest::Approx(1.0));
}

TEST_CASE("plant step: an inverse-dynamics load produces a constant acceleration") {
  const ExoModel m = frictionless();
  const GaitSchedule s = schedule_for(m);
  Vector5d a;
  a << 0.2, -0.5, 0.3, 0.4, -0.1;
  const InteractionFn push = [&](const GenCoords& c, double t) {
    const DynamicsTerms d = support_dynamics(m, c, scheduled_support(s.at(t)));
    return Vector5d(d.M * a + d.b + d.g);
  };
  PlantState st;
  st.q << 0.0, 0.3, -0.4, -0.1, -0.3;
  st.qdot << 0.1, 0.0, -0.2, 0.3, 0.0;
  const Vector5d v0 = st.qdot;
  for (int k = 0; k < 1000; ++k) {
    const PlantStep p = plant_step(m, st, Vector4d::Zero(), push, s, 1e-3);
    CHECK((p.qdd - a).cwiseAbs().maxCoeff() < 1e-9);
    st = p.next;
  }
  CHECK((st.qdot - (v0 + a)).cwiseAbs().maxCoeff() <= 1e-6);
}

TEST_CASE("plant step reports divergence") {
  const ExoModel m = frictionless();
  const GaitSchedule s = schedule_for(m);
  const InteractionFn blow = [](const GenCoords&, double) { return Vector5d::Constant(1e308); };
  CHECK_THROWS_AS(plant_step(m, PlantState{}, Vector4d::Zero(), blow, s, 1e-3), std::runtime_error);
  CHECK_THROWS_AS(plant_step(m, PlantState{}, Vector4d::Zero(), blow, s, 0.0), ContractError);
}

TEST_CASE("logged ground truth satisfies the plant equation of motion") {
  for (ControllerKind k : {ControllerKind::Wecc, ControllerKind::Simplified, ControllerKind::NoDrive}) {
    ScenarioConfig cfg = short_scenario(k, 3.5);
    cfg.mass_mismatch = 0.05;
    const SimLog log = run_scenario(cfg);
    const ExoModel plant = plant_model(cfg);
    REQUIRE(log.samples.size() == 3500);
    double worst = 0.0, worst_alpha = 0.0;
    for (const SimSample& s : log.samples) {
      const GenCoords c = stance_coords(s.q, s.qdot);
      ScheduledPhase ph;
      ph.state = s.state;
      ph.alpha = s.alpha;
      const DynamicsTerms d = support_dynamics(plant, c, scheduled_support(ph));
      const Vector5d r = d.M * s.qdd + d.b + d.g - selection_transpose() * s.tau_joint - s.tau_int;
      worst = std::max(worst, r.cwiseAbs().maxCoeff());
      worst_alpha = std::max(worst_alpha, std::abs(alpha(s.grf) - s.alpha));
    }
    CHECK(worst <= 1e-6);
    CHECK(worst_alpha <= 1e-9);
    if (k == ControllerKind::NoDrive) CHECK(log.samples.back().tau_motor.isZero(0.0));
  }
}

TEST_CASE("control runs at a third of the plant rate") {
  const SimLog log = run_scenario(short_scenario(ControllerKind::Wecc, 0.5));
  CHECK(log.control_dt == doctest::Approx(0.003));
  int changes = 0;
  for (std::size_t i = 1; i < log.samples.size(); ++i) {
    if (log.samples[i].tau_motor != log.samples[i - 1].tau_motor) {
      ++changes;
      CHECK(i % 3 == 0);
    }
  }
  CHECK(changes > 100);
}

TEST_CASE("seeded runs are bit-identical") {
  ScenarioConfig cfg = short_scenario(ControllerKind::Wecc, 1.0);
  cfg.sensor.noise_std = 0.1;
  cfg.seed = 42;
  const std::string a = simlog_to_csv(run_scenario(cfg));
  CHECK(a == simlog_to_csv(run_scenario(cfg)));
  cfg.seed = 43;
  CHECK(a != simlog_to_csv(run_scenario(cfg)));
}

TEST_CASE("WECC walking keeps joint rates below the limit") {
  const SimLog log = run_scenario(short_scenario(ControllerKind::Wecc, 4.0));
  double worst = 0.0;
  for (const SimSample& s : log.samples) worst = std::max(worst, s.qdot.tail<4>().cwiseAbs().maxCoeff());
  CHECK(worst <= 3.0 + 0.01);
}

TEST_CASE("no-drive knee: swing below stance") {
  const SimLog log = run_scenario(short_scenario(ControllerKind::NoDrive, 7.0));
  const MetricReport r = mean_abs_interaction(log, phase_windows(log), 71.6);
  CHECK(r.at(JointKind::Knee, Phase::Swing).mean < r.at(JointKind::Knee, Phase::Stance).mean);
}

TEST_CASE("plant model applies mismatch and the no-drive condition") {
  ScenarioConfig cfg = ScenarioConfig::defaults();
  cfg.mass_mismatch = 0.1;
  cfg.friction_mismatch = -0.5;
  ExoModel p = plant_model(cfg);
  CHECK(p.links[kBackpack].mass == doctest::Approx(1.1 * cfg.model.links[kBackpack].mass));
  CHECK(p.friction.c1(0) == doctest::Approx(0.5 * cfg.model.friction.c1(0)));
  CHECK(p.rotor_inertia == cfg.model.rotor_inertia);
  cfg.controller = ControllerKind::NoDrive;
  p = plant_model(cfg);
  CHECK(p.rotor_inertia == 0.0);
  CHECK(p.friction.c0(0) == doctest::Approx(0.2 * 0.5 * cfg.model.friction.c0(0)));
}

TEST_CASE("scenario validation") {
  ScenarioConfig c = ScenarioConfig::defaults();
  CHECK_NOTHROW(c.validate());
  c.duration = -1.0;
  CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("duration"), ContractError);
  c = ScenarioConfig::defaults();
  c.limits.dt = 0.0025;
  CHECK_THROWS_AS(c.validate(), ContractError);
  c = ScenarioConfig::defaults();
  c.human.gait.period = 2.0;
  CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("period"), ContractError);
  c = ScenarioConfig::defaults();
  c.human.K(1) = -1.0;
  CHECK_THROWS_AS(c.validate(), ContractError);
}

TEST_CASE("simulation log CSV round trip") {
  ScenarioConfig cfg = short_scenario(ControllerKind::Wecc, 0.3);
  cfg.name = "roundtrip";
  const SimLog a = run_scenario(cfg);
  const auto path = std::filesystem::temp_directory_path() / "exo_simlog_roundtrip.csv";
  write_simlog(path.string(), a);
  const SimLog b = read_simlog(path.string());
  std::filesystem::remove(path);
  CHECK(b.scenario == "roundtrip");
  CHECK(b.controller == a.controller);
  CHECK(b.seed == a.seed);
  CHECK(b.exo_mass == a.exo_mass);
  REQUIRE(b.samples.size() == a.samples.size());
  CHECK(simlog_to_csv(b) == simlog_to_csv(a));
  for (std::size_t i = 0; i < a.samples.size(); i += 37) {
    CHECK(b.samples[i].q == a.samples[i].q);
    CHECK(b.samples[i].tau_int == a.samples[i].tau_int);
    CHECK(b.samples[i].state == a.samples[i].state);
    CHECK(b.samples[i].qp_status == a.samples[i].qp_status);
  }
}

TEST_CASE("scenario JSON") {
  SUBCASE("shipped configs load") {
    for (const auto& e : std::filesystem::directory_iterator(EXO_CONFIG_DIR)) {
      if (e.path().extension() != ".json") continue;
      CAPTURE(e.path().string());
      CHECK_NOTHROW(load_scenario_file(e.path().string()));
    }
    const ScenarioConfig g = load_scenario_file(std::string(EXO_CONFIG_DIR) + "/slow_walk_gamma.json");
    CHECK(g.schedule.gamma == 0.05);
    CHECK(g.human.gait.period == doctest::Approx(2.0 * g.schedule.step_period));
  }
  SUBCASE("round trip") {
    ScenarioConfig c = ScenarioConfig::defaults();
    c.name = "x";
    c.controller = ControllerKind::Simplified;
    c.desired = DesiredMode::Haptic;
    c.schedule.gamma = 0.1;
    c.human.K(3) = 123.0;
    c.sensor.noise_std = 0.2;
    c.model.friction.c0(2) = 1.5;
    const ScenarioConfig d = scenario_from_json_text(scenario_to_json_text(c));
    CHECK(scenario_to_json_text(d) == scenario_to_json_text(c));
    CHECK(d.human.K(3) == 123.0);
    CHECK(d.controller == ControllerKind::Simplified);
    CHECK(d.model.friction.c0(2) == 1.5);
  }
  SUBCASE("errors are descriptive") {
    CHECK_THROWS_WITH_AS(scenario_from_json_text(R"({"contoller": "wecc"})"), doctest::Contains("contoller"),
                         ContractError);
    CHECK_THROWS_AS(scenario_from_json_text(R"({"controller": "pid"})"), ContractError);
    CHECK_THROWS_AS(scenario_from_json_text(R"({"duration": "long"})"), ContractError);
    CHECK_THROWS_AS(scenario_from_json_text(R"({"human": {"K": [1, 2]}})"), ContractError);
    CHECK_THROWS_AS(scenario_from_json_text("{not json"), ContractError);
  }
  SUBCASE("model JSON") {
    const ExoModel m = default_model();
    const ExoModel r = model_from_json_text(model_to_json_text(m));
    CHECK(model_to_json_text(r) == model_to_json_text(m));
    CHECK(model_from_json_text(R"({"rotor_inertia": 0.5})").rotor_inertia == 0.5);
    CHECK_THROWS_AS(model_from_json_text(R"({"links": {"head": {}}})"), ContractError);
  }
}
