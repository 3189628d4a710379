#include "exo/config.hpp"

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace exo {

using nlohmann::json;

namespace {

const char* kLinkNames[5] = {"backpack", "left_thigh", "left_shank", "right_thigh", "right_shank"};

std::string read_text(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

json parse(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ContractError(what + ": " + e.what());
  }
}

void expect_keys(const json& j, const std::string& where, std::initializer_list<const char*> keys) {
  if (!j.is_object()) throw ContractError(where + " must be an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : keys) ok = ok || it.key() == k;
    if (!ok) throw ContractError("unknown key '" + it.key() + "' in " + where);
  }
}

double num(const json& j, const std::string& where) {
  if (!j.is_number()) throw ContractError(where + " must be a number");
  return j.get<double>();
}

void get(const json& j, const char* key, double& out, const std::string& where) {
  if (j.contains(key)) out = num(j.at(key), where + "." + key);
}

template <int N>
void get(const json& j, const char* key, Eigen::Matrix<double, N, 1>& out, const std::string& where,
         double scale = 1.0) {
  if (!j.contains(key)) return;
  const json& a = j.at(key);
  const std::string w = where + "." + key;
  if (!a.is_array() || a.size() != N) throw ContractError(w + " must be an array of " + std::to_string(N) + " numbers");
  for (int i = 0; i < N; ++i) out(i) = num(a[static_cast<std::size_t>(i)], w) * scale;
}

std::string get_string(const json& j, const char* key, const std::string& def, const std::string& where) {
  if (!j.contains(key)) return def;
  if (!j.at(key).is_string()) throw ContractError(where + "." + key + " must be a string");
  return j.at(key).get<std::string>();
}

void apply_model(const json& j, ExoModel& m) {
  expect_keys(j, "model", {"links", "rotor_inertia", "friction"});
  if (j.contains("links")) {
    const json& l = j.at("links");
    expect_keys(l, "model.links", {kLinkNames[0], kLinkNames[1], kLinkNames[2], kLinkNames[3], kLinkNames[4]});
    for (int i = 0; i < 5; ++i) {
      if (!l.contains(kLinkNames[i])) continue;
      const json& p = l.at(kLinkNames[i]);
      const std::string w = std::string("model.links.") + kLinkNames[i];
      expect_keys(p, w, {"mass", "com_inertia", "com_offset", "length"});
      get(p, "mass", m.links[i].mass, w);
      get(p, "com_inertia", m.links[i].com_inertia, w);
      get(p, "com_offset", m.links[i].com_offset, w);
      get(p, "length", m.links[i].length, w);
    }
  }
  get(j, "rotor_inertia", m.rotor_inertia, "model");
  if (j.contains("friction")) {
    const json& f = j.at("friction");
    expect_keys(f, "model.friction", {"c0", "c1"});
    get(f, "c0", m.friction.c0, "model.friction");
    get(f, "c1", m.friction.c1, "model.friction");
  }
  validate(m);
}

json vec(const auto& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

json model_json(const ExoModel& m) {
  json links;
  for (int i = 0; i < 5; ++i)
    links[kLinkNames[i]] = {{"mass", m.links[i].mass},
                            {"com_inertia", m.links[i].com_inertia},
                            {"com_offset", m.links[i].com_offset},
                            {"length", m.links[i].length}};
  return {{"links", links},
          {"rotor_inertia", m.rotor_inertia},
          {"friction", {{"c0", vec(m.friction.c0)}, {"c1", vec(m.friction.c1)}}}};
}

void apply_series(const json& j, FourierSeries& s, const std::string& where) {
  expect_keys(j, where, {"mean", "a", "b"});
  get(j, "mean", s.mean, where);
  for (const char* key : {"a", "b"}) {
    if (!j.contains(key)) continue;
    const json& arr = j.at(key);
    if (!arr.is_array()) throw ContractError(where + "." + key + " must be an array");
    std::vector<double>& dst = key[0] == 'a' ? s.a : s.b;
    dst.clear();
    for (const json& v : arr) dst.push_back(num(v, where + "." + key));
  }
}

json series_json(const FourierSeries& s) { return {{"mean", s.mean}, {"a", s.a}, {"b", s.b}}; }

}  // namespace

ExoModel model_from_json_text(const std::string& text) {
  ExoModel m = default_model();
  apply_model(parse(text, "model"), m);
  return m;
}

std::string model_to_json_text(const ExoModel& m) { return model_json(m).dump(2) + "\n"; }

ExoModel load_model_file(const std::string& path) { return model_from_json_text(read_text(path)); }

ScenarioConfig scenario_from_json_text(const std::string& text, const std::string& base_dir) {
  const json j = parse(text, "scenario");
  expect_keys(j, "scenario", {"name", "controller", "desired", "duration", "plant_dt", "seed", "model", "mismatch",
                              "nodrive_friction_scale", "schedule", "human", "haptic", "virtual_mass", "limits",
                              "sensor", "qp"});
  ScenarioConfig c = ScenarioConfig::defaults();
  c.name = get_string(j, "name", c.name, "scenario");
  c.controller = controller_from_string(get_string(j, "controller", to_string(c.controller), "scenario"));
  c.desired = desired_mode_from_string(get_string(j, "desired", to_string(c.desired), "scenario"));
  get(j, "duration", c.duration, "scenario");
  get(j, "plant_dt", c.plant_dt, "scenario");
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_unsigned()) throw ContractError("scenario.seed must be a nonnegative integer");
    c.seed = j.at("seed").get<std::uint64_t>();
  }
  if (j.contains("model")) {
    const json& m = j.at("model");
    if (m.is_string()) {
      const std::filesystem::path p = std::filesystem::path(base_dir) / m.get<std::string>();
      c.model = load_model_file(p.string());
    } else {
      apply_model(m, c.model);
    }
  }
  if (j.contains("mismatch")) {
    const json& m = j.at("mismatch");
    expect_keys(m, "mismatch", {"mass", "friction"});
    get(m, "mass", c.mass_mismatch, "mismatch");
    get(m, "friction", c.friction_mismatch, "mismatch");
  }
  get(j, "nodrive_friction_scale", c.nodrive_friction_scale, "scenario");
  if (j.contains("schedule")) {
    const json& s = j.at("schedule");
    expect_keys(s, "schedule", {"step_period", "ds_fraction", "gamma", "human_share"});
    get(s, "step_period", c.schedule.step_period, "schedule");
    get(s, "ds_fraction", c.schedule.ds_fraction, "schedule");
    get(s, "gamma", c.schedule.gamma, "schedule");
    get(s, "human_share", c.schedule.human_share, "schedule");
  }
  if (j.contains("human")) {
    const json& h = j.at("human");
    expect_keys(h, "human", {"K", "C", "gait"});
    get(h, "K", c.human.K, "human");
    get(h, "C", c.human.C, "human");
    if (h.contains("gait")) {
      const json& g = h.at("gait");
      expect_keys(g, "human.gait", {"backpack", "hip", "knee"});
      if (g.contains("backpack")) apply_series(g.at("backpack"), c.human.gait.backpack, "human.gait.backpack");
      if (g.contains("hip")) apply_series(g.at("hip"), c.human.gait.hip, "human.gait.hip");
      if (g.contains("knee")) apply_series(g.at("knee"), c.human.gait.knee, "human.gait.knee");
    }
  }
  c.human.gait.period = c.schedule.stride();
  if (j.contains("haptic")) {
    const json& h = j.at("haptic");
    expect_keys(h, "haptic", {"k_stance", "c_stance", "k_swing", "c_swing", "q_star_deg", "cutoff_hz"});
    get(h, "k_stance", c.haptic.k_stance, "haptic");
    get(h, "c_stance", c.haptic.c_stance, "haptic");
    get(h, "k_swing", c.haptic.k_swing, "haptic");
    get(h, "c_swing", c.haptic.c_swing, "haptic");
    get(h, "q_star_deg", c.haptic.q_star, "haptic", std::numbers::pi / 180.0);
    get(h, "cutoff_hz", c.haptic.cutoff_hz, "haptic");
  }
  if (j.contains("virtual_mass")) {
    const json& v = j.at("virtual_mass");
    expect_keys(v, "virtual_mass", {"single_stance", "double_stance"});
    get(v, "single_stance", c.virtual_mass.single_stance, "virtual_mass");
    get(v, "double_stance", c.virtual_mass.double_stance, "virtual_mass");
  }
  if (j.contains("limits")) {
    const json& l = j.at("limits");
    expect_keys(l, "limits", {"tau_max", "p_max", "qdot_max", "dt", "eps_vel"});
    get(l, "tau_max", c.limits.tau_max, "limits");
    get(l, "p_max", c.limits.p_max, "limits");
    get(l, "qdot_max", c.limits.qdot_max, "limits");
    get(l, "dt", c.limits.dt, "limits");
    get(l, "eps_vel", c.limits.eps_vel, "limits");
  }
  if (j.contains("sensor")) {
    const json& s = j.at("sensor");
    expect_keys(s, "sensor", {"cutoff_hz", "noise_std", "link_side"});
    get(s, "cutoff_hz", c.sensor.cutoff_hz, "sensor");
    get(s, "noise_std", c.sensor.noise_std, "sensor");
    if (s.contains("link_side")) {
      if (!s.at("link_side").is_boolean()) throw ContractError("sensor.link_side must be a boolean");
      c.sensor.link_side = s.at("link_side").get<bool>();
    }
  }
  if (j.contains("qp")) {
    const json& q = j.at("qp");
    expect_keys(q, "qp", {"rho", "sigma", "relaxation", "tol", "max_iter", "check_interval", "eq_rho_scale",
                          "infeasibility_tol", "polish"});
    get(q, "rho", c.qp.rho, "qp");
    get(q, "sigma", c.qp.sigma, "qp");
    get(q, "relaxation", c.qp.relaxation, "qp");
    get(q, "tol", c.qp.tol, "qp");
    get(q, "eq_rho_scale", c.qp.eq_rho_scale, "qp");
    get(q, "infeasibility_tol", c.qp.infeasibility_tol, "qp");
    for (const char* key : {"max_iter", "check_interval"}) {
      if (!q.contains(key)) continue;
      if (!q.at(key).is_number_integer() || q.at(key).get<int>() < 1)
        throw ContractError(std::string("qp.") + key + " must be a positive integer");
      (key[0] == 'm' ? c.qp.max_iter : c.qp.check_interval) = q.at(key).get<int>();
    }
    if (q.contains("polish")) {
      if (!q.at("polish").is_boolean()) throw ContractError("qp.polish must be a boolean");
      c.qp.polish = q.at("polish").get<bool>();
    }
  }
  c.validate();
  return c;
}

std::string scenario_to_json_text(const ScenarioConfig& c) {
  const double deg = 180.0 / std::numbers::pi;
  json j;
  j["name"] = c.name;
  j["controller"] = to_string(c.controller);
  j["desired"] = to_string(c.desired);
  j["duration"] = c.duration;
  j["plant_dt"] = c.plant_dt;
  j["seed"] = c.seed;
  j["model"] = model_json(c.model);
  j["mismatch"] = {{"mass", c.mass_mismatch}, {"friction", c.friction_mismatch}};
  j["nodrive_friction_scale"] = c.nodrive_friction_scale;
  j["schedule"] = {{"step_period", c.schedule.step_period},
                   {"ds_fraction", c.schedule.ds_fraction},
                   {"gamma", c.schedule.gamma},
                   {"human_share", c.schedule.human_share}};
  j["human"] = {{"K", vec(c.human.K)},
                {"C", vec(c.human.C)},
                {"gait",
                 {{"backpack", series_json(c.human.gait.backpack)},
                  {"hip", series_json(c.human.gait.hip)},
                  {"knee", series_json(c.human.gait.knee)}}}};
  j["haptic"] = {{"k_stance", vec(c.haptic.k_stance)}, {"c_stance", vec(c.haptic.c_stance)},
                 {"k_swing", vec(c.haptic.k_swing)},   {"c_swing", vec(c.haptic.c_swing)},
                 {"q_star_deg", vec(Vector5d(c.haptic.q_star * deg))}, {"cutoff_hz", c.haptic.cutoff_hz}};
  j["virtual_mass"] = {{"single_stance", vec(c.virtual_mass.single_stance)},
                       {"double_stance", vec(c.virtual_mass.double_stance)}};
  j["limits"] = {{"tau_max", c.limits.tau_max}, {"p_max", c.limits.p_max}, {"qdot_max", c.limits.qdot_max},
                 {"dt", c.limits.dt},           {"eps_vel", c.limits.eps_vel}};
  j["sensor"] = {{"cutoff_hz", c.sensor.cutoff_hz}, {"noise_std", c.sensor.noise_std},
                 {"link_side", c.sensor.link_side}};
  j["qp"] = {{"rho", c.qp.rho},
             {"sigma", c.qp.sigma},
             {"relaxation", c.qp.relaxation},
             {"tol", c.qp.tol},
             {"max_iter", c.qp.max_iter},
             {"check_interval", c.qp.check_interval},
             {"eq_rho_scale", c.qp.eq_rho_scale},
             {"infeasibility_tol", c.qp.infeasibility_tol},
             {"polish", c.qp.polish}};
  return j.dump(2) + "\n";
}

ScenarioConfig load_scenario_file(const std::string& path) {
  const std::string base = std::filesystem::path(path).parent_path().string();
  return scenario_from_json_text(read_text(path), base.empty() ? "." : base);
}

}  // namespace exo
