#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "exo/csv.hpp"
#include "exo/sim.hpp"

namespace exo {

namespace {

void add(std::string& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, ",%.17g", v);
  out += buf;
}

template <int N>
void add(std::string& out, const Eigen::Matrix<double, N, 1>& v) {
  for (int i = 0; i < N; ++i) add(out, v(i));
}

std::string header() {
  std::string h = "t,state,ctrl_state,shadow_state,alpha,gamma";
  for (const char* p : {"q", "qd", "qdd"})
    for (int i = 0; i < 5; ++i) h += "," + std::string(p) + std::to_string(i);
  for (const char* p : {"tau_motor", "tau_joint", "tau_sensor"})
    for (int i = 1; i <= 4; ++i) h += "," + std::string(p) + std::to_string(i);
  for (const char* p : {"tau_int", "tau_est", "tau_des"})
    for (int i = 0; i < 5; ++i) h += "," + std::string(p) + std::to_string(i);
  h += ",grf_lx,grf_ly,grf_rx,grf_ry,qp_status,qp_iter,fallback";
  return h;
}

}  // namespace

std::string simlog_to_csv(const SimLog& log) {
  std::string out;
  out.reserve(log.samples.size() * 1100 + 512);
  char buf[512];
  out += "# exo-simlog v1\n";
  std::snprintf(buf, sizeof buf,
                "# scenario=%s; controller=%s; desired=%s; seed=%llu; plant_dt=%.17g; control_dt=%.17g; "
                "exo_mass=%.17g\n",
                log.scenario.c_str(), to_string(log.controller), to_string(log.desired),
                static_cast<unsigned long long>(log.seed), log.plant_dt, log.control_dt, log.exo_mass);
  out += buf;
  out += "# units: t s; angles rad; rates rad/s, rad/s^2; torques N*m; grf N; states LS RS DS FL\n";
  out += header();
  out += '\n';
  for (const SimSample& s : log.samples) {
    std::snprintf(buf, sizeof buf, "%.17g,%s,%s,%s", s.t, to_string(s.state), to_string(s.ctrl_state),
                  to_string(s.shadow_state));
    out += buf;
    add(out, s.alpha);
    add(out, s.gamma);
    add(out, s.q);
    add(out, s.qdot);
    add(out, s.qdd);
    add(out, s.tau_motor);
    add(out, s.tau_joint);
    add(out, s.tau_sensor);
    add(out, s.tau_int);
    add(out, s.tau_est);
    add(out, s.tau_des);
    add(out, s.grf.left(0));
    add(out, s.grf.left(1));
    add(out, s.grf.right(0));
    add(out, s.grf.right(1));
    std::snprintf(buf, sizeof buf, ",%d,%d,%d\n", s.qp_status, s.qp_iterations, s.fallback ? 1 : 0);
    out += buf;
  }
  return out;
}

void write_simlog(const std::string& path, const SimLog& log) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path);
  const std::string s = simlog_to_csv(log);
  f.write(s.data(), static_cast<std::streamsize>(s.size()));
  if (!f) throw std::runtime_error("failed writing " + path);
}

SimLog read_simlog(const std::string& path) {
  const csv::Table t = csv::read(path);
  if (t.comments.empty() || t.comments.front().find("exo-simlog v1") == std::string::npos)
    throw std::runtime_error(path + ": not an exo-simlog v1 file");
  SimLog log;
  for (const std::string& c : t.comments) {
    std::stringstream ss(c);
    std::string item;
    while (std::getline(ss, item, ';')) {
      const auto eq = item.find('=');
      if (eq == std::string::npos) continue;
      auto trim = [](std::string v) {
        const auto a = v.find_first_not_of(' ');
        const auto b = v.find_last_not_of(' ');
        return a == std::string::npos ? std::string() : v.substr(a, b - a + 1);
      };
      const std::string key = trim(item.substr(0, eq));
      const std::string val = trim(item.substr(eq + 1));
      if (key == "scenario") log.scenario = val;
      else if (key == "controller") log.controller = controller_from_string(val);
      else if (key == "desired") log.desired = desired_mode_from_string(val);
      else if (key == "seed") log.seed = std::stoull(val);
      else if (key == "plant_dt") log.plant_dt = csv::to_double(val);
      else if (key == "control_dt") log.control_dt = csv::to_double(val);
      else if (key == "exo_mass") log.exo_mass = csv::to_double(val);
    }
  }
  const std::string h = header();
  const std::vector<std::string> expected = csv::split(h);
  if (t.header != expected) throw std::runtime_error(path + ": unexpected simlog columns");

  log.samples.reserve(t.rows.size());
  for (const auto& r : t.rows) {
    SimSample s;
    std::size_t i = 0;
    auto num = [&]() { return csv::to_double(r[i++]); };
    auto vec5 = [&]() {
      Vector5d v;
      for (int k = 0; k < 5; ++k) v(k) = num();
      return v;
    };
    auto vec4 = [&]() {
      Vector4d v;
      for (int k = 0; k < 4; ++k) v(k) = num();
      return v;
    };
    s.t = num();
    s.state = gait_state_from_string(r[i++]);
    s.ctrl_state = gait_state_from_string(r[i++]);
    s.shadow_state = gait_state_from_string(r[i++]);
    s.alpha = num();
    s.gamma = num();
    s.q = vec5();
    s.qdot = vec5();
    s.qdd = vec5();
    s.tau_motor = vec4();
    s.tau_joint = vec4();
    s.tau_sensor = vec4();
    s.tau_int = vec5();
    s.tau_est = vec5();
    s.tau_des = vec5();
    s.grf.left(0) = num();
    s.grf.left(1) = num();
    s.grf.right(0) = num();
    s.grf.right(1) = num();
    s.qp_status = static_cast<int>(num());
    s.qp_iterations = static_cast<int>(num());
    s.fallback = num() != 0.0;
    log.samples.push_back(s);
  }
  return log;
}

}  // namespace exo
