#include "exo/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace exo {

const char* to_string(Phase p) {
  switch (p) {
    case Phase::Stance: return "stance";
    case Phase::Swing: return "swing";
    case Phase::WholeCycle: return "whole_cycle";
  }
  return "?";
}

const char* to_string(JointKind j) { return j == JointKind::Hip ? "hip" : "knee"; }

std::vector<PhaseWindow> phase_windows(const SimLog& log) {
  const auto& s = log.samples;
  std::vector<PhaseWindow> out;
  for (Side leg : {Side::Left, Side::Right}) {
    std::vector<std::size_t> strikes;
    for (std::size_t i = 1; i < s.size(); ++i)
      if (loaded(s[i].state, leg) && !loaded(s[i - 1].state, leg)) strikes.push_back(i);
    for (std::size_t k = 0; k + 1 < strikes.size(); ++k) {
      const std::size_t a = strikes[k];
      const std::size_t b = strikes[k + 1];
      std::size_t off = a;
      while (off < b && loaded(s[off].state, leg)) ++off;
      out.push_back({leg, Phase::Stance, a, off});
      out.push_back({leg, Phase::Swing, off, b});
      out.push_back({leg, Phase::WholeCycle, a, b});
    }
  }
  if (out.empty()) throw std::runtime_error("log contains no complete gait cycle");
  return out;
}

MetricReport mean_abs_interaction(const SimLog& log, const std::vector<PhaseWindow>& windows, double body_mass,
                                  const std::vector<Vector5d>* desired) {
  if (!(body_mass > 0.0)) throw ContractError("body mass must be positive");
  if (desired && desired->size() != log.samples.size()) throw ContractError("desired series length mismatch");
  std::array<std::array<std::vector<double>, 3>, 2> values;
  for (const PhaseWindow& w : windows) {
    if (w.size() == 0) throw std::runtime_error("empty phase window");
    if (w.end > log.samples.size()) throw ContractError("phase window outside the log");
    const int h = hip_index(w.leg);
    for (int j = 0; j < 2; ++j) {
      double sum = 0.0;
      for (std::size_t i = w.start; i < w.end; ++i) {
        const double des = desired ? (*desired)[i](h + j) : log.samples[i].tau_des(h + j);
        sum += std::abs(log.samples[i].tau_int(h + j) - des);
      }
      values[j][static_cast<int>(w.phase)].push_back(sum / double(w.size()) / body_mass);
    }
  }
  MetricReport r;
  r.label = std::string(to_string(log.controller)) + "/" + to_string(log.desired);
  r.body_mass = body_mass;
  for (int j = 0; j < 2; ++j)
    for (int p = 0; p < 3; ++p) {
      const auto& v = values[j][p];
      MetricCell& c = r.cells[j][p];
      c.windows = static_cast<int>(v.size());
      if (v.empty()) continue;
      double m = 0.0;
      for (double x : v) m += x;
      m /= double(v.size());
      double ss = 0.0;
      for (double x : v) ss += (x - m) * (x - m);
      c.mean = m;
      c.std = v.size() > 1 ? std::sqrt(ss / double(v.size() - 1)) : 0.0;
    }
  return r;
}

void print_report(std::ostream& os, const MetricReport& r) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "condition %s, body mass %.1f kg, mean |tau_int - tau_int*| [N*m/kg]\n",
                r.label.c_str(), r.body_mass);
  os << buf;
  std::snprintf(buf, sizeof buf, "%-6s %-12s %10s %10s %8s\n", "joint", "phase", "mean", "std", "windows");
  os << buf;
  for (JointKind j : {JointKind::Hip, JointKind::Knee})
    for (Phase p : {Phase::WholeCycle, Phase::Stance, Phase::Swing}) {
      const MetricCell& c = r.at(j, p);
      std::snprintf(buf, sizeof buf, "%-6s %-12s %10.4f %10.4f %8d\n", to_string(j), to_string(p), c.mean, c.std,
                    c.windows);
      os << buf;
    }
}

void print_report_csv(std::ostream& os, const MetricReport& r) {
  char buf[200];
  os << "condition,joint,phase,mean,std,windows\n";
  for (JointKind j : {JointKind::Hip, JointKind::Knee})
    for (Phase p : {Phase::WholeCycle, Phase::Stance, Phase::Swing}) {
      const MetricCell& c = r.at(j, p);
      std::snprintf(buf, sizeof buf, "%s,%s,%s,%.17g,%.17g,%d\n", r.label.c_str(), to_string(j), to_string(p),
                    c.mean, c.std, c.windows);
      os << buf;
    }
}

GammaComparison compare_gamma_zero(const SimLog& log, const ExoModel& model) {
  GammaComparison out;
  for (const SimSample& s : log.samples) {
    if (s.state != GaitState::DoubleStance || !(s.alpha > 0.0 && s.alpha < 1.0)) continue;
    const GenCoords c = stance_coords(s.q, s.qdot, s.t);
    const DsSolution with = estimate_double_stance(model, c, s.tau_sensor, s.alpha, s.gamma);
    const DsSolution zero = estimate_double_stance(model, c, s.tau_sensor, s.alpha, 0.0);
    out.mean_abs_diff += (with.tau_int - zero.tau_int).cwiseAbs();
    ++out.samples;
  }
  if (out.samples == 0) throw std::runtime_error("log contains no double stance samples");
  out.mean_abs_diff /= double(out.samples);
  return out;
}

}  // namespace exo
