#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include "exo/sim.hpp"

namespace exo {

enum class Phase { Stance, Swing, WholeCycle };
const char* to_string(Phase p);

/// Sample range [start, end) of one leg's phase within a gait cycle.
struct PhaseWindow {
  Side leg = Side::Left;
  Phase phase = Phase::WholeCycle;
  std::size_t start = 0;
  std::size_t end = 0;
  std::size_t size() const { return end - start; }
};

/// Cycles between consecutive heel strikes (entry into the leg's loaded state) of each leg,
/// split into stance (loaded) and swing. Throws when the log has no complete cycle.
std::vector<PhaseWindow> phase_windows(const SimLog& log);

enum class JointKind { Hip, Knee };
const char* to_string(JointKind j);

struct MetricCell {
  double mean = 0.0;  // N*m/kg
  double std = 0.0;   // sample standard deviation across windows
  int windows = 0;
};

struct MetricReport {
  std::string label;
  double body_mass = 0.0;
  std::array<std::array<MetricCell, 3>, 2> cells{};  // [hip, knee] x [stance, swing, whole]

  const MetricCell& at(JointKind j, Phase p) const { return cells[static_cast<int>(j)][static_cast<int>(p)]; }
};

/// Per window mean |tau_int - tau_int*| / body_mass over the window, pooled over both legs,
/// then mean and standard deviation across windows. `desired` defaults to the logged target.
MetricReport mean_abs_interaction(const SimLog& log, const std::vector<PhaseWindow>& windows, double body_mass,
                                  const std::vector<Vector5d>* desired = nullptr);

void print_report(std::ostream& os, const MetricReport& r);
void print_report_csv(std::ostream& os, const MetricReport& r);

struct GammaComparison {
  Vector5d mean_abs_diff = Vector5d::Zero();  // per generalized coordinate, N*m
  std::size_t samples = 0;
};

/// Re-estimates every double stance sample (0 < alpha < 1) with gamma = 0 and with the
/// logged gamma, from the logged sensor torques.
GammaComparison compare_gamma_zero(const SimLog& log, const ExoModel& model);

}  // namespace exo
