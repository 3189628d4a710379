#pragma once

#include <limits>

#include "exo/model.hpp"

namespace exo {

/// Ground reaction forces per foot as (Fx, Fy).
struct Grf {
  Vector2d left = Vector2d::Zero();
  Vector2d right = Vector2d::Zero();
};

enum class GaitState { LeftStance, RightStance, DoubleStance, Flight };

const char* to_string(GaitState s);
GaitState gait_state_from_string(const std::string& s);

/// True when the foot of `leg` carries load in state `s`.
inline bool loaded(GaitState s, Side leg) {
  if (s == GaitState::DoubleStance) return true;
  if (s == GaitState::LeftStance) return leg == Side::Left;
  if (s == GaitState::RightStance) return leg == Side::Right;
  return false;
}

inline constexpr double kDebounce = 0.150;
inline constexpr double kGammaEpsilon = 1.0;         // N
inline constexpr double kForceLimitFraction = 0.03;  // of total vertical force

struct GaitContext {
  GaitState state = GaitState::DoubleStance;
  double alpha = 0.5;
  double gamma = 0.0;
  bool gamma_fallback = false;
  double last_transition = -std::numeric_limits<double>::infinity();
};

struct GammaResult {
  double value = 0.0;
  bool fallback = false;
};

/// F_l,y / (F_l,y + F_r,y) clamped to [0, 1]. Throws when both vertical forces vanish.
double alpha(const Grf& grf);

/// F_l,x / F_l,y, or 0 with the fallback flag when F_l,y <= eps.
GammaResult gamma(const Grf& grf, double eps = kGammaEpsilon);

/// fraction * (F_l,y + F_r,y).
double default_force_limit(const Grf& grf, double fraction = kForceLimitFraction);

/// One step of the four-state machine, with transitions at least kDebounce apart.
GaitContext update(const GaitContext& ctx, const Grf& grf, double f_lim, double now);

}  // namespace exo
