#include "exo/gait.hpp"

#include <algorithm>

namespace exo {

const char* to_string(GaitState s) {
  switch (s) {
    case GaitState::LeftStance: return "LS";
    case GaitState::RightStance: return "RS";
    case GaitState::DoubleStance: return "DS";
    case GaitState::Flight: return "FL";
  }
  return "?";
}

GaitState gait_state_from_string(const std::string& s) {
  if (s == "LS") return GaitState::LeftStance;
  if (s == "RS") return GaitState::RightStance;
  if (s == "DS") return GaitState::DoubleStance;
  if (s == "FL") return GaitState::Flight;
  throw ContractError("unknown gait state '" + s + "'");
}

double alpha(const Grf& grf) {
  const double fl = grf.left(1);
  const double fr = grf.right(1);
  const double sum = fl + fr;
  if (!(sum > 0.0)) throw ContractError("alpha undefined: no vertical load");
  return std::clamp(fl / sum, 0.0, 1.0);
}

GammaResult gamma(const Grf& grf, double eps) {
  if (!(grf.left(1) > eps)) return {0.0, true};
  return {grf.left(0) / grf.left(1), false};
}

double default_force_limit(const Grf& grf, double fraction) {
  return fraction * std::max(0.0, grf.left(1) + grf.right(1));
}

namespace {

GaitState next_state(GaitState s, bool l, bool r) {
  if (!l && !r) return GaitState::Flight;
  switch (s) {
    case GaitState::LeftStance: return r ? GaitState::DoubleStance : s;
    case GaitState::RightStance: return l ? GaitState::DoubleStance : s;
    case GaitState::DoubleStance:
      if (!r) return GaitState::LeftStance;
      if (!l) return GaitState::RightStance;
      return s;
    case GaitState::Flight: return l ? GaitState::LeftStance : GaitState::RightStance;
  }
  return s;
}

}  // namespace

GaitContext update(const GaitContext& ctx, const Grf& grf, double f_lim, double now) {
  if (f_lim < 0.0) throw ContractError("force threshold must be nonnegative");
  if (now < ctx.last_transition) throw ContractError("time runs backwards");
  GaitContext out = ctx;
  const bool l = grf.left(1) >= f_lim && grf.left(1) > 0.0;
  const bool r = grf.right(1) >= f_lim && grf.right(1) > 0.0;
  const GaitState want = next_state(ctx.state, l, r);
  if (want != ctx.state && now - ctx.last_transition >= kDebounce) {
    out.state = want;
    out.last_transition = now;
  }
  switch (out.state) {
    case GaitState::LeftStance: out.alpha = 1.0; break;
    case GaitState::RightStance: out.alpha = 0.0; break;
    case GaitState::DoubleStance:
      if (grf.left(1) + grf.right(1) > 0.0) out.alpha = alpha(grf);
      break;
    case GaitState::Flight: break;
  }
  const GammaResult g = gamma(grf);
  out.gamma = g.value;
  out.gamma_fallback = g.fallback;
  return out;
}

}  // namespace exo
