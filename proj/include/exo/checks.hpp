#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "exo/model.hpp"
#include "exo/random.hpp"

namespace exo {

struct CheckResult {
  std::string name;
  bool pass = false;
  double value = 0.0;      // worst observed error
  double tolerance = 0.0;
  std::string detail;
};

/// Random walking-like posture and rates in Stance5 ordering.
GenCoords random_stance_coords(UniformSource& u, double rate_scale = 2.0);

/// Invariant suite for the `check` command; `samples` random configurations per identity.
std::vector<CheckResult> run_invariant_checks(std::uint64_t seed, int samples = 200);

}  // namespace exo
