#pragma once

// Exhaustive two-wave, same-address hazard scenarios checked against a
// reference that aborts the later wave on any true dependence and replays
// everything in serial order.

#include <string>
#include <vector>

#include "twc/wave_memory.hpp"

namespace twc::testing {

struct HazardScenario {
  std::vector<OpKind> early;  // chain of the earlier wave
  std::vector<OpKind> late;   // chain of the later wave
  std::vector<int> order;     // 0 = next op of the earlier wave, 1 = of the later one
  Word initial = 7;

  std::string describe() const;
};

std::vector<HazardScenario> enumerate_hazard_scenarios(std::size_t max_ops = 3);

struct ScenarioCheck {
  bool ok = true;
  std::string detail;  // first mismatch
};

ScenarioCheck check_hazard_scenario(const HazardScenario& s);

}  // namespace twc::testing
