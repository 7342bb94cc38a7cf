#pragma once

#include <string>
#include <vector>

namespace evmc {

/// Per-step training telemetry, persisted as one JSON line per step.
struct RunRecord {
  int step = 0;
  std::vector<double> energy_mean;  // per system, Re<E_L>
  std::vector<double> energy_var;   // per system, Var(E_L)
  std::vector<double> acceptance;   // per system
  double loss = 0.0;                // ensemble-averaged energy
  double dtheta_norm = 0.0;
  double wall_ms = 0.0;

  std::string to_json_line() const;
  static RunRecord from_json_line(const std::string& line);
};

}  // namespace evmc
