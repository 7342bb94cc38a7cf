#include "evmc/run_record.hpp"

#include <json.hpp>

namespace evmc {

std::string RunRecord::to_json_line() const {
  nlohmann::json j{{"step", step},          {"energy", energy_mean},
                   {"energy_var", energy_var}, {"accept", acceptance},
                   {"loss", loss},          {"dtheta_norm", dtheta_norm},
                   {"wall_ms", wall_ms}};
  return j.dump();
}

RunRecord RunRecord::from_json_line(const std::string& line) {
  auto j = nlohmann::json::parse(line);
  RunRecord r;
  r.step = j.at("step").get<int>();
  r.energy_mean = j.at("energy").get<std::vector<double>>();
  r.energy_var = j.at("energy_var").get<std::vector<double>>();
  r.acceptance = j.at("accept").get<std::vector<double>>();
  r.loss = j.at("loss").get<double>();
  r.dtheta_norm = j.at("dtheta_norm").get<double>();
  r.wall_ms = j.at("wall_ms").get<double>();
  return r;
}

}  // namespace evmc
