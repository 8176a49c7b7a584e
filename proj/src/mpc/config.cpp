#include "langmpc/mpc/config.hpp"

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <cmath>

namespace langmpc::mpc {

void MpcConfig::validate() const {
  if (horizon < 5) throw InvalidConfig(fmt::format("horizon must be >= 5, got {}", horizon));
  if (!(dt > 0.0)) throw InvalidConfig("dt must be positive");
  if (!(a_min < a_max) || !(omega_min < omega_max)) throw InvalidConfig("input bounds must be ordered");
  if (!(a_min <= 0.0 && a_max >= 0.0 && omega_min <= 0.0 && omega_max >= 0.0)) {
    throw InvalidConfig("input bounds must contain zero");
  }
  if (!(v_max > 0.0)) throw InvalidConfig("v_max must be positive");
  if (!(tol_g > 0.0)) throw InvalidConfig("tol_g must be positive");
  if (iterations_per_mu < 1) throw InvalidConfig("iterations_per_mu must be >= 1");
  if (max_iterations < 1) throw InvalidConfig("max_iterations must be >= 1");
  if (!(mu_init > 0.0) || !(mu_growth > 1.0) || !(mu_max >= mu_init)) throw InvalidConfig("bad penalty schedule");
  if (!(constraint_margin >= 0.0) || !(tol_opt > 0.0)) throw InvalidConfig("tolerances must be positive");
  if (seeds < 1) throw InvalidConfig("seed count must be >= 1");
}

void to_json(nlohmann::json& doc, const MpcConfig& c) {
  doc = {{"horizon", c.horizon},
         {"dt", c.dt},
         {"a_min", c.a_min},
         {"a_max", c.a_max},
         {"omega_min", c.omega_min},
         {"omega_max", c.omega_max},
         {"v_max", c.v_max},
         {"tol_g", c.tol_g},
         {"max_iterations", c.max_iterations},
         {"mu_init", c.mu_init},
         {"mu_growth", c.mu_growth},
         {"mu_max", c.mu_max},
         {"iterations_per_mu", c.iterations_per_mu},
         {"constraint_margin", c.constraint_margin},
         {"tol_opt", c.tol_opt},
         {"seeds", c.seeds},
         {"parallel", c.parallel},
         {"sigmoid_if_else", c.sigmoid_if_else}};
}

void apply_overrides(MpcConfig& config, const nlohmann::json& doc) {
  if (!doc.is_object()) throw InvalidConfig("mpc overrides must be an object");
  MpcConfig out = config;
  for (const auto& [key, value] : doc.items()) {
    try {
      if (key == "horizon") out.horizon = value.get<int>();
      else if (key == "dt") out.dt = value.get<double>();
      else if (key == "a_min") out.a_min = value.get<double>();
      else if (key == "a_max") out.a_max = value.get<double>();
      else if (key == "omega_min") out.omega_min = value.get<double>();
      else if (key == "omega_max") out.omega_max = value.get<double>();
      else if (key == "v_max") out.v_max = value.get<double>();
      else if (key == "tol_g") out.tol_g = value.get<double>();
      else if (key == "max_iterations") out.max_iterations = value.get<int>();
      else if (key == "mu_init") out.mu_init = value.get<double>();
      else if (key == "mu_growth") out.mu_growth = value.get<double>();
      else if (key == "mu_max") out.mu_max = value.get<double>();
      else if (key == "iterations_per_mu") out.iterations_per_mu = value.get<int>();
      else if (key == "constraint_margin") out.constraint_margin = value.get<double>();
      else if (key == "tol_opt") out.tol_opt = value.get<double>();
      else if (key == "seeds") out.seeds = value.get<int>();
      else if (key == "parallel") out.parallel = value.get<bool>();
      else if (key == "sigmoid_if_else") out.sigmoid_if_else = value.get<bool>();
      else throw InvalidConfig(fmt::format("unknown mpc option '{}'", key));
    } catch (const nlohmann::json::exception& e) {
      throw InvalidConfig(fmt::format("mpc option '{}': {}", key, e.what()));
    }
  }
  out.validate();
  config = out;
}

}  // namespace langmpc::mpc
