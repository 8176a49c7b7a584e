#ifndef LANGMPC_MPC_CONFIG_HPP_
#define LANGMPC_MPC_CONFIG_HPP_

#include <nlohmann/json_fwd.hpp>

#include <stdexcept>

namespace langmpc::mpc {

class InvalidConfig : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct MpcConfig {
  int horizon{30};  // N_k
  double dt{0.1};   // [s]
  double a_min{-3.0};
  double a_max{3.0};
  double omega_min{-1.5};
  double omega_max{1.5};
  double v_max{2.5};
  double tol_g{1e-3};
  int max_iterations{120};
  // Quadratic penalty schedule: mu starts at mu_init and is multiplied by
  // mu_growth until the plan is feasible or mu_max is reached.
  double mu_init{10.0};
  double mu_growth{10.0};
  double mu_max{1e5};
  // Escalate early when still infeasible after this many steps at one mu.
  int iterations_per_mu{20};
  // Tightening applied to every constraint inside the penalty so that the
  // penalized optimum lands strictly inside the feasible set.
  double constraint_margin{0.02};
  // Relative projected-gradient tolerance for declaring a seed converged.
  double tol_opt{1e-4};
  int seeds{3};  // K
  bool parallel{true};
  bool sigmoid_if_else{false};

  /// Throws InvalidConfig.
  void validate() const;
};

void to_json(nlohmann::json& doc, const MpcConfig& config);
/// Overrides only the keys present in `doc`; unknown keys are rejected.
void apply_overrides(MpcConfig& config, const nlohmann::json& doc);

}  // namespace langmpc::mpc

#endif  // LANGMPC_MPC_CONFIG_HPP_
