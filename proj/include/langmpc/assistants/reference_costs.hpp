#ifndef LANGMPC_ASSISTANTS_REFERENCE_COSTS_HPP_
#define LANGMPC_ASSISTANTS_REFERENCE_COSTS_HPP_

#include "langmpc/dsl/cost_spec.hpp"

#include <string_view>
#include <vector>

namespace langmpc::assistants {

// DSL sources of the non-library terms used by the reference costs.
inline constexpr std::string_view kHumanFollowSource = "(oh_x - px)^2 + (oh_y - py)^2";
inline constexpr std::string_view kHumanMaxSource = "1 / ((oh_x - px)^2 + (oh_y - py)^2 + eps)";
// Active only inside d_safe; squared distances keep the gradient finite at
// zero separation.
inline constexpr std::string_view kSafeDistanceSource =
    "if_else((oh_x - px)^2 + (oh_y - py)^2 - d_safe^2, 0, ((oh_x - px)^2 + (oh_y - py)^2 - d_safe^2)^2)";

/**
 * Named reference costs with unit weights: "path" (contour, lag), "goal",
 * "human_follow", "human_max", "safe_distance" (goal plus a d_safe guard),
 * each with the velocity, accel and omega terms. `params` must hold the
 * default parameters; d_safe is added when needed. Throws
 * std::invalid_argument for an unknown name.
 */
dsl::CostSpec reference_cost(std::string_view name, dsl::ParameterSet params, double d_safe = 1.0);
std::vector<std::string_view> reference_cost_names();

}  // namespace langmpc::assistants

#endif  // LANGMPC_ASSISTANTS_REFERENCE_COSTS_HPP_
