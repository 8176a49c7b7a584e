#ifndef LANGMPC_WORLD_DYNAMICS_HPP_
#define LANGMPC_WORLD_DYNAMICS_HPP_

#include "langmpc/world/types.hpp"

namespace langmpc::world {

/// Wraps an angle into (-pi, pi].
double normalize_angle(double angle);

/**
 * Explicit Euler step of the unicycle
 *   x' = v cos(theta), y' = v sin(theta), theta' = omega, v' = a.
 * Total: inputs are expected to be clamped by the caller.
 */
RobotState unicycle_step(const RobotState& state, const ControlInput& input, double dt);

/// Constant-velocity extrapolation over stages 0..horizon, order preserved.
std::vector<HumanPrediction> predict_humans(const std::vector<Human>& humans, int horizon,
                                            double dt);

}  // namespace langmpc::world

#endif  // LANGMPC_WORLD_DYNAMICS_HPP_
