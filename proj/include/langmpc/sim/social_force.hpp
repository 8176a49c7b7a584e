#ifndef LANGMPC_SIM_SOCIAL_FORCE_HPP_
#define LANGMPC_SIM_SOCIAL_FORCE_HPP_

#include "langmpc/world/types.hpp"

#include <vector>

namespace langmpc::sim {

struct SocialForceParams {
  double desired_speed{1.3};  // [m/s], used when a pedestrian has none of its own
  double tau{0.5};            // relaxation time [s]
  double strength{2.0};       // A [m/s^2]
  double range{0.3};          // B [m]
  double wall_strength{2.0};  // [m/s^2]
  double wall_range{0.3};     // [m]
  double max_speed{1.8};      // [m/s]
  double goal_tolerance{0.3};  // [m], a pedestrian this close to its goal stops

  /// Throws std::invalid_argument unless every value is positive.
  void validate() const;
};

struct Pedestrian {
  world::Human body;
  world::Vec2 goal{world::Vec2::Zero()};
  double desired_speed{1.3};
};

/// Velocity a pedestrian steers toward: along the goal direction, zero once
/// within the goal tolerance.
world::Vec2 desired_velocity(const Pedestrian& p, const SocialForceParams& params);

/**
 * Acceleration of pedestrian `i`: relaxation toward the desired velocity
 * plus A exp((r_sum - d) / B) repulsion along the separation from every other
 * pedestrian and the robot, and the same law against each wall half-space
 * with the pedestrian radius as r_sum.
 */
world::Vec2 social_force(const std::vector<Pedestrian>& pedestrians, std::size_t i, const world::RobotState& robot,
                         double robot_radius, const std::vector<world::HalfSpace>& walls,
                         const SocialForceParams& params);

/// Symplectic Euler: velocities from all forces (evaluated at the old
/// state), clamped to max_speed, then positions from the new velocities.
std::vector<Pedestrian> social_force_step(const std::vector<Pedestrian>& pedestrians, const world::RobotState& robot,
                                          double robot_radius, const std::vector<world::HalfSpace>& walls,
                                          const SocialForceParams& params, double dt);

std::vector<world::Human> bodies(const std::vector<Pedestrian>& pedestrians);

}  // namespace langmpc::sim

#endif  // LANGMPC_SIM_SOCIAL_FORCE_HPP_
