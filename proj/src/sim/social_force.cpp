#include "langmpc/sim/social_force.hpp"

#include <cmath>
#include <stdexcept>

namespace langmpc::sim {
namespace {

/// A exp((r_sum - d) / B) along `away` (unit length).
world::Vec2 repulsion(const world::Vec2& away, double distance, double r_sum, double strength, double range) {
  return strength * std::exp((r_sum - distance) / range) * away;
}

}  // namespace

void SocialForceParams::validate() const {
  for (const double v : {desired_speed, tau, strength, range, wall_strength, wall_range, max_speed, goal_tolerance}) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw std::invalid_argument("social force parameters must be positive and finite");
    }
  }
}

world::Vec2 desired_velocity(const Pedestrian& p, const SocialForceParams& params) {
  const world::Vec2 to_goal = p.goal - p.body.position;
  const double dist = to_goal.norm();
  if (dist < params.goal_tolerance) {
    return world::Vec2::Zero();
  }
  return p.desired_speed * to_goal / dist;
}

world::Vec2 social_force(const std::vector<Pedestrian>& pedestrians, std::size_t i, const world::RobotState& robot,
                         double robot_radius, const std::vector<world::HalfSpace>& walls,
                         const SocialForceParams& params) {
  const Pedestrian& me = pedestrians[i];
  world::Vec2 force = (desired_velocity(me, params) - me.body.velocity) / params.tau;
  for (std::size_t j = 0; j < pedestrians.size(); ++j) {
    if (j == i) {
      continue;
    }
    const world::Vec2 diff = me.body.position - pedestrians[j].body.position;
    const double d = diff.norm();
    if (d > 0.0) {
      force += repulsion(diff / d, d, me.body.radius + pedestrians[j].body.radius, params.strength, params.range);
    }
  }
  const world::Vec2 from_robot = me.body.position - robot.position();
  if (const double d = from_robot.norm(); d > 0.0) {
    force += repulsion(from_robot / d, d, me.body.radius + robot_radius, params.strength, params.range);
  }
  for (const auto& wall : walls) {
    const double d = wall.offset - wall.normal.dot(me.body.position);
    force += repulsion(-wall.normal, d, me.body.radius, params.wall_strength, params.wall_range);
  }
  return force;
}

std::vector<Pedestrian> social_force_step(const std::vector<Pedestrian>& pedestrians, const world::RobotState& robot,
                                          double robot_radius, const std::vector<world::HalfSpace>& walls,
                                          const SocialForceParams& params, double dt) {
  if (!(dt > 0.0)) {
    throw std::invalid_argument("dt must be positive");
  }
  std::vector<Pedestrian> next = pedestrians;
  for (std::size_t i = 0; i < pedestrians.size(); ++i) {
    world::Vec2 v = pedestrians[i].body.velocity + dt * social_force(pedestrians, i, robot, robot_radius, walls, params);
    if (const double speed = v.norm(); speed > params.max_speed) {
      v *= params.max_speed / speed;
    }
    next[i].body.velocity = v;
    next[i].body.position = pedestrians[i].body.position + dt * v;
  }
  return next;
}

std::vector<world::Human> bodies(const std::vector<Pedestrian>& pedestrians) {
  std::vector<world::Human> out;
  out.reserve(pedestrians.size());
  for (const auto& p : pedestrians) {
    out.push_back(p.body);
  }
  return out;
}

}  // namespace langmpc::sim
