#include "langmpc/world/dynamics.hpp"

#include <cmath>
#include <numbers>

namespace langmpc::world {

double normalize_angle(double angle) {
  constexpr double kPi = std::numbers::pi;
  if (angle > -kPi && angle <= kPi) {
    return angle;
  }
  double wrapped = std::remainder(angle, 2.0 * kPi);  // [-pi, pi]
  if (wrapped <= -kPi) {
    wrapped += 2.0 * kPi;
  }
  return wrapped;
}

RobotState unicycle_step(const RobotState& state, const ControlInput& input, double dt) {
  RobotState next;
  next.x = state.x + dt * state.v * std::cos(state.theta);
  next.y = state.y + dt * state.v * std::sin(state.theta);
  next.theta = normalize_angle(state.theta + dt * input.omega);
  next.v = state.v + dt * input.a;
  return next;
}

std::vector<HumanPrediction> predict_humans(const std::vector<Human>& humans, int horizon,
                                            double dt) {
  std::vector<HumanPrediction> out;
  out.reserve(humans.size());
  for (const auto& h : humans) {
    HumanPrediction pred;
    pred.id = h.id;
    pred.positions.reserve(static_cast<std::size_t>(horizon) + 1);
    for (int k = 0; k <= horizon; ++k) {
      pred.positions.push_back(h.position + (static_cast<double>(k) * dt) * h.velocity);
    }
    out.push_back(std::move(pred));
  }
  return out;
}

}  // namespace langmpc::world
