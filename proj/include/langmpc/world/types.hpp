#ifndef LANGMPC_WORLD_TYPES_HPP_
#define LANGMPC_WORLD_TYPES_HPP_

#include <Eigen/Core>

#include <stdexcept>
#include <string>
#include <vector>

namespace langmpc::world {

using Vec2 = Eigen::Vector2d;

/// Second-order unicycle state.
struct RobotState {
  double x{0.0};      // [m]
  double y{0.0};      // [m]
  double theta{0.0};  // [rad], kept in (-pi, pi]
  double v{0.0};      // [m/s]

  Vec2 position() const { return {x, y}; }
};

struct ControlInput {
  double a{0.0};      // [m/s^2]
  double omega{0.0};  // [rad/s]
};

struct Human {
  int id{0};
  Vec2 position{Vec2::Zero()};
  Vec2 velocity{Vec2::Zero()};
  double radius{0.3};
};

/// Linear constraint n . p <= b on the robot position.
struct HalfSpace {
  Vec2 normal{Vec2::UnitY()};  // unit length
  double offset{0.0};
};

struct CorridorSet {
  std::string name;
  std::vector<HalfSpace> faces;
};

struct Workspace {
  double x_min{0.0};
  double x_max{0.0};
  double y_min{0.0};
  double y_max{0.0};

  bool contains(const Vec2& p) const {
    return p.x() >= x_min && p.x() <= x_max && p.y() >= y_min && p.y() <= y_max;
  }
};

/// Constant-velocity forecast, one position per MPC stage 0..N.
struct HumanPrediction {
  int id{0};
  std::vector<Vec2> positions;
};

class InvalidWorld : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace langmpc::world

#endif  // LANGMPC_WORLD_TYPES_HPP_
