#ifndef LANGMPC_WORLD_SCENARIO_HPP_
#define LANGMPC_WORLD_SCENARIO_HPP_

#include "langmpc/world/path.hpp"
#include "langmpc/world/types.hpp"

#include <nlohmann/json_fwd.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace langmpc::world {

constexpr double kDefaultRobotRadius = 0.3;
constexpr double kDefaultHumanRadius = 0.3;

struct HumanSpawn {
  Vec2 position{Vec2::Zero()};
  Vec2 goal{Vec2::Zero()};
  double desired_speed{1.3};
};

struct Scenario {
  std::string name;
  RobotState robot_start;
  double robot_radius{kDefaultRobotRadius};
  double human_radius{kDefaultHumanRadius};
  Vec2 goal{Vec2::Zero()};
  ReferencePath reference_path{{Vec2::Zero(), Vec2::UnitX()}};
  std::vector<HumanSpawn> humans_init;
  std::vector<CorridorSet> corridors;
  Workspace bounds;

  /// Every face of every corridor set, flattened in declaration order.
  std::vector<HalfSpace> half_spaces() const;

  /// Throws InvalidWorld when the start is not strictly feasible or the goal
  /// lies outside the workspace.
  void validate() const;
};

Scenario scenario_from_json(const nlohmann::json& doc);
nlohmann::json scenario_to_json(const Scenario& scenario);
Scenario load_scenario(const std::filesystem::path& file);

}  // namespace langmpc::world

#endif  // LANGMPC_WORLD_SCENARIO_HPP_
