#ifndef LANGMPC_SIM_EPISODE_HPP_
#define LANGMPC_SIM_EPISODE_HPP_

#include "langmpc/assistants/llm_client.hpp"
#include "langmpc/assistants/pipeline.hpp"
#include "langmpc/mpc/config.hpp"
#include "langmpc/mpc/solver.hpp"
#include "langmpc/sim/social_force.hpp"
#include "langmpc/world/scenario.hpp"

#include <nlohmann/json_fwd.hpp>

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace langmpc::sim {

struct ScriptedQuery {
  double t{0.0};  // [s]
  std::string text;
};
using QueryScript = std::vector<ScriptedQuery>;

/// JSON array of {"t": seconds, "query": text}, sorted by t on load.
QueryScript load_query_script(const std::filesystem::path& file);
QueryScript query_script_from_json(const nlohmann::json& doc);

struct EpisodeConfig {
  mpc::MpcConfig mpc;
  SocialForceParams social;
  double timeout{60.0};        // [s]
  double goal_tolerance{0.3};  // [m]
  /// Reference cost the episode starts from, and its reference speed.
  std::string initial_cost{"path"};
  double v_ref{2.0};
  /// Scene text the Camera stage receives.
  std::string scene;
  /// Uniform jitter of pedestrian spawn positions [m] and desired speeds [m/s].
  double spawn_jitter{0.2};
  double speed_jitter{0.1};
};

enum class Termination { kGoalReached, kTimeout, kCollision };
std::string_view to_string(Termination t);

struct StepRecord {
  double t{0.0};
  world::RobotState robot;
  world::ControlInput input;  // applied over [t, t + dt); zero on the last record
  std::vector<world::Human> humans;
  std::string spec_digest;
  mpc::PlanStatus plan_status{mpc::PlanStatus::kConverged};
};

struct EpisodeRecord {
  std::vector<StepRecord> steps;  // the last entry is the terminal state
  Termination status{Termination::kTimeout};
  std::uint64_t seed{0};
  double dt{0.1};
  double robot_radius{world::kDefaultRobotRadius};
  double human_radius{world::kDefaultHumanRadius};
  std::vector<std::string> log;  // pipeline events and solver rejections
};

/// Pedestrians of `scenario` with seeded spawn jitter.
std::vector<Pedestrian> spawn_pedestrians(const world::Scenario& scenario, const EpisodeConfig& config,
                                          std::uint64_t seed);

/**
 * One robot among social-force pedestrians, advanced one control period at a
 * time: predict humans, solve, apply the first input, step the pedestrians,
 * then check collision, goal and timeout in that order. A spec the solver
 * rejects is replaced on `handle` by the last spec that solved; if none
 * solves, the robot brakes.
 */
class ClosedLoop {
 public:
  struct Step {
    StepRecord record;  // state before the step and the input applied
    mpc::TrajectoryPlan plan;
    std::vector<std::string> log;
  };

  /// A non-finite config.timeout disables the timeout.
  ClosedLoop(world::Scenario scenario, EpisodeConfig config, std::uint64_t seed,
             assistants::ControllerHandle& handle);

  /// Throws std::logic_error once terminal.
  Step step();

  double time() const;
  const world::RobotState& robot() const { return robot_; }
  std::vector<world::Human> humans() const { return bodies(pedestrians_); }
  const world::Scenario& scenario() const { return scenario_; }
  std::optional<Termination> terminal() const { return status_; }

 private:
  world::Scenario scenario_;
  EpisodeConfig config_;
  assistants::ControllerHandle& handle_;
  std::shared_ptr<const assistants::ActiveSpec> last_good_;
  std::vector<world::HalfSpace> walls_;
  world::RobotState robot_;
  std::vector<Pedestrian> pedestrians_;
  std::optional<mpc::TrajectoryPlan> previous_;
  long k_{0};
  long step_limit_{0};
  std::optional<Termination> status_;
};

/// Active spec the episode starts from: the configured reference cost with
/// every term rated 5.
assistants::ActiveSpec initial_active_spec(const world::Scenario& scenario, const EpisodeConfig& config);

/**
 * Closed loop at dt = config.mpc.dt, firing due queries through the assistant
 * pipeline (clocked by sim time) before each step.
 */
EpisodeRecord run_episode(const world::Scenario& scenario, const QueryScript& script, const EpisodeConfig& config,
                          std::shared_ptr<assistants::LlmClient> client, std::uint64_t seed);

}  // namespace langmpc::sim

#endif  // LANGMPC_SIM_EPISODE_HPP_
