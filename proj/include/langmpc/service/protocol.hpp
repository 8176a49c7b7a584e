#ifndef LANGMPC_SERVICE_PROTOCOL_HPP_
#define LANGMPC_SERVICE_PROTOCOL_HPP_

#include "langmpc/assistants/pipeline.hpp"
#include "langmpc/mpc/solver.hpp"
#include "langmpc/world/scenario.hpp"

#include <nlohmann/json.hpp>

#include <stdexcept>
#include <string>
#include <variant>

// JSON text frames exchanged with the operator console. Every outbound frame
// carries "type"; the connection adds a gap-free "seq" when it sends it.
namespace langmpc::service {

inline constexpr int kProtocolVersion = 1;

class ProtocolError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Episode state shown on a StateFrame.
enum class RunState { kRunning, kPaused, kGoalReached, kCollision };
std::string_view to_string(RunState s);

struct StateSnapshot {
  double t{0.0};
  world::RobotState robot;
  world::ControlInput input;
  std::vector<world::Human> humans;
  std::vector<world::RobotState> plan;
  RunState state{RunState::kRunning};
};

nlohmann::json hello_frame(const std::string& scenario_name);
nlohmann::json state_frame(const StateSnapshot& snapshot, const world::Scenario& scenario);
nlohmann::json spec_frame(const assistants::ActiveSpec& active);
nlohmann::json event_frame(const assistants::PipelineEvent& event);
nlohmann::json error_frame(std::string_view message);

struct QueryMsg {
  std::string text;
};
struct SceneMsg {
  std::string text;
};
enum class ControlAction { kPause, kResume, kReset, kLoad };
struct ControlMsg {
  ControlAction action{ControlAction::kPause};
  std::string scenario;  // path, for kLoad
};
/// A client may open with its own hello to assert the protocol version.
struct HelloMsg {
  int proto{kProtocolVersion};
};
using InboundMessage = std::variant<QueryMsg, SceneMsg, ControlMsg, HelloMsg>;

/// Throws ProtocolError on malformed JSON, unknown types, missing or empty
/// fields, and version mismatches.
InboundMessage parse_inbound(std::string_view text);

}  // namespace langmpc::service

#endif  // LANGMPC_SERVICE_PROTOCOL_HPP_
