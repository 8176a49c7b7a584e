#include "langmpc/service/protocol.hpp"

#include <fmt/format.h>

namespace langmpc::service {

using nlohmann::json;

namespace {

json point(const world::Vec2& p) { return json::array({p.x(), p.y()}); }

json robot_json(const world::RobotState& s) { return {{"x", s.x}, {"y", s.y}, {"theta", s.theta}, {"v", s.v}}; }

std::string required_text(const json& doc, const char* key) {
  const auto it = doc.find(key);
  if (it == doc.end() || !it->is_string()) {
    throw ProtocolError(fmt::format("'{}' must be a string", key));
  }
  auto text = it->get<std::string>();
  if (text.empty()) {
    throw ProtocolError(fmt::format("'{}' must not be empty", key));
  }
  return text;
}

}  // namespace

std::string_view to_string(RunState s) {
  switch (s) {
    case RunState::kRunning:
      return "running";
    case RunState::kPaused:
      return "paused";
    case RunState::kGoalReached:
      return "goal_reached";
    case RunState::kCollision:
      return "collision";
  }
  return "?";
}

json hello_frame(const std::string& scenario_name) {
  return {{"type", "hello"}, {"proto", kProtocolVersion}, {"scenario", scenario_name}};
}

json state_frame(const StateSnapshot& snapshot, const world::Scenario& scenario) {
  json humans = json::array();
  for (const auto& h : snapshot.humans) {
    humans.push_back({{"id", h.id},
                      {"x", h.position.x()},
                      {"y", h.position.y()},
                      {"vx", h.velocity.x()},
                      {"vy", h.velocity.y()},
                      {"radius", h.radius}});
  }
  json plan = json::array();
  for (const auto& s : snapshot.plan) {
    plan.push_back(json::array({s.x, s.y}));
  }
  json path = json::array();
  for (const auto& p : scenario.reference_path.waypoints()) {
    path.push_back(point(p));
  }
  return {{"type", "state"},
          {"t", snapshot.t},
          {"state", to_string(snapshot.state)},
          {"robot", robot_json(snapshot.robot)},
          {"robot_radius", scenario.robot_radius},
          {"input", {{"a", snapshot.input.a}, {"omega", snapshot.input.omega}}},
          {"humans", std::move(humans)},
          {"plan", std::move(plan)},
          {"reference_path", std::move(path)},
          {"goal", point(scenario.goal)}};
}

json spec_frame(const assistants::ActiveSpec& active) {
  json doc = dsl::to_json(active.spec);
  doc["type"] = "spec";
  doc["digest"] = active.digest;
  doc["ratings"] = active.ratings;
  return doc;
}

json event_frame(const assistants::PipelineEvent& event) {
  return {{"type", "event"},
          {"stage", assistants::to_string(event.stage)},
          {"detail", event.detail},
          {"elapsed", event.elapsed}};
}

json error_frame(std::string_view message) { return {{"type", "error"}, {"message", message}}; }

InboundMessage parse_inbound(std::string_view text) {
  const json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) {
    throw ProtocolError("message is not a JSON object");
  }
  const std::string type = required_text(doc, "type");
  if (type == "query") {
    return QueryMsg{required_text(doc, "text")};
  }
  if (type == "scene") {
    return SceneMsg{required_text(doc, "text")};
  }
  if (type == "hello") {
    const auto it = doc.find("proto");
    if (it == doc.end() || !it->is_number_integer()) {
      throw ProtocolError("'proto' must be an integer");
    }
    if (it->get<int>() != kProtocolVersion) {
      throw ProtocolError(fmt::format("unsupported protocol version {} (server speaks {})", it->get<int>(),
                                      kProtocolVersion));
    }
    return HelloMsg{kProtocolVersion};
  }
  if (type == "control") {
    const std::string action = required_text(doc, "action");
    if (action == "pause") return ControlMsg{ControlAction::kPause, {}};
    if (action == "resume") return ControlMsg{ControlAction::kResume, {}};
    if (action == "reset") return ControlMsg{ControlAction::kReset, {}};
    if (action == "load") return ControlMsg{ControlAction::kLoad, required_text(doc, "scenario")};
    throw ProtocolError(fmt::format("unknown control action '{}'", action));
  }
  throw ProtocolError(fmt::format("unknown message type '{}'", type));
}

}  // namespace langmpc::service
