#ifndef LANGMPC_SERVICE_SESSION_HPP_
#define LANGMPC_SERVICE_SESSION_HPP_

#include "langmpc/assistants/pipeline.hpp"
#include "langmpc/assistants/worker.hpp"
#include "langmpc/service/protocol.hpp"
#include "langmpc/sim/episode.hpp"

#include <nlohmann/json.hpp>

#include <atomic>
#include <chrono>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <thread>

namespace langmpc::service {

struct SessionOptions {
  sim::EpisodeConfig episode;
  /// Artificial delay before each pipeline run.
  std::chrono::milliseconds latency{1500};
  /// Sim seconds per wall second.
  double speedup{1.0};
  std::uint64_t seed{1};
};

/**
 * One live simulation. A control thread steps the closed loop at a fixed
 * rate and publishes a StateFrame every period, plus a SpecFrame whenever
 * the active spec digest changes. Queries run on a pipeline worker and never
 * block the control thread. Once the robot reaches the goal or collides the
 * world freezes until a reset; frames keep flowing.
 */
class Session {
 public:
  /// Called from the control and pipeline threads; must not block.
  using FrameSink = std::function<void(const nlohmann::json&)>;

  Session(world::Scenario scenario, std::shared_ptr<assistants::LlmClient> client, SessionOptions options = {});
  ~Session();

  Session(const Session&) = delete;
  Session& operator=(const Session&) = delete;

  void start();
  void stop();

  /// The sink first receives the current SpecFrame, then the live stream.
  int subscribe(FrameSink sink);
  void unsubscribe(int id);

  /// Queries and scenes go to the worker; control actions take effect at the
  /// next control period. Throws ProtocolError when a scenario to load is
  /// unreadable or invalid.
  void handle(const InboundMessage& message);

  std::string scenario_name() const;
  double period() const;  // wall seconds per control step

 private:
  struct Command {
    ControlAction action;
    std::shared_ptr<const world::Scenario> scenario;
  };

  void run();
  void apply(const Command& command);
  void rebuild(std::shared_ptr<const world::Scenario> scenario);
  void publish(const nlohmann::json& frame);
  void publish_spec_if_changed();

  std::shared_ptr<const world::Scenario> scenario_;
  SessionOptions options_;
  std::atomic<double> sim_time_{0.0};
  assistants::Assistants assistants_;
  assistants::ControllerHandle handle_;
  std::unique_ptr<assistants::PipelineWorker> worker_;

  // Owned by the control thread.
  std::unique_ptr<sim::ClosedLoop> loop_;
  StateSnapshot snapshot_;
  bool paused_{false};

  mutable std::mutex commands_mutex_;
  std::deque<Command> commands_;

  std::mutex sinks_mutex_;
  std::map<int, FrameSink> sinks_;
  int next_sink_{0};
  std::string published_digest_;
  nlohmann::json published_spec_;

  std::atomic<bool> running_{false};
  std::thread thread_;
};

}  // namespace langmpc::service

#endif  // LANGMPC_SERVICE_SESSION_HPP_
