#ifndef LANGMPC_ASSISTANTS_WORKER_HPP_
#define LANGMPC_ASSISTANTS_WORKER_HPP_

#include "langmpc/assistants/pipeline.hpp"

#include <chrono>
#include <condition_variable>
#include <mutex>
#include <optional>
#include <string>
#include <thread>

namespace langmpc::assistants {

/**
 * Runs handle_query on a background thread, at most one query at a time. A
 * query arriving while one is in flight waits in a slot of depth one; a newer
 * arrival replaces it and the replaced query is reported as a Rejected event.
 */
class PipelineWorker {
 public:
  /// `latency` is an artificial delay before each query, used with the mock
  /// backend so interactive sessions feel like a remote model.
  PipelineWorker(Assistants& assistants, ControllerHandle& handle, EventSink sink,
                 std::chrono::milliseconds latency = std::chrono::milliseconds{0});
  ~PipelineWorker();

  PipelineWorker(const PipelineWorker&) = delete;
  PipelineWorker& operator=(const PipelineWorker&) = delete;

  void submit(std::string text, double received_at = 0.0);
  /// Latest scene description, consumed by the Camera stage.
  void set_scene(std::string description);

  bool busy() const;
  /// Blocks until nothing is queued or in flight.
  void wait_idle();
  void stop();

 private:
  void run();

  Assistants& assistants_;
  ControllerHandle& handle_;
  EventSink sink_;
  std::chrono::milliseconds latency_;

  mutable std::mutex mutex_;
  std::condition_variable wake_;
  std::condition_variable idle_;
  std::optional<Query> pending_;
  std::string scene_;
  bool in_flight_{false};
  bool stopping_{false};
  int next_index_{0};
  std::thread thread_;
};

}  // namespace langmpc::assistants

#endif  // LANGMPC_ASSISTANTS_WORKER_HPP_
