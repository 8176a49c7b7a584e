#include "langmpc/assistants/worker.hpp"

#include <fmt/format.h>

namespace langmpc::assistants {

PipelineWorker::PipelineWorker(Assistants& assistants, ControllerHandle& handle, EventSink sink,
                               std::chrono::milliseconds latency)
    : assistants_(assistants), handle_(handle), sink_(std::move(sink)), latency_(latency) {
  thread_ = std::thread([this] { run(); });
}

PipelineWorker::~PipelineWorker() { stop(); }

void PipelineWorker::submit(std::string text, double received_at) {
  std::optional<Query> dropped;
  {
    std::lock_guard lock(mutex_);
    if (stopping_) {
      return;
    }
    if (pending_) {
      dropped = std::move(pending_);
    }
    pending_ = Query{std::move(text), received_at, next_index_++};
  }
  wake_.notify_all();
  if (dropped && sink_) {
    sink_({Stage::kRejected, fmt::format("dropped: superseded by a newer query ('{}')", dropped->text), 0.0});
  }
}

void PipelineWorker::set_scene(std::string description) {
  std::lock_guard lock(mutex_);
  scene_ = std::move(description);
}

bool PipelineWorker::busy() const {
  std::lock_guard lock(mutex_);
  return in_flight_ || pending_.has_value();
}

void PipelineWorker::wait_idle() {
  std::unique_lock lock(mutex_);
  idle_.wait(lock, [this] { return stopping_ || (!in_flight_ && !pending_); });
}

void PipelineWorker::stop() {
  {
    std::lock_guard lock(mutex_);
    stopping_ = true;
  }
  wake_.notify_all();
  idle_.notify_all();
  if (thread_.joinable()) {
    thread_.join();
  }
}

void PipelineWorker::run() {
  std::unique_lock lock(mutex_);
  while (true) {
    wake_.wait(lock, [this] { return stopping_ || pending_.has_value(); });
    if (stopping_) {
      return;
    }
    Query query = std::move(*pending_);
    pending_.reset();
    in_flight_ = true;
    if (latency_.count() > 0 && wake_.wait_for(lock, latency_, [this] { return stopping_; })) {
      return;
    }
    const std::string scene = scene_;
    lock.unlock();
    assistants_.handle_query(query, handle_, scene, sink_);
    lock.lock();
    in_flight_ = false;
    if (!pending_) {
      idle_.notify_all();
    }
  }
}

}  // namespace langmpc::assistants
