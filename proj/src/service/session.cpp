#include "langmpc/service/session.hpp"
#include "langmpc/service/config.hpp"

#include <fmt/format.h>

#include <cmath>
#include <limits>

namespace langmpc::service {

namespace {

sim::EpisodeConfig without_timeout(sim::EpisodeConfig config) {
  config.timeout = std::numeric_limits<double>::infinity();
  return config;
}

assistants::PipelineOptions pipeline_options(const world::Scenario& scenario, const SessionOptions& options,
                                             const std::atomic<double>& sim_time) {
  assistants::PipelineOptions out;
  out.v_max = options.episode.mpc.v_max;
  out.robot_radius = scenario.robot_radius;
  out.human_radius = scenario.human_radius;
  out.clock = [&sim_time] { return sim_time.load(); };
  return out;
}

}  // namespace

Session::Session(world::Scenario scenario, std::shared_ptr<assistants::LlmClient> client, SessionOptions options)
    : scenario_(std::make_shared<const world::Scenario>(std::move(scenario))),
      options_(std::move(options)),
      assistants_(std::move(client), pipeline_options(*scenario_, options_, sim_time_)),
      handle_(sim::initial_active_spec(*scenario_, options_.episode)) {
  if (!(options_.speedup > 0.0) || !std::isfinite(options_.speedup)) {
    throw std::invalid_argument("speedup must be positive");
  }
  options_.episode = without_timeout(options_.episode);
  rebuild(scenario_);
  publish_spec_if_changed();
  worker_ = std::make_unique<assistants::PipelineWorker>(
      assistants_, handle_, [this](const assistants::PipelineEvent& e) { publish(event_frame(e)); },
      options_.latency);
}

Session::~Session() {
  stop();
  worker_->stop();
}

void Session::start() {
  if (running_.exchange(true)) {
    return;
  }
  thread_ = std::thread([this] { run(); });
}

void Session::stop() {
  running_ = false;
  if (thread_.joinable()) {
    thread_.join();
  }
}

int Session::subscribe(FrameSink sink) {
  std::lock_guard lock(sinks_mutex_);
  const int id = next_sink_++;
  sink(published_spec_);
  sinks_.emplace(id, std::move(sink));
  return id;
}

void Session::unsubscribe(int id) {
  std::lock_guard lock(sinks_mutex_);
  sinks_.erase(id);
}

void Session::handle(const InboundMessage& message) {
  if (const auto* q = std::get_if<QueryMsg>(&message)) {
    worker_->submit(q->text, sim_time_.load());
  } else if (const auto* s = std::get_if<SceneMsg>(&message)) {
    worker_->set_scene(s->text);
  } else if (const auto* c = std::get_if<ControlMsg>(&message)) {
    Command command{c->action, nullptr};
    if (c->action == ControlAction::kLoad) {
      try {
        command.scenario = std::make_shared<const world::Scenario>(world::load_scenario(resolve_data_file(c->scenario, "scenarios")));
      } catch (const std::exception& e) {
        throw ProtocolError(fmt::format("cannot load scenario: {}", e.what()));
      }
    }
    std::lock_guard lock(commands_mutex_);
    commands_.push_back(std::move(command));
  }
}

std::string Session::scenario_name() const {
  std::lock_guard lock(commands_mutex_);
  return scenario_->name;
}

double Session::period() const { return options_.episode.mpc.dt / options_.speedup; }

void Session::rebuild(std::shared_ptr<const world::Scenario> scenario) {
  {
    std::lock_guard lock(commands_mutex_);
    scenario_ = std::move(scenario);
  }
  handle_.swap(std::make_shared<const assistants::ActiveSpec>(sim::initial_active_spec(*scenario_, options_.episode)));
  loop_ = std::make_unique<sim::ClosedLoop>(*scenario_, options_.episode, options_.seed, handle_);
  sim_time_ = 0.0;
  snapshot_ = StateSnapshot{};
  snapshot_.robot = loop_->robot();
  snapshot_.humans = loop_->humans();
}

void Session::apply(const Command& command) {
  switch (command.action) {
    case ControlAction::kPause:
      paused_ = true;
      break;
    case ControlAction::kResume:
      paused_ = false;
      break;
    case ControlAction::kReset:
      rebuild(scenario_);
      break;
    case ControlAction::kLoad:
      rebuild(command.scenario);
      break;
  }
}

void Session::run() {
  using Clock = std::chrono::steady_clock;
  const auto period = std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(this->period()));
  auto next = Clock::now();
  while (running_) {
    std::deque<Command> commands;
    {
      std::lock_guard lock(commands_mutex_);
      commands.swap(commands_);
    }
    for (const auto& c : commands) {
      apply(c);
    }

    if (!paused_ && !loop_->terminal()) {
      auto step = loop_->step();
      snapshot_.input = step.record.input;
      snapshot_.plan = std::move(step.plan.states);
      for (const auto& line : step.log) {
        publish(event_frame({assistants::Stage::kRejected, line, 0.0}));
      }
    }
    sim_time_ = loop_->time();
    snapshot_.t = loop_->time();
    snapshot_.robot = loop_->robot();
    snapshot_.humans = loop_->humans();
    if (const auto end = loop_->terminal()) {
      snapshot_.state = *end == sim::Termination::kCollision ? RunState::kCollision : RunState::kGoalReached;
    } else {
      snapshot_.state = paused_ ? RunState::kPaused : RunState::kRunning;
    }
    publish_spec_if_changed();
    publish(state_frame(snapshot_, *scenario_));

    next += period;
    const auto now = Clock::now();
    if (next < now) {
      next = now;  // overran; do not try to catch up in a burst
    }
    std::this_thread::sleep_until(next);
  }
}

void Session::publish(const nlohmann::json& frame) {
  std::lock_guard lock(sinks_mutex_);
  for (const auto& [id, sink] : sinks_) {
    sink(frame);
  }
}

void Session::publish_spec_if_changed() {
  const auto active = handle_.current();
  std::lock_guard lock(sinks_mutex_);
  if (active->digest == published_digest_) {
    return;
  }
  published_digest_ = active->digest;
  published_spec_ = spec_frame(*active);
  for (const auto& [id, sink] : sinks_) {
    sink(published_spec_);
  }
}

}  // namespace langmpc::service
