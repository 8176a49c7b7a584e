#include "langmpc/sim/episode.hpp"

#include "langmpc/assistants/pipeline.hpp"
#include "langmpc/assistants/reference_costs.hpp"
#include "langmpc/mpc/problem.hpp"
#include "langmpc/world/dynamics.hpp"

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <random>

namespace langmpc::sim {

std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::kGoalReached:
      return "GoalReached";
    case Termination::kTimeout:
      return "Timeout";
    case Termination::kCollision:
      return "Collision";
  }
  return "?";
}

QueryScript query_script_from_json(const nlohmann::json& doc) {
  QueryScript script;
  try {
    for (const auto& entry : doc) {
      script.push_back({entry.at("t").get<double>(), entry.at("query").get<std::string>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(fmt::format("malformed query script: {}", e.what()));
  }
  for (const auto& q : script) {
    if (!std::isfinite(q.t) || q.t < 0.0 || q.text.empty()) {
      throw std::invalid_argument("query script entries need t >= 0 and non-empty text");
    }
  }
  std::stable_sort(script.begin(), script.end(), [](const auto& l, const auto& r) { return l.t < r.t; });
  return script;
}

QueryScript load_query_script(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) {
    throw std::invalid_argument(fmt::format("cannot open query script {}", file.string()));
  }
  try {
    return query_script_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(fmt::format("malformed query script {}: {}", file.string(), e.what()));
  }
}

std::vector<Pedestrian> spawn_pedestrians(const world::Scenario& scenario, const EpisodeConfig& config,
                                          std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::vector<Pedestrian> out;
  int id = 0;
  for (const auto& spawn : scenario.humans_init) {
    Pedestrian p;
    p.body.id = id++;
    p.body.radius = scenario.human_radius;
    const double jx = config.spawn_jitter * unit(rng);
    const double jy = config.spawn_jitter * unit(rng);
    const double jv = config.speed_jitter * unit(rng);
    p.body.position = spawn.position + world::Vec2(jx, jy);
    p.goal = spawn.goal + world::Vec2(0.0, jy);
    p.desired_speed = std::max(0.1, spawn.desired_speed + jv);
    p.body.velocity = desired_velocity(p, config.social);
    out.push_back(p);
  }
  return out;
}

assistants::ActiveSpec initial_active_spec(const world::Scenario& scenario, const EpisodeConfig& config) {
  const auto initial =
      assistants::reference_cost(config.initial_cost, dsl::default_parameters(config.v_ref, scenario.goal));
  return assistants::make_active(initial, assistants::initial_ratings(initial), config.mpc.v_max);
}

ClosedLoop::ClosedLoop(world::Scenario scenario, EpisodeConfig config, std::uint64_t seed,
                       assistants::ControllerHandle& handle)
    : scenario_(std::move(scenario)),
      config_(std::move(config)),
      handle_(handle),
      last_good_(handle.current()),
      walls_(scenario_.half_spaces()),
      robot_(scenario_.robot_start),
      pedestrians_(spawn_pedestrians(scenario_, config_, seed)) {
  config_.mpc.validate();
  config_.social.validate();
  step_limit_ = std::isfinite(config_.timeout) ? static_cast<long>(std::llround(config_.timeout / config_.mpc.dt))
                                               : std::numeric_limits<long>::max();
}

double ClosedLoop::time() const { return static_cast<double>(k_) * config_.mpc.dt; }

ClosedLoop::Step ClosedLoop::step() {
  if (status_) {
    throw std::logic_error("episode already terminated");
  }
  const double dt = config_.mpc.dt;
  const double t = time();
  Step out;
  out.record.t = t;
  out.record.robot = robot_;
  out.record.humans = bodies(pedestrians_);

  const auto problem = mpc::make_problem(scenario_, robot_, out.record.humans, config_.mpc);
  mpc::SolveResult result;
  for (int attempt = 0;; ++attempt) {
    const auto active = handle_.current();
    try {
      result = mpc::solve(problem, active->spec, config_.mpc,
                          mpc::generate_seeds(problem, active->spec, config_.mpc, previous_ ? &*previous_ : nullptr));
      last_good_ = active;
      break;
    } catch (const mpc::CostRejected& e) {
      out.log.push_back(fmt::format("t={:.1f} solver rejected spec: {}", t, e.what()));
      if (attempt == 0 && active != last_good_) {
        handle_.swap(last_good_);
        continue;
      }
      result.command = mpc::braking_input(robot_, config_.mpc);
      result.best.status = mpc::PlanStatus::kInfeasible;
      break;
    }
  }
  previous_ = result.best.inputs.empty() ? std::nullopt : std::optional(result.best);
  out.record.input = result.command;
  out.record.spec_digest = handle_.current()->digest;
  out.record.plan_status = result.best.status;
  out.plan = std::move(result.best);

  robot_ = world::unicycle_step(robot_, result.command, dt);
  robot_.v = std::clamp(robot_.v, 0.0, config_.mpc.v_max);
  // Pedestrians react to where the robot was during the period.
  pedestrians_ =
      social_force_step(pedestrians_, out.record.robot, scenario_.robot_radius, walls_, config_.social, dt);
  ++k_;

  const double r_sum = scenario_.robot_radius + scenario_.human_radius;
  const bool collided = std::any_of(pedestrians_.begin(), pedestrians_.end(), [&](const Pedestrian& p) {
    return (p.body.position - robot_.position()).norm() < r_sum;
  });
  if (collided) {
    status_ = Termination::kCollision;
  } else if ((robot_.position() - scenario_.goal).norm() < config_.goal_tolerance) {
    status_ = Termination::kGoalReached;
  } else if (k_ >= step_limit_) {
    status_ = Termination::kTimeout;
  }
  return out;
}

EpisodeRecord run_episode(const world::Scenario& scenario, const QueryScript& script, const EpisodeConfig& config,
                          std::shared_ptr<assistants::LlmClient> client, std::uint64_t seed) {
  assistants::PipelineOptions options;
  options.v_max = config.mpc.v_max;
  options.robot_radius = scenario.robot_radius;
  options.human_radius = scenario.human_radius;
  double sim_time = 0.0;
  options.clock = [&sim_time] { return sim_time; };
  assistants::Assistants pipeline(std::move(client), options);
  assistants::ControllerHandle handle(initial_active_spec(scenario, config));
  ClosedLoop loop(scenario, config, seed, handle);

  EpisodeRecord record;
  record.seed = seed;
  record.dt = config.mpc.dt;
  record.robot_radius = scenario.robot_radius;
  record.human_radius = scenario.human_radius;

  std::size_t next_query = 0;
  while (!loop.terminal()) {
    sim_time = loop.time();
    while (next_query < script.size() && script[next_query].t <= sim_time + 1e-9) {
      const auto& q = script[next_query];
      for (const auto& e : pipeline.handle_query({q.text, sim_time, static_cast<int>(next_query)}, handle,
                                                 config.scene)) {
        record.log.push_back(fmt::format("t={:.1f} {} {}", sim_time, assistants::to_string(e.stage), e.detail));
      }
      ++next_query;
    }
    auto step = loop.step();
    record.log.insert(record.log.end(), step.log.begin(), step.log.end());
    record.steps.push_back(std::move(step.record));
  }

  record.status = *loop.terminal();
  StepRecord last;
  last.t = loop.time();
  last.robot = loop.robot();
  last.humans = loop.humans();
  last.spec_digest = handle.current()->digest;
  last.plan_status = record.steps.back().plan_status;
  record.steps.push_back(std::move(last));
  return record;
}

}  // namespace langmpc::sim
