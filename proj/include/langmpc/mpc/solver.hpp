#ifndef LANGMPC_MPC_SOLVER_HPP_
#define LANGMPC_MPC_SOLVER_HPP_

#include "langmpc/dsl/cost_spec.hpp"
#include "langmpc/mpc/config.hpp"
#include "langmpc/mpc/problem.hpp"
#include "langmpc/world/types.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace langmpc::mpc {

enum class PlanStatus { kConverged, kMaxIter, kInfeasible };
std::string_view to_string(PlanStatus status);

enum class SeedKind { kStraight, kPassLeft, kPassRight, kPreviousShifted };
std::string_view to_string(SeedKind kind);

struct Seed {
  SeedKind kind{SeedKind::kStraight};
  std::vector<world::ControlInput> inputs;
};

struct MeritStep {
  double before{0.0};
  double after{0.0};
  double mu{0.0};
};

struct TrajectoryPlan {
  std::vector<world::RobotState> states;  // N_k + 1
  std::vector<world::ControlInput> inputs;  // N_k
  double cost{0.0};
  double max_violation{0.0};
  int seed_id{0};
  SeedKind seed_kind{SeedKind::kStraight};
  PlanStatus status{PlanStatus::kMaxIter};
  int iterations{0};
  std::vector<MeritStep> merit_trace;  // one entry per accepted step
};

struct SolveResult {
  TrajectoryPlan best;
  std::vector<TrajectoryPlan> plans;  // in seed order
  world::ControlInput command;  // best.inputs[0], or braking when infeasible
};

/// Warm starts: straight, pass-left, pass-right (or the straight seed
/// repeated K times when there are no humans), plus the previous plan shifted
/// by one stage when given.
std::vector<Seed> generate_seeds(const MpcProblem& problem, const dsl::CostSpec& spec, const MpcConfig& config,
                                 const TrajectoryPlan* previous = nullptr);

/// Inputs clipped to the box and, sequentially, to keep 0 <= v <= v_max.
void project_inputs(std::vector<world::ControlInput>& inputs, double v0, const MpcConfig& config);

std::vector<world::RobotState> rollout(const world::RobotState& x0, const std::vector<world::ControlInput>& inputs,
                                       double dt);

/// Total true cost and maximum constraint violation of an input sequence.
struct Evaluation {
  double cost{0.0};
  double max_violation{0.0};
};
Evaluation evaluate_plan(const MpcProblem& problem, const dsl::CostSpec& spec, const MpcConfig& config,
                         const std::vector<world::ControlInput>& inputs);

/// Optimizes one seed. Throws CostRejected.
TrajectoryPlan optimize_seed(const MpcProblem& problem, const dsl::CostSpec& spec, const MpcConfig& config,
                             const Seed& seed, int seed_id);

/// Optimizes every seed (concurrently when config.parallel) and selects the
/// feasible plan of least cost, ties to the lowest seed id. Throws
/// CostRejected.
SolveResult solve(const MpcProblem& problem, const dsl::CostSpec& spec, const MpcConfig& config,
                  const std::vector<Seed>& seeds);

/// Strongest deceleration that does not reverse, no turning.
world::ControlInput braking_input(const world::RobotState& state, const MpcConfig& config);

}  // namespace langmpc::mpc

#endif  // LANGMPC_MPC_SOLVER_HPP_
