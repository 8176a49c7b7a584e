#include "langmpc/mpc/solver.hpp"

#include "langmpc/dsl/dual.hpp"
#include "langmpc/dsl/tape.hpp"
#include "langmpc/world/dynamics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <future>
#include <limits>

namespace langmpc::mpc {

using world::ControlInput;
using world::RobotState;
using world::Vec2;

std::string_view to_string(PlanStatus status) {
  switch (status) {
    case PlanStatus::kConverged: return "converged";
    case PlanStatus::kMaxIter: return "max_iter";
    case PlanStatus::kInfeasible: return "infeasible";
  }
  return "unknown";
}

std::string_view to_string(SeedKind kind) {
  switch (kind) {
    case SeedKind::kStraight: return "straight";
    case SeedKind::kPassLeft: return "pass_left";
    case SeedKind::kPassRight: return "pass_right";
    case SeedKind::kPreviousShifted: return "previous_shifted";
  }
  return "unknown";
}

void project_inputs(std::vector<ControlInput>& inputs, double v0, const MpcConfig& config) {
  double v = v0;
  for (auto& u : inputs) {
    const double lo = std::max(config.a_min, -v / config.dt);
    const double hi = std::max(lo, std::min(config.a_max, (config.v_max - v) / config.dt));
    u.a = std::clamp(u.a, lo, hi);
    u.omega = std::clamp(u.omega, config.omega_min, config.omega_max);
    v = v + config.dt * u.a;
  }
}

std::vector<RobotState> rollout(const RobotState& x0, const std::vector<ControlInput>& inputs, double dt) {
  std::vector<RobotState> states;
  states.reserve(inputs.size() + 1);
  states.push_back(x0);
  for (const auto& u : inputs) {
    states.push_back(world::unicycle_step(states.back(), u, dt));
  }
  return states;
}

ControlInput braking_input(const RobotState& state, const MpcConfig& config) {
  return {std::max(config.a_min, -state.v / config.dt), 0.0};
}

namespace {

using Inputs = std::vector<ControlInput>;
using States = std::vector<RobotState>;
using Lanes = dsl::Dual<8>;  // px, py, theta, v, a, omega, e_c, e_l

constexpr int slot(dsl::Variable v) { return static_cast<int>(v); }

struct StateGrad {
  double x{0.0}, y{0.0}, theta{0.0}, v{0.0};
};

/// Single-shooting transcription of one MPC problem for a fixed spec.
class Shooting {
 public:
  Shooting(const MpcProblem& problem, const dsl::CostSpec& spec, const MpcConfig& config)
      : problem_(problem),
        config_(config),
        tape_(dsl::compile_stage_cost(spec)),
        options_{.sigmoid_if_else = config.sigmoid_if_else},
        n_(config.horizon) {
    const double v_ref = spec.params.find("v_ref").value_or(0.0);
    const double s_start = world::path_project(problem.path, problem.robot.position()).s;
    s_expected_.resize(static_cast<std::size_t>(n_) + 1);
    for (int k = 0; k <= n_; ++k) {
      s_expected_[k] = expected_arc_length(s_start, v_ref, config.dt, k, problem.path.length());
    }
    const double r = problem.robot_radius + problem.human_radius;
    inv_r2_ = 1.0 / (r * r);
  }

  int horizon() const { return n_; }

  States roll(const Inputs& u) const { return rollout(problem_.robot, u, config_.dt); }

  std::vector<Vec2> bind_humans(const States& xs) const {
    std::vector<Vec2> oh(xs.size());
    for (std::size_t k = 0; k < xs.size(); ++k) {
      oh[k] = dsl::closest_human_binding(xs[k].position(), problem_.predictions, k);
    }
    return oh;
  }

  double cost(const States& xs, const Inputs& u, const std::vector<Vec2>& oh) const {
    double total = 0.0;
    for (int k = 0; k <= n_; ++k) {
      total += stage_value(k, xs[k], k < n_ ? u[k] : ControlInput{}, oh[k]);
    }
    return total;
  }

  /// Largest constraint value over stages 1..N, clipped at zero.
  double violation(const States& xs) const {
    double worst = 0.0;
    for (int k = 1; k <= n_; ++k) {
      const Vec2 p = xs[k].position();
      for (const auto& pred : problem_.predictions) {
        worst = std::max(worst, 1.0 - (p - pred.positions[k]).squaredNorm() * inv_r2_);
      }
      for (const auto& f : problem_.half_spaces) {
        worst = std::max(worst, f.normal.dot(p) - f.offset + problem_.robot_radius);
      }
    }
    return worst;
  }

  double penalty(const States& xs, double mu) const {
    double total = 0.0;
    for_each_active(xs, [&](int, double g, const Vec2&) { total += g * g; });
    return mu * total;
  }

  double merit(const States& xs, const Inputs& u, const std::vector<Vec2>& oh, double mu) const {
    return cost(xs, u, oh) + penalty(xs, mu);
  }

  /// Gradient of the merit with respect to the inputs, by backward sweep.
  Inputs gradient(const States& xs, const Inputs& u, const std::vector<Vec2>& oh, double mu) const {
    std::vector<StateGrad> dx(static_cast<std::size_t>(n_) + 1);
    Inputs du(static_cast<std::size_t>(n_));
    for (int k = 0; k <= n_; ++k) {
      const ControlInput uk = k < n_ ? u[k] : ControlInput{};
      const PathErrors pe = path_errors(problem_.path, xs[k].position(), s_expected_[k]);
      std::array<Lanes, dsl::kVariableCount> slots;
      slots[slot(dsl::Variable::kPx)] = Lanes::seeded(xs[k].x, 0);
      slots[slot(dsl::Variable::kPy)] = Lanes::seeded(xs[k].y, 1);
      slots[slot(dsl::Variable::kTheta)] = Lanes::seeded(xs[k].theta, 2);
      slots[slot(dsl::Variable::kV)] = Lanes::seeded(xs[k].v, 3);
      slots[slot(dsl::Variable::kA)] = Lanes::seeded(uk.a, 4);
      slots[slot(dsl::Variable::kOmega)] = Lanes::seeded(uk.omega, 5);
      slots[slot(dsl::Variable::kContourError)] = Lanes::seeded(pe.contour, 6);
      slots[slot(dsl::Variable::kLagError)] = Lanes::seeded(pe.lag, 7);
      slots[slot(dsl::Variable::kOhX)] = Lanes::constant(oh[k].x());
      slots[slot(dsl::Variable::kOhY)] = Lanes::constant(oh[k].y());
      const Lanes l = tape_.run<Lanes>(std::span<const Lanes>(slots), options_);
      auto& g = dx[k];
      g.x = l.d[0] + l.d[6] * pe.d_contour.x() + l.d[7] * pe.d_lag.x();
      g.y = l.d[1] + l.d[6] * pe.d_contour.y() + l.d[7] * pe.d_lag.y();
      g.theta = l.d[2];
      g.v = l.d[3];
      if (k < n_) {
        du[k] = {l.d[4], l.d[5]};
      }
    }
    for_each_active(xs, [&](int k, double g, const Vec2& dg) {
      dx[k].x += 2.0 * mu * g * dg.x();
      dx[k].y += 2.0 * mu * g * dg.y();
    });
    // Adjoint recursion through the explicit Euler step.
    StateGrad lambda = dx[n_];
    const double dt = config_.dt;
    for (int k = n_ - 1; k >= 0; --k) {
      const double c = std::cos(xs[k].theta);
      const double s = std::sin(xs[k].theta);
      du[k].a += dt * lambda.v;
      du[k].omega += dt * lambda.theta;
      StateGrad next;
      next.x = dx[k].x + lambda.x;
      next.y = dx[k].y + lambda.y;
      next.theta = dx[k].theta + lambda.theta + dt * xs[k].v * (-s * lambda.x + c * lambda.y);
      next.v = dx[k].v + lambda.v + dt * (c * lambda.x + s * lambda.y);
      lambda = next;
    }
    return du;
  }

 private:
  double stage_value(int k, const RobotState& x, const ControlInput& u, const Vec2& oh) const {
    const PathErrors pe = path_errors(problem_.path, x.position(), s_expected_[k]);
    std::array<double, dsl::kVariableCount> slots{};
    slots[slot(dsl::Variable::kPx)] = x.x;
    slots[slot(dsl::Variable::kPy)] = x.y;
    slots[slot(dsl::Variable::kTheta)] = x.theta;
    slots[slot(dsl::Variable::kV)] = x.v;
    slots[slot(dsl::Variable::kA)] = u.a;
    slots[slot(dsl::Variable::kOmega)] = u.omega;
    slots[slot(dsl::Variable::kOhX)] = oh.x();
    slots[slot(dsl::Variable::kOhY)] = oh.y();
    slots[slot(dsl::Variable::kContourError)] = pe.contour;
    slots[slot(dsl::Variable::kLagError)] = pe.lag;
    return tape_.run<double>(std::span<const double>(slots), options_);
  }

  /// Calls f(stage, tightened g, dg/dp) for every active tightened constraint.
  template <class F>
  void for_each_active(const States& xs, F&& f) const {
    const double margin = config_.constraint_margin;
    for (int k = 1; k <= n_; ++k) {
      const Vec2 p = xs[k].position();
      for (const auto& pred : problem_.predictions) {
        const Vec2 d = p - pred.positions[k];
        const double g = 1.0 - d.squaredNorm() * inv_r2_ + margin;
        if (g > 0.0) f(k, g, Vec2(-2.0 * inv_r2_ * d));
      }
      for (const auto& face : problem_.half_spaces) {
        const double g = face.normal.dot(p) - face.offset + problem_.robot_radius + margin;
        if (g > 0.0) f(k, g, face.normal);
      }
    }
  }

  const MpcProblem& problem_;
  const MpcConfig& config_;
  dsl::Tape tape_;
  dsl::EvalOptions options_;
  int n_;
  std::vector<double> s_expected_;
  double inv_r2_{1.0};
};

double dot(const Inputs& x, const Inputs& y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i].a * y[i].a + x[i].omega * y[i].omega;
  return s;
}

Inputs axpy(const Inputs& x, double alpha, const Inputs& g) {
  Inputs out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = {x[i].a + alpha * g[i].a, x[i].omega + alpha * g[i].omega};
  return out;
}

Inputs diff(const Inputs& x, const Inputs& y) { return axpy(x, -1.0, y); }

double max_abs(const Inputs& x) {
  double m = 0.0;
  for (const auto& u : x) m = std::max({m, std::abs(u.a), std::abs(u.omega)});
  return m;
}

bool same_inputs(const Inputs& x, const Inputs& y) {
  if (x.size() != y.size()) return false;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i].a != y[i].a || x[i].omega != y[i].omega) return false;
  }
  return true;
}

// Seed generation -----------------------------------------------------------

enum class Objective { kGoal, kPath, kHuman };

Objective objective_of(const dsl::CostSpec& spec) {
  bool goal = false, path = false, human = false;
  for (const auto& t : spec.terms) {
    const auto params = dsl::referenced_parameters(t.expr);
    const auto vars = dsl::referenced_variables(t.expr);
    goal = goal || params.count("goal_x") != 0 || params.count("goal_y") != 0;
    path = path || vars.count(dsl::Variable::kContourError) != 0 || vars.count(dsl::Variable::kLagError) != 0;
    // Only attraction to humans shapes the nominal heading.
    human = human || ((vars.count(dsl::Variable::kOhX) != 0) && !dsl::contains_if_else(t.expr) &&
                      std::holds_alternative<dsl::Binary>(t.expr.node().value) &&
                      std::get<dsl::Binary>(t.expr.node().value).op != dsl::BinaryOp::kDiv);
  }
  if (goal) return Objective::kGoal;
  if (path) return Objective::kPath;
  if (human) return Objective::kHuman;
  return Objective::kGoal;
}

/// Rolls a heading/speed tracking controller towards target(k, state).
template <class Target>
Inputs track(const MpcProblem& problem, const MpcConfig& config, double v_ref, Target&& target) {
  Inputs inputs;
  inputs.reserve(static_cast<std::size_t>(config.horizon));
  RobotState x = problem.robot;
  for (int k = 0; k < config.horizon; ++k) {
    const Vec2 t = target(k, x);
    const Vec2 d = t - x.position();
    const double dist = d.norm();
    const double err = dist > 1e-9 ? world::normalize_angle(std::atan2(d.y(), d.x()) - x.theta) : 0.0;
    const double stop_speed = std::sqrt(2.0 * 0.5 * config.a_max * dist);
    const double v_des = std::clamp(std::min(v_ref, stop_speed) * std::max(0.0, std::cos(err)), 0.0, config.v_max);
    ControlInput u{std::clamp((v_des - x.v) / (2.0 * config.dt), config.a_min, config.a_max),
                   std::clamp(2.0 * err, config.omega_min, config.omega_max)};
    inputs.push_back(u);
    x = world::unicycle_step(x, u, config.dt);
  }
  project_inputs(inputs, problem.robot.v, config);
  return inputs;
}

}  // namespace

std::vector<Seed> generate_seeds(const MpcProblem& problem, const dsl::CostSpec& spec, const MpcConfig& config,
                                 const TrajectoryPlan* previous) {
  const double v_ref = std::clamp(spec.params.find("v_ref").value_or(1.0), 0.0, config.v_max);
  const Objective objective = objective_of(spec);
  const Vec2 goal(spec.params.find("goal_x").value_or(problem.path.waypoints().back().x()),
                  spec.params.find("goal_y").value_or(problem.path.waypoints().back().y()));
  const double lookahead = std::max(1.0, v_ref);
  const auto nominal = [&](int k, const RobotState& x) -> Vec2 {
    switch (objective) {
      case Objective::kPath:
        return problem.path.point_at(world::path_project(problem.path, x.position()).s + lookahead);
      case Objective::kHuman:
        if (!problem.predictions.empty()) {
          return dsl::closest_human_binding(x.position(), problem.predictions, static_cast<std::size_t>(k));
        }
        return goal;
      case Objective::kGoal:
        break;
    }
    return goal;
  };

  std::vector<Seed> seeds;
  const Inputs straight = track(problem, config, v_ref, nominal);
  seeds.push_back({SeedKind::kStraight, straight});

  if (problem.predictions.empty()) {
    for (int i = 1; i < config.seeds; ++i) seeds.push_back({SeedKind::kStraight, straight});
  } else if (config.seeds > 1) {
    // Nearest approach of any predicted human to the straight rollout.
    const States xs = rollout(problem.robot, straight, config.dt);
    double best = std::numeric_limits<double>::infinity();
    Vec2 via_center = Vec2::Zero();
    double heading = problem.robot.theta;
    for (const auto& pred : problem.predictions) {
      for (std::size_t k = 0; k < xs.size(); ++k) {
        const double d = (xs[k].position() - pred.positions[k]).norm();
        if (d < best) {
          best = d;
          via_center = pred.positions[k];
          heading = xs[k].theta;
        }
      }
    }
    const Vec2 dir(std::cos(heading), std::sin(heading));
    const Vec2 left(-dir.y(), dir.x());
    const double offset = 2.0 * (problem.robot_radius + problem.human_radius);
    for (const auto& [kind, side] : {std::pair{SeedKind::kPassLeft, 1.0}, std::pair{SeedKind::kPassRight, -1.0}}) {
      if (static_cast<int>(seeds.size()) >= config.seeds) break;
      const Vec2 via = via_center + side * offset * left;
      bool passed = false;
      seeds.push_back({kind, track(problem, config, v_ref, [&](int k, const RobotState& x) {
                         passed = passed || (via - x.position()).dot(dir) < 0.5 * offset;
                         return passed ? nominal(k, x) : via;
                       })});
    }
    while (static_cast<int>(seeds.size()) < config.seeds) seeds.push_back({SeedKind::kStraight, straight});
  }

  if (previous != nullptr && !previous->inputs.empty()) {
    Inputs shifted(previous->inputs.begin() + 1, previous->inputs.end());
    shifted.push_back(previous->inputs.back());
    shifted.resize(static_cast<std::size_t>(config.horizon), shifted.back());
    project_inputs(shifted, problem.robot.v, config);
    seeds.push_back({SeedKind::kPreviousShifted, std::move(shifted)});
  }
  return seeds;
}

Evaluation evaluate_plan(const MpcProblem& problem, const dsl::CostSpec& spec, const MpcConfig& config,
                         const std::vector<ControlInput>& inputs) {
  const Shooting sh(problem, spec, config);
  const States xs = sh.roll(inputs);
  return {sh.cost(xs, inputs, sh.bind_humans(xs)), sh.violation(xs)};
}

TrajectoryPlan optimize_seed(const MpcProblem& problem, const dsl::CostSpec& spec, const MpcConfig& config,
                             const Seed& seed, int seed_id) {
  const Shooting sh(problem, spec, config);
  constexpr double kArmijo = 1e-4;

  Inputs u = seed.inputs;
  u.resize(static_cast<std::size_t>(sh.horizon()));
  project_inputs(u, problem.robot.v, config);
  States xs = sh.roll(u);
  std::vector<Vec2> oh = sh.bind_humans(xs);
  double mu = config.mu_init;
  double merit = sh.merit(xs, u, oh, mu);
  if (!std::isfinite(merit)) {
    throw CostRejected("cost is not finite at the initial guess");
  }

  TrajectoryPlan plan;
  plan.seed_id = seed_id;
  plan.seed_kind = seed.kind;
  bool converged = false;
  bool have_history = false;
  Inputs prev_u, prev_g;
  int iter = 0;
  int iters_at_mu = 0;
  for (; iter < config.max_iterations; ++iter, ++iters_at_mu) {
    const Inputs g = sh.gradient(xs, u, oh, mu);
    double alpha = std::min(1.0, 0.5 / std::max(max_abs(g), 1e-12));
    if (have_history) {
      const Inputs s = diff(u, prev_u);
      const Inputs y = diff(g, prev_g);
      const double sy = dot(s, y);
      if (sy > 0.0) alpha = std::clamp(dot(s, s) / sy, 1e-8, 10.0);
    }

    Inputs step_u = axpy(u, -1.0, g);
    project_inputs(step_u, problem.robot.v, config);
    const bool stationary = max_abs(diff(step_u, u)) <= config.tol_opt * std::abs(merit);

    bool accepted = false;
    if (!stationary) {
      for (int ls = 0; ls < 40; ++ls, alpha *= 0.5) {
        Inputs trial = axpy(u, -alpha, g);
        project_inputs(trial, problem.robot.v, config);
        const Inputs d = diff(trial, u);
        const double slope = dot(g, d);
        if (!(slope < 0.0)) break;
        const States trial_xs = sh.roll(trial);
        const double trial_merit = sh.merit(trial_xs, trial, oh, mu);
        if (std::isfinite(trial_merit) && trial_merit <= merit + kArmijo * slope) {
          plan.merit_trace.push_back({merit, trial_merit, mu});
          prev_u = std::move(u);
          prev_g = g;
          have_history = true;
          u = std::move(trial);
          xs = trial_xs;
          accepted = true;
          break;
        }
      }
    }

    const double violation = accepted ? 0.0 : sh.violation(xs);
    if (accepted) {
      oh = sh.bind_humans(xs);
      merit = sh.merit(xs, u, oh, mu);
      if (!std::isfinite(merit)) throw CostRejected("cost became non-finite during optimization");
      // Slow progress on an infeasible iterate: tighten the penalty early.
      if (iters_at_mu < config.iterations_per_mu || mu >= config.mu_max || sh.violation(xs) <= config.tol_g) {
        continue;
      }
    } else if (violation <= config.tol_g) {
      // No further progress at this penalty level and feasible.
      converged = true;
      ++iter;
      break;
    }
    if (mu >= config.mu_max) {
      ++iter;
      break;
    }
    mu = std::min(mu * config.mu_growth, config.mu_max);
    merit = sh.merit(xs, u, oh, mu);
    have_history = false;
    iters_at_mu = -1;
  }

  plan.iterations = iter;
  plan.states = std::move(xs);
  plan.inputs = std::move(u);
  plan.cost = sh.cost(plan.states, plan.inputs, sh.bind_humans(plan.states));
  if (!std::isfinite(plan.cost)) throw CostRejected("cost is not finite at the solution");
  plan.max_violation = sh.violation(plan.states);
  if (plan.max_violation > config.tol_g) {
    plan.status = PlanStatus::kInfeasible;
  } else {
    plan.status = converged ? PlanStatus::kConverged : PlanStatus::kMaxIter;
  }
  return plan;
}

SolveResult solve(const MpcProblem& problem, const dsl::CostSpec& spec, const MpcConfig& config,
                  const std::vector<Seed>& seeds) {
  if (seeds.empty()) throw InvalidConfig("solve needs at least one seed");
  std::vector<TrajectoryPlan> plans(seeds.size());
  // Identical seeds yield identical plans; optimize each distinct one once.
  std::vector<int> source(seeds.size());
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    source[i] = static_cast<int>(i);
    for (std::size_t j = 0; j < i; ++j) {
      if (seeds[j].kind == seeds[i].kind && same_inputs(seeds[j].inputs, seeds[i].inputs)) {
        source[i] = source[j];
        break;
      }
    }
  }
  if (config.parallel && seeds.size() > 1) {
    std::vector<std::future<TrajectoryPlan>> futures(seeds.size());
    for (std::size_t i = 0; i < seeds.size(); ++i) {
      if (source[i] != static_cast<int>(i)) continue;
      futures[i] = std::async(std::launch::async, [&, i] {
        return optimize_seed(problem, spec, config, seeds[i], static_cast<int>(i));
      });
    }
    for (std::size_t i = 0; i < seeds.size(); ++i) {
      if (futures[i].valid()) plans[i] = futures[i].get();
    }
  } else {
    for (std::size_t i = 0; i < seeds.size(); ++i) {
      if (source[i] == static_cast<int>(i)) plans[i] = optimize_seed(problem, spec, config, seeds[i], static_cast<int>(i));
    }
  }
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    if (source[i] != static_cast<int>(i)) {
      plans[i] = plans[static_cast<std::size_t>(source[i])];
      plans[i].seed_id = static_cast<int>(i);
    }
  }

  std::size_t best = plans.size();
  for (std::size_t i = 0; i < plans.size(); ++i) {
    if (plans[i].status == PlanStatus::kInfeasible) continue;
    if (best == plans.size() || plans[i].cost < plans[best].cost) best = i;
  }
  SolveResult result;
  if (best == plans.size()) {
    best = 0;
    for (std::size_t i = 1; i < plans.size(); ++i) {
      if (plans[i].max_violation < plans[best].max_violation) best = i;
    }
    result.best = plans[best];
    result.command = braking_input(problem.robot, config);
  } else {
    result.best = plans[best];
    result.command = result.best.inputs.front();
  }
  result.plans = std::move(plans);
  return result;
}

}  // namespace langmpc::mpc
