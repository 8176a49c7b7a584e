#include "langmpc/mpc/problem.hpp"

#include "langmpc/world/dynamics.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace langmpc::mpc {

MpcProblem make_problem(const world::Scenario& scenario, const world::RobotState& robot,
                        const std::vector<world::Human>& humans, const MpcConfig& config) {
  MpcProblem p;
  p.robot = robot;
  p.predictions = world::predict_humans(humans, config.horizon, config.dt);
  p.half_spaces = scenario.half_spaces();
  p.path = scenario.reference_path;
  p.robot_radius = scenario.robot_radius;
  p.human_radius = scenario.human_radius;
  return p;
}

double human_constraint(const world::RobotState& state, const world::Vec2& human, double robot_radius,
                        double human_radius) {
  const double r = robot_radius + human_radius;
  const world::Vec2 d = state.position() - human;
  return 1.0 - d.dot(d) / (r * r);
}

std::vector<double> corridor_constraints(const world::RobotState& state, const std::vector<world::HalfSpace>& faces,
                                         double robot_radius) {
  std::vector<double> out;
  out.reserve(faces.size());
  const world::Vec2 p = state.position();
  for (const auto& f : faces) {
    out.push_back(f.normal.dot(p) - f.offset + robot_radius);
  }
  return out;
}

std::vector<double> corridor_constraints(const world::RobotState& state, const world::Scenario& scenario) {
  return corridor_constraints(state, scenario.half_spaces(), scenario.robot_radius);
}

PathErrors path_errors(const world::ReferencePath& path, const world::Vec2& p, double s_expected) {
  const world::PathProjection proj = world::path_project(path, p);
  const world::Vec2 offset = p - proj.closest;
  PathErrors e;
  e.contour = proj.normal.dot(offset);
  e.lag = s_expected - (proj.s + proj.tangent.dot(offset));
  e.d_contour = proj.normal;
  e.d_lag = -proj.tangent;
  return e;
}

double expected_arc_length(double s_start, double v_ref, double dt, int stage, double path_length) {
  return std::min(s_start + static_cast<double>(stage) * v_ref * dt, path_length);
}

double stage_cost(const dsl::CostSpec& spec, const world::RobotState& state, const world::ControlInput& input,
                  int stage, const MpcProblem& problem, const MpcConfig& config) {
  const dsl::Tape tape = dsl::compile_stage_cost(spec);
  const double v_ref = spec.params.find("v_ref").value_or(0.0);
  const double s_start = world::path_project(problem.path, problem.robot.position()).s;
  const PathErrors pe = path_errors(
      problem.path, state.position(), expected_arc_length(s_start, v_ref, config.dt, stage, problem.path.length()));
  const world::Vec2 oh =
      dsl::closest_human_binding(state.position(), problem.predictions, static_cast<std::size_t>(stage));

  std::array<double, dsl::kVariableCount> slots{};
  using dsl::Variable;
  slots[static_cast<int>(Variable::kPx)] = state.x;
  slots[static_cast<int>(Variable::kPy)] = state.y;
  slots[static_cast<int>(Variable::kTheta)] = state.theta;
  slots[static_cast<int>(Variable::kV)] = state.v;
  slots[static_cast<int>(Variable::kA)] = input.a;
  slots[static_cast<int>(Variable::kOmega)] = input.omega;
  slots[static_cast<int>(Variable::kOhX)] = oh.x();
  slots[static_cast<int>(Variable::kOhY)] = oh.y();
  slots[static_cast<int>(Variable::kContourError)] = pe.contour;
  slots[static_cast<int>(Variable::kLagError)] = pe.lag;
  const double value = tape.run<double>(std::span<const double>(slots),
                                        dsl::EvalOptions{.sigmoid_if_else = config.sigmoid_if_else});
  if (!std::isfinite(value)) {
    throw CostRejected("stage cost is not finite");
  }
  return value;
}

}  // namespace langmpc::mpc
