#ifndef LANGMPC_MPC_PROBLEM_HPP_
#define LANGMPC_MPC_PROBLEM_HPP_

#include "langmpc/dsl/cost_spec.hpp"
#include "langmpc/mpc/config.hpp"
#include "langmpc/world/path.hpp"
#include "langmpc/world/scenario.hpp"
#include "langmpc/world/types.hpp"

#include <stdexcept>
#include <vector>

namespace langmpc::mpc {

/// Non-finite cost encountered while evaluating or optimizing; the caller
/// keeps its previous spec.
class CostRejected : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Everything the solver needs about the world at one control step.
struct MpcProblem {
  world::RobotState robot;
  std::vector<world::HumanPrediction> predictions;  // N_k + 1 positions each
  std::vector<world::HalfSpace> half_spaces;
  world::ReferencePath path{{world::Vec2::Zero(), world::Vec2::UnitX()}};
  double robot_radius{world::kDefaultRobotRadius};
  double human_radius{world::kDefaultHumanRadius};
};

/// Snapshot of `scenario` with the robot at `robot` and humans predicted over
/// the configured horizon.
MpcProblem make_problem(const world::Scenario& scenario, const world::RobotState& robot,
                        const std::vector<world::Human>& humans, const MpcConfig& config);

/// g = 1 - |p - o|^2 / r^2 with r = r_r + r_h; satisfied iff g <= 0.
double human_constraint(const world::RobotState& state, const world::Vec2& human, double robot_radius,
                        double human_radius);

/// n . p - b + r_r per half-space; satisfied iff every entry is <= 0.
std::vector<double> corridor_constraints(const world::RobotState& state, const std::vector<world::HalfSpace>& faces,
                                         double robot_radius);
std::vector<double> corridor_constraints(const world::RobotState& state, const world::Scenario& scenario);

/// Contour and lag errors of a position and their (constant) gradients.
struct PathErrors {
  double contour{0.0};
  double lag{0.0};
  world::Vec2 d_contour{world::Vec2::Zero()};  // d e_c / d p
  world::Vec2 d_lag{world::Vec2::Zero()};      // d e_l / d p
};

/**
 * e_c is the offset of p along the path normal at its projection; e_l is
 * s_expected minus the projected arc length, extended linearly past either
 * end of the path.
 */
PathErrors path_errors(const world::ReferencePath& path, const world::Vec2& p, double s_expected);

/// Arc length the robot should have reached at stage k: s_start + k v_ref dt,
/// capped at the path length.
double expected_arc_length(double s_start, double v_ref, double dt, int stage, double path_length);

/**
 * Weighted stage cost at stage k. Contour and lag errors are measured from
 * the projection of the problem's initial robot position; the closest
 * predicted human at stage k binds oh_x / oh_y.
 */
double stage_cost(const dsl::CostSpec& spec, const world::RobotState& state, const world::ControlInput& input,
                  int stage, const MpcProblem& problem, const MpcConfig& config);

}  // namespace langmpc::mpc

#endif  // LANGMPC_MPC_PROBLEM_HPP_
