#include "langmpc/world/dynamics.hpp"
#include "langmpc/world/path.hpp"
#include "langmpc/world/scenario.hpp"

#include "support/oracles.hpp"

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include <numbers>
#include <random>

namespace langmpc::world {
namespace {

constexpr double kPi = std::numbers::pi;

TEST(UnicycleStep, CoastsStraightAlongX) {
  const RobotState s = unicycle_step({0, 0, 0, 1}, {0, 0}, 0.1);
  EXPECT_DOUBLE_EQ(s.x, 0.1);
  EXPECT_DOUBLE_EQ(s.y, 0.0);
  EXPECT_DOUBLE_EQ(s.theta, 0.0);
  EXPECT_DOUBLE_EQ(s.v, 1.0);
}

TEST(UnicycleStep, CoastsStraightAlongY) {
  const RobotState s = unicycle_step({0, 0, kPi / 2, 1}, {0, 0}, 0.1);
  EXPECT_NEAR(s.x, 0.0, 1e-15);
  EXPECT_DOUBLE_EQ(s.y, 0.1);
  EXPECT_DOUBLE_EQ(s.theta, kPi / 2);
  EXPECT_DOUBLE_EQ(s.v, 1.0);
}

TEST(UnicycleStep, AccelerationFromRestMatchesEulerOrder) {
  const RobotState euler = unicycle_step({0, 0, 0, 0}, {1, 0}, 0.1);
  const RobotState ref = testing::rk4_unicycle({0, 0, 0, 0}, {1, 0}, 0.1, 1000);
  EXPECT_DOUBLE_EQ(euler.v, 0.1);
  // Explicit Euler moves with the pre-step speed, so x stays 0; the exact
  // motion is a t^2 / 2 = 0.005, a local error of order dt^2.
  EXPECT_DOUBLE_EQ(euler.x, 0.0);
  EXPECT_NEAR(ref.x, 0.005, 1e-12);
  EXPECT_NEAR(ref.v, 0.1, 1e-12);
}

TEST(UnicycleStep, HalvingDtAtLeastHalvesErrorAgainstRk4) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const RobotState s{u(rng) * 5, u(rng) * 5, u(rng) * kPi, 1.25 + u(rng)};
    const ControlInput in{u(rng) * 3, u(rng) * 1.5};
    const auto error = [&](double dt) {
      const RobotState e = unicycle_step(s, in, dt);
      const RobotState r = testing::rk4_unicycle(s, in, dt, 200);
      return Eigen::Vector4d(e.x - r.x, e.y - r.y, normalize_angle(e.theta - r.theta), e.v - r.v).norm();
    };
    const double e1 = error(0.1);
    const double e2 = error(0.05);
    EXPECT_LE(e2, 0.5 * e1 + 1e-12) << "trial " << trial;
  }
}

TEST(UnicycleStep, HeadingStaysNormalized) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 2000; ++trial) {
    const double theta = kPi + u(rng) * 1e-3 * (trial % 2 == 0 ? 1 : -1);
    const RobotState s = unicycle_step({0, 0, normalize_angle(theta), 1}, {0, u(rng) * 1.5}, 0.1);
    EXPECT_GT(s.theta, -kPi);
    EXPECT_LE(s.theta, kPi);
  }
  EXPECT_DOUBLE_EQ(normalize_angle(-kPi), kPi);
  EXPECT_DOUBLE_EQ(normalize_angle(3 * kPi), kPi);
  EXPECT_NEAR(normalize_angle(2 * kPi + 0.25), 0.25, 1e-15);
}

TEST(PredictHumans, LinearExtrapolation) {
  const auto preds = predict_humans({Human{0, {0, 0}, {1, 0}, 0.3}}, 3, 0.5);
  ASSERT_EQ(preds.size(), 1u);
  ASSERT_EQ(preds[0].positions.size(), 4u);
  for (int k = 0; k < 4; ++k) {
    EXPECT_DOUBLE_EQ(preds[0].positions[k].x(), 0.5 * k);
    EXPECT_DOUBLE_EQ(preds[0].positions[k].y(), 0.0);
  }
}

TEST(PredictHumans, StationaryHumanStaysPut) {
  const auto preds = predict_humans({Human{3, {2, -1}, {0, 0}, 0.3}}, 5, 0.1);
  for (const auto& p : preds[0].positions) {
    EXPECT_EQ(p, Vec2(2, -1));
  }
}

TEST(PredictHumans, IndependentSequencesInOrder) {
  const std::vector<Human> humans{{4, {0, 0}, {1, 0}, 0.3}, {9, {5, 5}, {0, -1}, 0.3}};
  const auto preds = predict_humans(humans, 10, 0.1);
  ASSERT_EQ(preds.size(), 2u);
  EXPECT_EQ(preds[0].id, 4);
  EXPECT_EQ(preds[1].id, 9);
  for (int k = 0; k <= 10; ++k) {
    // exact closed form, no accumulated rounding
    EXPECT_EQ(preds[0].positions[k], humans[0].position + (k * 0.1) * humans[0].velocity);
    EXPECT_EQ(preds[1].positions[k], humans[1].position + (k * 0.1) * humans[1].velocity);
  }
}

TEST(PathProject, AxisAligned) {
  const ReferencePath path({{0, 0}, {10, 0}});
  const auto p = path_project(path, {3, 2});
  EXPECT_DOUBLE_EQ(p.s, 3.0);
  EXPECT_EQ(p.closest, Vec2(3, 0));
  EXPECT_EQ(p.tangent, Vec2(1, 0));
  EXPECT_EQ(p.normal, Vec2(0, 1));
}

TEST(PathProject, ClampsBeyondEnd) {
  const ReferencePath path({{0, 0}, {10, 0}});
  const auto p = path_project(path, {14, -1});
  EXPECT_DOUBLE_EQ(p.s, 10.0);
  EXPECT_EQ(p.closest, Vec2(10, 0));
}

TEST(PathProject, CornerBisectorPrefersLowerArcLength) {
  // Right-angle path; (0.5, 0.5) is equidistant (0.5) from both legs.
  const ReferencePath path({{0, 0}, {1, 0}, {1, 1}});
  const auto p = path_project(path, {0.5, 0.5});
  EXPECT_EQ(p.segment, 0u);
  EXPECT_DOUBLE_EQ(p.s, 0.5);
  EXPECT_EQ(p.closest, Vec2(0.5, 0));
}

TEST(PathProject, GlobalMinimumAgainstBruteForce) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Vec2> wp;
    const int n = 2 + trial % 6;
    for (int i = 0; i < n; ++i) wp.emplace_back(u(rng), u(rng));
    const ReferencePath path(wp);
    const Vec2 q(u(rng), u(rng));
    const auto proj = path_project(path, q);
    const double brute = testing::brute_force_distance(path, q, 1000);
    EXPECT_LE((q - proj.closest).norm(), brute + 1e-12);
    EXPECT_NEAR((q - proj.closest).norm(), brute, 0.02);
    EXPECT_NEAR(proj.tangent.norm(), 1.0, 1e-12);
    EXPECT_NEAR(proj.tangent.dot(proj.normal), 0.0, 1e-12);
    EXPECT_NEAR((path.point_at(proj.s) - proj.closest).norm(), 0.0, 1e-9);
  }
}

TEST(ReferencePath, RejectsDegenerateInput) {
  EXPECT_THROW(ReferencePath({{0, 0}}), InvalidWorld);
  EXPECT_THROW(ReferencePath({{0, 0}, {0, 0}}), InvalidWorld);
  const ReferencePath path({{0, 0}, {3, 4}, {3, 5}});
  EXPECT_DOUBLE_EQ(path.length(), 6.0);
  EXPECT_EQ(path.arc_lengths(), (std::vector<double>{0, 5, 6}));
}

TEST(Scenario, ShippedScenariosLoad) {
  for (const char* name : {"corridor.json", "open.json"}) {
    const Scenario sc = load_scenario(std::string(LANGMPC_DATA_DIR) + "/scenarios/" + name);
    EXPECT_NO_THROW(sc.validate());
    const Scenario again = scenario_from_json(scenario_to_json(sc));
    EXPECT_EQ(scenario_to_json(again), scenario_to_json(sc));
  }
  const Scenario corridor = load_scenario(std::string(LANGMPC_DATA_DIR) + "/scenarios/corridor.json");
  EXPECT_EQ(corridor.humans_init.size(), 4u);
  const Scenario open = load_scenario(std::string(LANGMPC_DATA_DIR) + "/scenarios/open.json");
  EXPECT_EQ(open.humans_init.size(), 6u);
}

TEST(Scenario, RejectsInfeasibleStart) {
  auto doc = scenario_to_json(load_scenario(std::string(LANGMPC_DATA_DIR) + "/scenarios/corridor.json"));
  doc["robot_start"]["y"] = 1.9;  // inside the inflated wall
  EXPECT_THROW(scenario_from_json(doc), InvalidWorld);
  EXPECT_THROW(load_scenario("/nonexistent/scenario.json"), InvalidWorld);
}

}  // namespace
}  // namespace langmpc::world
