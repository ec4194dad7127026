// Copyright (c) 2026 The pivoplan Authors. All rights reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>

#include "pivoplan/harness.hpp"
#include "pivoplan/planner.hpp"

namespace pivoplan
{
namespace
{

SceneDescription load(const std::string & name)
{
  return load_scene(std::string(PIVOPLAN_SCENE_DIR) + "/" + name);
}

std::shared_ptr<const SceneDescription> desk_at(double height)
{
  return scene_with_support_height(load("desk.yaml"), "desk", height);
}

PlanRequest desk_request(double height, GraspAngle start, GraspAngle goal, bool pivoting = true)
{
  return make_request(desk_at(height), "E", "desk", start, goal, pivoting);
}

std::size_t count_prefix(const std::vector<Constraint> & rows, const std::string & prefix)
{
  return static_cast<std::size_t>(std::count_if(
           rows.begin(), rows.end(),
           [&](const Constraint & c) {return c.name.rfind(prefix, 0) == 0;}));
}

// Configuration at home with the gravity direction chosen relative to the CoG vector.
struct VerticalityFixture
{
  SceneDescription scene = load("desk.yaml");
  KinematicModel model = planning_model(scene, "E");
  Configuration q = model.zero_configuration();
  Vec3 c;

  VerticalityFixture()
  {
    q.head(scene.robot.home.size()) = scene.robot.home;
    const auto poses = model.link_poses(q);
    c = poses[model.link_index(kObjectLink)].linear() * model.object_cog_offset();
  }
};

TEST(VerticalityError, AlignedIsZero)
{
  VerticalityFixture f;
  EXPECT_NEAR(verticality_error(f.model, f.q, 9.81 * f.c.normalized()), 0.0, 1e-7);
}

TEST(VerticalityError, OrthogonalIsHalfPi)
{
  VerticalityFixture f;
  const Vec3 g = f.c.unitOrthogonal() * 9.81;
  EXPECT_NEAR(verticality_error(f.model, f.q, g), kPi / 2.0, 1e-12);
}

TEST(VerticalityError, MatchesDotProductIdentity)
{
  VerticalityFixture f;
  const Vec3 cn = f.c.normalized();
  const Vec3 perp = cn.unitOrthogonal();
  const Vec3 g = 9.81 * (std::cos(0.3) * cn + std::sin(0.3) * perp);
  EXPECT_NEAR(verticality_error(f.model, f.q, g), 0.3, 1e-12);
  EXPECT_NEAR(std::acos(cn.dot(g.normalized())), 0.3, 1e-12);
}

TEST(VerticalityError, RequiresPivot)
{
  const auto scene = load("desk.yaml");
  EXPECT_THROW(
    verticality_error(scene.robot.model, scene.robot.home, scene.gravity), PlanningError);
}

TEST(BuildConstraints, EmptySceneInventory)
{
  auto scene = std::make_shared<SceneDescription>(load("desk.yaml"));
  scene->obstacles.clear();
  scene->robot.collision.self_pairs.clear();
  for (const auto & g : scene->robot.model.geometry()) {
    scene->robot.collision.object_ignore.push_back(g.link);
  }
  PlanRequest req;
  req.scene = scene;
  req.object = "E";
  req.goal_pose.translation() = Vec3(1.0, 0.0, 1.0);
  const KinematicModel model = planning_model(*scene, "E");
  Configuration q = model.zero_configuration();
  q.head(scene->robot.home.size()) = scene->robot.home;
  const auto rows = build_constraints(req, model, q);

  std::size_t limited = 0;
  for (const auto & j : model.joints()) {
    limited += j.limits ? 1 : 0;
  }
  EXPECT_EQ(count_prefix(rows, "goal_pos_") + count_prefix(rows, "goal_rot_"), 6u);
  EXPECT_EQ(count_prefix(rows, "verticality"), 1u);
  EXPECT_EQ(count_prefix(rows, "goal_angle"), 0u);
  EXPECT_EQ(count_prefix(rows, "collision:"), 0u);
  EXPECT_EQ(rows.size(), 7u + limited + model.dof());

  // The verticality row outranks every goal row.
  double goal_weight = 0.0;
  double vert_weight = 0.0;
  for (const auto & r : rows) {
    if (r.name.rfind("goal_", 0) == 0) {
      goal_weight = std::max(goal_weight, r.weight);
    }
    if (r.name == "verticality") {
      vert_weight = r.weight;
    }
  }
  EXPECT_GT(vert_weight, goal_weight);
}

TEST(BuildConstraints, FixedAngleAndPivotLockRows)
{
  auto req = desk_request(0.72, 0.0, -kPi / 4.0);
  const KinematicModel model = planning_model(*req.scene, "E");
  Configuration q = model.zero_configuration();
  q.head(req.scene->robot.home.size()) = req.scene->robot.home;
  EXPECT_EQ(count_prefix(build_constraints(req, model, q), "goal_angle"), 1u);

  req.pivoting_enabled = false;
  const auto rows = build_constraints(req, model, q);
  EXPECT_EQ(count_prefix(rows, "verticality"), 0u);
  ASSERT_EQ(count_prefix(rows, "pivot_lock"), 1u);
  for (const auto & r : rows) {
    if (r.name == "pivot_lock") {
      EXPECT_TRUE(r.hard);
      EXPECT_EQ(r.lower_rate, 0.0);
      EXPECT_EQ(r.upper_rate, 0.0);
    }
  }
}

TEST(BuildConstraints, CollisionRowsMatchActivePairs)
{
  const auto scene = std::make_shared<const SceneDescription>(load("shelf.yaml"));
  const auto req = make_request(scene, "B", "layer_060", 0.0, -kPi / 2.0, true);
  const KinematicModel model = planning_model(*scene, "B");
  // The pre-place pose keeps the object clear of the layer, so IK accepts it.
  const auto q = grasp_configuration(model, *scene, req.waypoints.back(), -kPi / 2.0);
  ASSERT_TRUE(q);
  const auto pairs = min_distance_robot_scene(model, *q, *scene);
  const auto rows = build_constraints(req, model, *q);
  EXPECT_GT(pairs.size(), 0u);
  EXPECT_EQ(count_prefix(rows, "collision:"), pairs.size());
  EXPECT_GE(rows.size(), 30u);
  EXPECT_LE(rows.size(), 300u);
}

TEST(Plan, LowDeskVerticalGraspSucceeds)
{
  const auto result = plan(desk_request(0.2, 0.0, 0.0));
  ASSERT_EQ(result.outcome, PlanOutcome::success) << result.detail;
  ASSERT_TRUE(result.trajectory);
  const Trajectory & traj = *result.trajectory;

  const auto scene = desk_at(0.2);
  const auto & req_scene = *scene;
  const KinematicModel model = planning_model(req_scene, "E");
  const auto poses = task_poses(req_scene, "E", "desk");
  const Transform end = model.link_poses(traj.samples.back())[model.link_index(kObjectLink)];
  EXPECT_LT((end.translation() - poses.goal.translation()).norm(), 0.005);
  EXPECT_LT(rotation_error(poses.goal.linear(), end.linear()).norm(), 0.01);

  const TrajectoryCheck check = check_trajectory(req_scene, "E", traj);
  // Zero only where the object rests on the floor at the pick.
  EXPECT_GE(check.min_clearance, -1e-9);
  EXPECT_LE(check.max_verticality, 0.05);
  EXPECT_LE(check.max_velocity_excess, 1e-6);
  for (std::size_t k = 1; k < traj.times.size(); ++k) {
    EXPECT_NEAR(traj.times[k] - traj.times[k - 1], traj.timestep, 1e-9);
  }
}

TEST(Plan, HighDeskFixedEqualAnglesFail)
{
  for (double a : {-kPi / 4.0, 0.0, kPi / 4.0}) {
    EXPECT_NE(plan(desk_request(1.31, a, a)).outcome, PlanOutcome::success) << a;
  }
}

TEST(Plan, HighDeskFreeGoalTiltsTheGrasp)
{
  const auto result = plan(desk_request(1.31, 0.0, std::nullopt));
  ASSERT_EQ(result.outcome, PlanOutcome::success) << result.detail;
  // The tool has to point upward to reach over the desk edge.
  EXPECT_LT(result.chosen_goal_angle, -kPi / 2.0);
  EXPECT_NEAR(result.chosen_goal_angle, -1.76, 0.25);
}

TEST(Plan, DisabledPivotKeepsTheVirtualJointFixed)
{
  const auto result = plan(desk_request(0.2, kPi / 4.0, kPi / 4.0, false));
  ASSERT_EQ(result.outcome, PlanOutcome::success) << result.detail;
  const auto pivot = static_cast<Eigen::Index>(*result.trajectory->pivot_index);
  for (const auto & q : result.trajectory->samples) {
    EXPECT_NEAR(q(pivot), kPi / 4.0, 1e-9);
  }
  EXPECT_EQ(
    plan(desk_request(0.2, 0.0, kPi / 4.0, false)).outcome, PlanOutcome::infeasible_goal);
}

TEST(Plan, UnreachableStartIsReported)
{
  EXPECT_EQ(plan(desk_request(0.2, kPi / 2.0, 0.0)).outcome, PlanOutcome::infeasible_start);
}

TEST(Plan, RejectsInvalidRequests)
{
  auto req = desk_request(0.2, 0.0, 0.0);
  req.timestep = 0.0;
  EXPECT_THROW(plan(req), PlanningError);
  req = desk_request(0.2, 4.0, 0.0);
  EXPECT_THROW(plan(req), PlanningError);
  req.scene.reset();
  EXPECT_THROW(plan(req), PlanningError);
}

TEST(Plan, TimeoutWhenBudgetIsTooShort)
{
  auto req = desk_request(0.2, 0.0, 0.0);
  req.max_duration = 1.0;
  EXPECT_EQ(plan(req).outcome, PlanOutcome::timeout);
}

}  // namespace
}  // namespace pivoplan
