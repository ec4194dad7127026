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

#include <cmath>
#include <memory>
#include <string>

#include "pivoplan/harness.hpp"

namespace pivoplan
{
namespace
{

SceneDescription load(const std::string & name)
{
  return load_scene(std::string(PIVOPLAN_SCENE_DIR) + "/" + name);
}

TEST(ParseAngle, AcceptedForms)
{
  EXPECT_FALSE(parse_angle("free").has_value());
  EXPECT_FALSE(parse_angle(" Free ").has_value());
  EXPECT_NEAR(*parse_angle("-pi/2"), -kPi / 2.0, 1e-15);
  EXPECT_NEAR(*parse_angle("pi/4"), kPi / 4.0, 1e-15);
  EXPECT_NEAR(*parse_angle("pi"), kPi, 1e-15);
  EXPECT_NEAR(*parse_angle("3*pi/4"), 0.75 * kPi, 1e-15);
  EXPECT_EQ(*parse_angle("0"), 0.0);
  EXPECT_EQ(*parse_angle("-1.2"), -1.2);
}

TEST(ParseAngle, RejectsGarbage)
{
  EXPECT_THROW(parse_angle(""), std::invalid_argument);
  EXPECT_THROW(parse_angle("1.2rad"), std::invalid_argument);
  EXPECT_THROW(parse_angle("2pi"), std::invalid_argument);
  EXPECT_THROW(parse_angle("abc"), std::invalid_argument);
}

TEST(AngleLabel, RoundTripsTheDefaultGrid)
{
  const auto grid = default_angle_grid();
  ASSERT_EQ(grid.size(), 6u);
  for (const auto & a : grid) {
    const auto back = parse_angle(angle_label(a));
    ASSERT_EQ(back.has_value(), a.has_value());
    if (a) {
      EXPECT_NEAR(*back, *a, 1e-12);
    }
  }
  EXPECT_EQ(angle_label(std::nullopt), "free");
  EXPECT_EQ(angle_label(-kPi / 2.0), "-pi/2");
  EXPECT_EQ(angle_label(0.3), "0.3000");
}

TEST(SupportHeight, ResizesFromTheBottomAndCarriesBoxes)
{
  const auto base = load("desk.yaml");
  const auto scene = scene_with_support_height(base, "desk", 1.31);
  const auto & desk0 = base.obstacle("desk");
  const auto & desk1 = scene->obstacle("desk");
  EXPECT_NEAR(desk1.top(), 1.31, 1e-12);
  EXPECT_NEAR(
    desk1.pose.translation().z() - desk1.half_extents.z(),
    desk0.pose.translation().z() - desk0.half_extents.z(), 1e-12);
  const double lift = desk1.top() - desk0.top();
  const auto & tray0 = base.obstacle("desk_tray");
  const auto & tray1 = scene->obstacle("desk_tray");
  EXPECT_NEAR(tray1.pose.translation().z() - tray0.pose.translation().z(), lift, 1e-12);
  EXPECT_EQ(
    scene->obstacle("floor").pose.translation(), base.obstacle("floor").pose.translation());
  EXPECT_NO_THROW(scene->validate());
}

TEST(SupportHeight, Errors)
{
  const auto base = load("desk.yaml");
  EXPECT_THROW(scene_with_support_height(base, "nope", 1.0), SceneError);
  EXPECT_THROW(scene_with_support_height(base, "desk", -0.5), SceneError);
}

TEST(LayerAt, FindsShelfLayers)
{
  const auto shelf = load("shelf.yaml");
  EXPECT_EQ(layer_at(shelf, 0.2).name, "layer_020");
  EXPECT_EQ(layer_at(shelf, 0.6).name, "layer_060");
  EXPECT_EQ(layer_at(shelf, 0.93).name, "layer_093");
  EXPECT_EQ(layer_at(shelf, 1.31).name, "layer_131");
  EXPECT_THROW(layer_at(shelf, 0.4), SceneError);
}

TEST(TaskPoses, PickOnTheFloorPlaceOnTheSupport)
{
  const auto shelf = load("shelf.yaml");
  const auto & obj = shelf.object("B");
  const auto & layer = shelf.obstacle("layer_060");
  const auto poses = task_poses(shelf, "B", "layer_060");
  const double rest = obj.half_extents.z() - obj.cog_offset.z();
  EXPECT_NEAR(poses.pick.translation().z(), rest, 1e-12);
  EXPECT_NEAR(
    poses.goal.translation().z(), layer.top() + shelf.task.place_hover + rest, 1e-12);
  EXPECT_NEAR(
    poses.goal.translation().x(), layer.front() + shelf.task.place_depth, 1e-12);
  ASSERT_EQ(poses.waypoints.size(), 2u);
  EXPECT_NEAR(
    poses.waypoints[0].translation().z() - poses.pick.translation().z(), shelf.task.lift, 1e-12);
  EXPECT_TRUE(
    (poses.waypoints[1].translation() - poses.goal.translation()).isApprox(shelf.task.approach));
}

TEST(RunGrid, CsvIsDeterministic)
{
  const auto scene = scene_with_support_height(load("desk.yaml"), "desk", 0.2);
  const std::vector<GraspAngle> angles{0.0, std::nullopt};
  const auto a = run_grid(scene, "E", "desk", angles, true, "desk_0.20", 0.2);
  const auto b = run_grid(scene, "E", "desk", angles, true, "desk_0.20", 0.2);
  EXPECT_EQ(a.to_csv(), b.to_csv());
  ASSERT_EQ(a.cells.size(), 2u);
  ASSERT_EQ(a.cells[0].size(), 2u);
  EXPECT_TRUE(a.cells[0][0].gray);
  EXPECT_TRUE(a.cells[1][1].success());
  EXPECT_FALSE(a.to_text().empty());
}

TEST(Execution, CsvHeader)
{
  ExecutionResult r;
  const std::string csv = execution_csv(r);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "t,theta,deviation,fn,fn_cmd,fn_SA,fn_GP,ft,tau,v_j,modality");
}

}  // namespace
}  // namespace pivoplan
