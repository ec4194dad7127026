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

#ifndef PIVOPLAN__SCENE_HPP_
#define PIVOPLAN__SCENE_HPP_

#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "pivoplan/geometry.hpp"
#include "pivoplan/kinematics.hpp"

namespace pivoplan
{

/// Parse or validation failure; what() names the offending entity.
class SceneError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

struct BoxObstacle
{
  std::string name;
  Transform pose = Transform::Identity();
  Vec3 half_extents = Vec3::Zero();
  std::string role;  // "floor", "desk", "shelf_layer", "structure", ...

  double top() const;
  double front() const;  // smallest world x of an axis-aligned box
};

struct ObjectModel
{
  std::string name;
  Vec3 half_extents = Vec3::Zero();
  double mass = 0.0;           // kg
  Vec3 cog_offset = Vec3::Zero();  // grasp point -> CoG, object frame (m)
  double mu = 0.0;
  double inertia_about_pivot = 0.0;  // kg m^2
};

/// Sensor-pad parameters of the limit surface; the object supplies mu.
struct ContactPadParams
{
  double pad_k = 0.01;
  double pad_gamma = 1.0 / 3.0;
  double torsion_c0 = 0.6;
  double fn_min = 0.5;
  double fn_max = 20.0;
};

struct CollisionSettings
{
  double cutoff = 0.3;
  std::vector<std::pair<std::string, std::string>> self_pairs;
  std::vector<std::string> object_ignore;  // links allowed to touch the held object
};

struct RobotDescription
{
  KinematicModel model;
  Configuration home;
  Transform grasp_frame = Transform::Identity();  // fingertip -> object frame at zero pivot
  CollisionSettings collision;
};

/// Pick-and-place layout shared by the desk and shelf experiments.
struct TaskLayout
{
  std::string pick_object;
  Vec3 pick_position = Vec3::Zero();  // grasp point of the resting object
  double pick_yaw = 0.0;
  std::string support;                // obstacle the object is placed on
  double place_depth = 0.15;          // from the support's front face
  double place_lateral = 0.0;
  double place_hover = 0.01;
  double place_yaw = 0.0;
  Vec3 approach = Vec3(0.0, 0.0, 0.1);  // pre-place offset from the goal
  double lift = 0.1;
  double base_standoff = 0.6;
  std::map<std::string, std::string> object_for_support;
};

struct SceneDescription
{
  std::vector<BoxObstacle> obstacles;
  std::vector<ObjectModel> objects;
  RobotDescription robot;
  Vec3 gravity = Vec3(0.0, 0.0, -9.81);
  ContactPadParams contact;
  TaskLayout task;

  const ObjectModel & object(const std::string & name) const;
  const BoxObstacle & obstacle(const std::string & name) const;
  /// Checks every invariant; throws SceneError naming the offending entity.
  void validate() const;
};

struct DistanceResult
{
  double distance = 0.0;     // negative when penetrating
  Vec3 witness_a = Vec3::Zero();
  Vec3 witness_b = Vec3::Zero();
  Vec3 normal = Vec3::UnitZ();  // unit, from b to a
};

/**
 * @brief One reported geometry pair from a robot-scene distance query.
 *
 * Side a is always a robot (or held-object) link. `point_a` is the centre of
 * the closest sample sphere on link a; `point_b` likewise for self pairs.
 * The rate of change of the distance is normal . (J_a(point_a) - J_b(point_b)) qdot.
 */
struct CollisionPair
{
  DistanceResult result;
  std::size_t link_a = 0;
  Vec3 point_a = Vec3::Zero();
  std::optional<std::size_t> link_b;
  Vec3 point_b = Vec3::Zero();
  std::optional<std::size_t> obstacle;
  bool involves_object = false;
  std::string label;
};

SceneDescription load_scene(const std::filesystem::path & path);
SceneDescription parse_scene(const std::string & yaml_text);

DistanceResult sphere_box_distance(const Vec3 & center, double radius, const BoxObstacle & box);
DistanceResult sphere_sphere_distance(
  const Vec3 & center_a, double radius_a, const Vec3 & center_b, double radius_b);

/// Sample spheres (centre in link coordinates, radius) of a capsule: both ends and the middle.
std::vector<std::pair<Vec3, double>> capsule_spheres(const Capsule & capsule);

/// Collision spheres covering a vertical box hanging below the grasp point.
std::vector<Capsule> object_collision_spheres(const ObjectModel & object);

/**
 * @brief Every robot-obstacle, object-obstacle and listed self-collision pair
 * closer than the activation cutoff.
 *
 * One entry per (capsule, obstacle) or (capsule, capsule) geometry pair,
 * reporting its closest sample spheres.
 */
std::vector<CollisionPair> min_distance_robot_scene(
  const KinematicModel & model, const Configuration & q, const SceneDescription & scene,
  std::optional<double> cutoff = std::nullopt);

std::vector<CollisionPair> min_distance_robot_scene(
  const KinematicModel & model, const std::vector<Transform> & poses,
  const SceneDescription & scene, double cutoff);

}  // namespace pivoplan

#endif  // PIVOPLAN__SCENE_HPP_
