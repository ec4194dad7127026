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

#ifndef PIVOPLAN__PLANNER_HPP_
#define PIVOPLAN__PLANNER_HPP_

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pivoplan/kinematics.hpp"
#include "pivoplan/qp_solver.hpp"
#include "pivoplan/scene.hpp"

namespace pivoplan
{

class PlanningError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// Grasp angle between the approach axis and the vertical; nullopt lets the planner choose.
using GraspAngle = std::optional<double>;

struct PlannerSettings
{
  double goal_gain = 1.0;       // 1/s
  double goal_margin = 0.05;    // relative width of the rate band
  double goal_weight = 1.0;
  double max_linear_speed = 0.25;   // m/s, commanded object speed cap
  double max_angular_speed = 0.6;   // rad/s
  double linear_acceleration = 0.5;   // m/s^2, speed-cap ramp after each phase switch
  double angular_acceleration = 1.2;  // rad/s^2

  double verticality_gain = 10.0;
  double verticality_weight_ratio = 100.0;

  double collision_gain = 5.0;
  double robot_clearance = 0.02;
  double object_clearance = 0.005;
  double self_clearance = 0.01;
  double max_push_rate = 0.1;  // m/s, cap on the required separation rate

  double position_tolerance = 0.005;
  double orientation_tolerance = 0.01;
  double angle_tolerance = 0.01;
  double waypoint_tolerance = 0.02;

  double stall_window = 2.0;
  double stall_improvement = 1e-4;

  std::size_t start_angle_samples = 17;
  std::size_t ik_iterations = 300;
  QpOptions qp;
};

struct PlanRequest
{
  std::shared_ptr<const SceneDescription> scene;
  std::string object;
  Transform start_pose = Transform::Identity();  // resting object frame at the pick
  GraspAngle start_angle;
  std::vector<Transform> waypoints;              // intermediate object poses
  Transform goal_pose = Transform::Identity();
  GraspAngle goal_angle;
  bool pivoting_enabled = true;
  double timestep = 0.05;
  double max_duration = 60.0;
  PlannerSettings settings;
};

struct Trajectory
{
  std::vector<std::string> joint_names;
  std::optional<std::size_t> pivot_index;
  double timestep = 0.0;
  std::vector<double> times;
  std::vector<Configuration> samples;
  std::vector<std::size_t> phase_starts;  // sample index where each phase begins
  double planning_time_s = 0.0;
  bool converged = false;

  double duration() const {return times.empty() ? 0.0 : times.back() - times.front();}
};

enum class PlanOutcome
{
  success,
  infeasible_start,
  infeasible_goal,
  collision_stuck,
  timeout,
};

const char * to_string(PlanOutcome outcome);

struct PlanResult
{
  PlanOutcome outcome = PlanOutcome::infeasible_start;
  std::optional<Trajectory> trajectory;
  double chosen_start_angle = 0.0;
  double chosen_goal_angle = 0.0;
  std::size_t max_constraint_rows = 0;
  double planning_time_s = 0.0;
  std::string detail;
};

/// The 10-DOF planning model: scene robot plus the virtual pivot carrying `object`.
KinematicModel planning_model(const SceneDescription & scene, const std::string & object);

/// World angle between the grasp-point-to-CoG vector and gravity, in [0, pi].
double verticality_error(const KinematicModel & model, const Configuration & q, const Vec3 & gravity);

/**
 * @brief Assembles every QP row for one step toward `target`.
 *
 * Row order: 6 goal-pose rows, the verticality row (pivoting only), the
 * goal-angle row (fixed goal angle only), the pivot-lock row (pivoting
 * disabled only), one row per active collision pair, then the position-
 * and velocity-limit rows.
 */
std::vector<Constraint> build_constraints(
  const PlanRequest & request, const KinematicModel & model, const Configuration & q,
  const Transform & target);

/// Convenience overload targeting the request's goal pose.
std::vector<Constraint> build_constraints(
  const PlanRequest & request, const KinematicModel & model, const Configuration & q);

/**
 * @brief Places the robot so the held object sits at `object_pose` with the
 * given pivot angle, keeping every collision pair from penetrating.
 *
 * Returns nullopt when the iteration does not converge or gets blocked.
 */
std::optional<Configuration> grasp_configuration(
  const KinematicModel & model, const SceneDescription & scene, const Transform & object_pose,
  double angle, const PlannerSettings & settings = {});

/// Smallest signed distance over all reported pairs (cutoff-limited), +inf when none.
double min_clearance(
  const KinematicModel & model, const Configuration & q, const SceneDescription & scene);

PlanResult plan(const PlanRequest & request);

}  // namespace pivoplan

#endif  // PIVOPLAN__PLANNER_HPP_
