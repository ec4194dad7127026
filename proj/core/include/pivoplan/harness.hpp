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

#ifndef PIVOPLAN__HARNESS_HPP_
#define PIVOPLAN__HARNESS_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pivoplan/grasp_control.hpp"
#include "pivoplan/modality_switch.hpp"
#include "pivoplan/planner.hpp"
#include "pivoplan/scene.hpp"
#include "pivoplan/slider_sim.hpp"

namespace pivoplan
{

enum class ExperimentKind
{
  stability,
  desk,
  shelf,
  sensitivity,
};

struct ExperimentSpec
{
  ExperimentKind kind = ExperimentKind::desk;
  std::filesystem::path scene_path;
  std::vector<GraspAngle> angle_grid;   // empty: default grid
  std::vector<double> heights;          // empty: experiment default
  std::vector<std::string> objects;     // empty: scene task mapping
  std::map<std::string, double> mu_override;
  std::uint64_t seed = 1;
  bool pivoting_enabled = true;
  double threshold = 0.01;
  std::filesystem::path out_dir;        // empty: no files written
};

/// {-pi/2, -pi/4, 0, pi/4, pi/2, free}.
std::vector<GraspAngle> default_angle_grid();
/// Accepts "free", "-pi/2", "pi/4", "0", "-1.2", ...; throws std::invalid_argument.
GraspAngle parse_angle(const std::string & text);
std::string angle_label(const GraspAngle & angle);

struct MatrixCell
{
  PlanOutcome outcome = PlanOutcome::infeasible_start;
  double duration_s = 0.0;        // trajectory length
  double planning_time_s = 0.0;   // wall clock, not reproducible
  double start_angle = 0.0;
  double goal_angle = 0.0;
  std::size_t max_rows = 0;
  bool gray = false;              // equal fixed angles: no pivoting needed

  bool success() const {return outcome == PlanOutcome::success;}
};

struct FeasibilityMatrix
{
  std::string label;
  std::string support;
  std::string object;
  double height = 0.0;
  bool pivoting_enabled = true;
  std::vector<GraspAngle> rows;  // start angles
  std::vector<GraspAngle> cols;  // goal angles
  std::vector<std::vector<MatrixCell>> cells;
  std::vector<std::vector<std::optional<Trajectory>>> trajectories;

  /// Cell text: trajectory duration, chosen free angles in parentheses, "-" on failure.
  std::string to_csv() const;
  std::string to_text() const;
};

/// Copy of `scene` whose support box is resized so its top sits at `height`; boxes resting on it move along.
std::shared_ptr<const SceneDescription> scene_with_support_height(
  const SceneDescription & scene, const std::string & support, double height);

/// Shelf layer (role "shelf_layer") whose top is closest to `height`; throws SceneError beyond 5 cm.
const BoxObstacle & layer_at(const SceneDescription & scene, double height);

struct TaskPoses
{
  Transform pick = Transform::Identity();
  std::vector<Transform> waypoints;
  Transform goal = Transform::Identity();
};

/// Pick on the floor, lift, pre-place and place poses for `object` on `support`.
TaskPoses task_poses(
  const SceneDescription & scene, const std::string & object, const std::string & support);

PlanRequest make_request(
  std::shared_ptr<const SceneDescription> scene, const std::string & object,
  const std::string & support, GraspAngle start, GraspAngle goal, bool pivoting_enabled);

FeasibilityMatrix run_grid(
  std::shared_ptr<const SceneDescription> scene, const std::string & object,
  const std::string & support, const std::vector<GraspAngle> & angles, bool pivoting_enabled,
  const std::string & label, double height);

struct TrajectoryCheck
{
  double min_clearance = kInf;
  double max_verticality = 0.0;
  double max_velocity_excess = 0.0;
};

/// Re-validates every sample of a planned trajectory.
TrajectoryCheck check_trajectory(
  const SceneDescription & scene, const std::string & object, const Trajectory & traj);

/// 500 Hz gripper motion about the pivot axis plus the observation stream for the dispatcher.
struct ExecutionTrack
{
  std::vector<double> times;
  std::vector<GripperMotion> gripper;
  std::vector<Configuration> observed;
  double initial_theta = 0.0;
  Trajectory plan;  // planner-rate reference used for the schedule
};

ExecutionTrack track_from_trajectory(
  const SceneDescription & scene, const std::string & object, const Trajectory & traj);

struct ExecutionOptions
{
  LimitSurfaceParams controller;
  LimitSurfaceParams truth;
  std::uint64_t seed = 1;
  double noise_ft = 0.05;    // N, uniform half-width
  double noise_tau = 0.002;  // N m
  double actuator_lag = 0.03;  // s
  double settle_time = 0.5;
  double release_time = 1.0;
  double initial_offset = 0.0;
  ScheduleOptions schedule;
};

struct ExecutionSample
{
  double t = 0.0;
  double theta = 0.0;
  double deviation = 0.0;
  double fn = 0.0;       // applied (after the actuator lag)
  double fn_cmd = 0.0;
  double fn_SA = 0.0;
  double fn_GP = 0.0;
  double ft = 0.0;
  double tau = 0.0;
  double v_j = 0.0;
  Modality modality = Modality::slipping_avoidance;
};

struct ExecutionResult
{
  std::vector<ExecutionSample> samples;
  SwitchSchedule schedule;
  DispatchReport dispatch;
  double final_deviation = 0.0;
  double max_deviation = 0.0;
  bool slipped_out = false;
  double slip_time = -1.0;
  double motion_end = 0.0;
};

/// Closed-loop replay: dispatcher, grasp controller, first-order actuator and slider.
ExecutionResult execute_track(
  const ExecutionTrack & track, const ObjectModel & object, const ExecutionOptions & options);

/// CSV columns t,theta,deviation,fn,fn_cmd,fn_SA,fn_GP,ft,tau,v_j,modality.
std::string execution_csv(const ExecutionResult & result);

/// Python/matplotlib script plotting the forces with gray GP bands.
std::string plot_script(
  const std::string & trace_file, const std::string & schedule_file, const std::string & title);

/// Writes trace_<name>.csv, schedule_<name>.csv and plot_<name>.py.
void write_execution(
  const std::filesystem::path & dir, const std::string & name, const ExecutionResult & result);

struct StabilityRun
{
  bool fast = false;
  double initial_offset = 0.0;
  double final_deviation = 0.0;
  double max_deviation = 0.0;
  bool dropped = false;
};

struct StabilityReport
{
  std::vector<StabilityRun> runs;
  double mean_slow = 0.0;
  double max_slow = 0.0;
  double mean_fast = 0.0;
  double max_fast = 0.0;
  std::size_t drops = 0;
};

/**
 * @brief Tool-frame motion set for the stability experiment.
 *
 * Translations along and rotations about the three tool axes, then a
 * pi/2 rotation about the pivot axis. `fast` shortens every move.
 */
ExecutionTrack stability_track(bool fast, double initial_offset);

StabilityRun run_stability_case(
  const SceneDescription & scene, const std::string & object, bool fast, double initial_offset,
  std::uint64_t seed, bool noise);

StabilityReport run_stability(const ExperimentSpec & spec, const SceneDescription & scene);

enum class SensitivityOutcome
{
  ok,
  pivot_failure,
  drop,
};

const char * to_string(SensitivityOutcome outcome);

struct SensitivityCase
{
  std::string object;
  std::string support;
  double mu_controller = 0.0;
  double mu_true = 0.0;
  SensitivityOutcome outcome = SensitivityOutcome::ok;
  double final_deviation = 0.0;
  bool slipped_out = false;
  double slip_time = -1.0;
  double fn_after_release = 0.0;  // max commanded force from 0.2 s to 0.7 s after a drop
  ExecutionResult execution;
};

/// Pivot failure above this final deviation (rad).
inline constexpr double kPivotFailureDeviation = 0.5;

SensitivityCase replay_with_mu(
  const SceneDescription & scene, const std::string & object, const std::string & support,
  const Trajectory & traj, double mu_controller, std::uint64_t seed);

/// Free-angle shelf plan for `object` on `support`; nullopt when planning fails.
std::optional<Trajectory> shelf_plan(
  std::shared_ptr<const SceneDescription> scene, const std::string & object,
  const std::string & support);

std::vector<SensitivityCase> run_sensitivity(const ExperimentSpec & spec, const SceneDescription & scene);

std::vector<FeasibilityMatrix> run_desk(const ExperimentSpec & spec, const SceneDescription & scene);
std::vector<FeasibilityMatrix> run_shelf(const ExperimentSpec & spec, const SceneDescription & scene);

}  // namespace pivoplan

#endif  // PIVOPLAN__HARNESS_HPP_
