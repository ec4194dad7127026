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

#include "pivoplan/planner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

namespace pivoplan
{

namespace
{

struct PoseError
{
  Vec3 position = Vec3::Zero();
  Vec3 rotation = Vec3::Zero();
};

PoseError pose_error(const Transform & current, const Transform & target)
{
  return PoseError{
    current.translation() - target.translation(),
    rotation_error(target.linear(), current.linear())};
}

/// Rate band around -gain * e, shrunk so the commanded vector stays under `cap`.
void proportional_band(
  const Vec3 & e, double gain, double cap, double margin, Vec3 & lower, Vec3 & upper)
{
  Vec3 t = -gain * e;
  const double n = t.norm();
  if (n > cap) {
    t *= cap / n;
  }
  const Vec3 w = margin * t.cwiseAbs();
  lower = t - w;
  upper = t + w;
}

Constraint make_row(
  std::string name, double value, VecX gradient, double lower, double upper, double weight,
  bool hard)
{
  Constraint c;
  c.name = std::move(name);
  c.value = value;
  c.gradient = std::move(gradient);
  c.lower_rate = lower;
  c.upper_rate = upper;
  c.weight = weight;
  c.hard = hard;
  return c;
}

double clearance_for(const CollisionPair & pair, const PlannerSettings & s)
{
  if (pair.obstacle) {
    return pair.involves_object ? s.object_clearance : s.robot_clearance;
  }
  return s.self_clearance;
}

double pivot_angle(const KinematicModel & model, const Configuration & q)
{
  return q(static_cast<Eigen::Index>(*model.pivot_joint_index()));
}

struct StepRows
{
  std::vector<Constraint> rows;
  bool near_contact = false;
};

StepRows assemble(
  const PlanRequest & request, const KinematicModel & model, const Configuration & q,
  const std::vector<Transform> & poses, const Transform & target, double phase_elapsed)
{
  const SceneDescription & scene = *request.scene;
  const PlannerSettings & s = request.settings;
  const auto n = static_cast<Eigen::Index>(model.dof());
  const std::size_t obj = model.link_index(kObjectLink);
  const auto pivot = static_cast<Eigen::Index>(*model.pivot_joint_index());
  const Transform & pose = poses[obj];

  StepRows out;
  out.rows.reserve(128);
  const MatX J = model.point_jacobian(poses, obj, pose.translation());

  const PoseError err = pose_error(pose, target);
  Vec3 lo;
  Vec3 hi;
  static const char * kAxes[] = {"x", "y", "z"};
  const double ramp = phase_elapsed + request.timestep;
  const double v_cap = std::min(s.max_linear_speed, s.linear_acceleration * ramp);
  const double w_cap = std::min(s.max_angular_speed, s.angular_acceleration * ramp);
  proportional_band(err.position, s.goal_gain, v_cap, s.goal_margin, lo, hi);
  for (int i = 0; i < 3; ++i) {
    out.rows.push_back(
      make_row(
        std::string("goal_pos_") + kAxes[i], err.position(i), J.row(i).transpose(), lo(i), hi(i),
        s.goal_weight, false));
  }
  proportional_band(err.rotation, s.goal_gain, w_cap, s.goal_margin, lo, hi);
  for (int i = 0; i < 3; ++i) {
    out.rows.push_back(
      make_row(
        std::string("goal_rot_") + kAxes[i], err.rotation(i), J.row(3 + i).transpose(), lo(i),
        hi(i), s.goal_weight, false));
  }

  if (request.pivoting_enabled) {
    const Vec3 c = pose.linear() * model.object_cog_offset();
    const Vec3 g = scene.gravity.normalized();
    const Vec3 cn = c.normalized();
    const double e = std::acos(std::clamp(cn.dot(g), -1.0, 1.0));
    const Vec3 axis = cn.cross(g);
    VecX grad = VecX::Zero(n);
    if (axis.norm() > 1e-12) {
      grad = -(axis.normalized().transpose() * J.bottomRows<3>()).transpose();
    }
    const double t = -s.verticality_gain * e;
    const double w = s.goal_margin * std::abs(t);
    out.rows.push_back(
      make_row(
        "verticality", e, grad, t - w, t + w, s.verticality_weight_ratio * s.goal_weight,
        false));
  } else {
    VecX grad = VecX::Zero(n);
    grad(pivot) = 1.0;
    out.rows.push_back(make_row("pivot_lock", pivot_angle(model, q), grad, 0.0, 0.0, 0.0, true));
  }

  if (request.goal_angle && request.pivoting_enabled) {
    VecX grad = VecX::Zero(n);
    grad(pivot) = 1.0;
    const double e = pivot_angle(model, q) - *request.goal_angle;
    double t = -s.goal_gain * e;
    t = std::clamp(t, -w_cap, w_cap);
    const double w = s.goal_margin * std::abs(t);
    out.rows.push_back(make_row("goal_angle", e, grad, t - w, t + w, s.goal_weight, false));
  }

  for (const auto & pair : min_distance_robot_scene(model, poses, scene, scene.robot.collision.cutoff)) {
    const double d = pair.result.distance;
    const double d_safe = clearance_for(pair, s);
    const Vec3 & normal = pair.result.normal;
    VecX grad = (normal.transpose() *
      model.point_jacobian(poses, pair.link_a, pair.point_a).topRows<3>()).transpose();
    if (pair.link_b) {
      grad -= (normal.transpose() *
        model.point_jacobian(poses, *pair.link_b, pair.point_b).topRows<3>()).transpose();
    }
    const double lower = std::min(-s.collision_gain * (d - d_safe), s.max_push_rate);
    out.near_contact = out.near_contact || d < d_safe + 0.02;
    out.rows.push_back(make_row("collision:" + pair.label, d, std::move(grad), lower, kInf, 0.0, true));
  }

  const double dt = request.timestep;
  for (std::size_t j = 0; j < model.dof(); ++j) {
    const JointSpec & joint = model.joints()[j];
    const auto i = static_cast<Eigen::Index>(j);
    VecX grad = VecX::Zero(n);
    grad(i) = 1.0;
    const double v = joint.velocity_limit;
    if (joint.limits) {
      const double lower = std::min((joint.limits->lower - q(i)) / dt, v);
      const double upper = std::max((joint.limits->upper - q(i)) / dt, -v);
      out.rows.push_back(make_row("position_limit:" + joint.name, q(i), grad, lower, upper, 0.0, true));
    }
    out.rows.push_back(make_row("velocity_limit:" + joint.name, q(i), grad, -v, v, 0.0, true));
  }
  return out;
}

std::vector<double> start_candidates(const GraspAngle & angle, std::size_t samples)
{
  if (angle) {
    return {*angle};
  }
  // Uniform grid on [-pi/2, pi/2], tried from the vertical grasp outward.
  std::vector<double> grid;
  const std::size_t count = std::max<std::size_t>(samples, 1);
  for (std::size_t i = 0; i < count; ++i) {
    grid.push_back(count == 1 ? 0.0 : -kPi / 2.0 + kPi * static_cast<double>(i) / static_cast<double>(count - 1));
  }
  std::stable_sort(grid.begin(), grid.end(), [](double a, double b) {
      if (std::abs(std::abs(a) - std::abs(b)) > 1e-12) {
        return std::abs(a) < std::abs(b);
      }
      return a > b;
    });
  return grid;
}

bool angle_in_range(double a)
{
  return a > -kPi && a <= kPi;
}

}  // namespace

const char * to_string(PlanOutcome outcome)
{
  switch (outcome) {
    case PlanOutcome::success: return "success";
    case PlanOutcome::infeasible_start: return "infeasible_start";
    case PlanOutcome::infeasible_goal: return "infeasible_goal";
    case PlanOutcome::collision_stuck: return "collision_stuck";
    case PlanOutcome::timeout: return "timeout";
  }
  return "unknown";
}

KinematicModel planning_model(const SceneDescription & scene, const std::string & object)
{
  const ObjectModel & obj = scene.object(object);
  return attach_pivot(
    scene.robot.model, scene.robot.grasp_frame, obj.cog_offset, object_collision_spheres(obj));
}

double verticality_error(const KinematicModel & model, const Configuration & q, const Vec3 & gravity)
{
  if (!model.pivot_joint_index()) {
    throw PlanningError("verticality_error: no pivot joint attached");
  }
  const Transform pose = forward_kinematics(model, q, kObjectLink);
  const Vec3 c = pose.linear() * model.object_cog_offset();
  const double cosine = c.dot(gravity) / (c.norm() * gravity.norm());
  return std::acos(std::clamp(cosine, -1.0, 1.0));
}

std::vector<Constraint> build_constraints(
  const PlanRequest & request, const KinematicModel & model, const Configuration & q,
  const Transform & target)
{
  if (!request.scene) {
    throw PlanningError("build_constraints: request has no scene");
  }
  if (!model.pivot_joint_index()) {
    throw PlanningError("build_constraints: model has no pivot joint");
  }
  return assemble(request, model, q, model.link_poses(q), target, kInf).rows;
}

std::vector<Constraint> build_constraints(
  const PlanRequest & request, const KinematicModel & model, const Configuration & q)
{
  return build_constraints(request, model, q, request.goal_pose);
}

std::optional<Configuration> grasp_configuration(
  const KinematicModel & model, const SceneDescription & scene, const Transform & object_pose,
  double angle, const PlannerSettings & settings)
{
  if (!model.pivot_joint_index()) {
    throw PlanningError("grasp_configuration: model has no pivot joint");
  }
  const auto n = static_cast<Eigen::Index>(model.dof());
  const auto pivot = static_cast<Eigen::Index>(*model.pivot_joint_index());
  const std::size_t obj = model.link_index(kObjectLink);

  Configuration q = Configuration::Zero(n);
  q.head(scene.robot.home.size()) = scene.robot.home;
  // Seed the planar base behind the object, facing along its x axis.
  const Vec3 forward = object_pose.linear().col(0);
  const double yaw = std::atan2(forward.y(), forward.x());
  q(0) = object_pose.translation().x() - scene.task.base_standoff * std::cos(yaw);
  q(1) = object_pose.translation().y() - scene.task.base_standoff * std::sin(yaw);
  q(2) = yaw;
  q(pivot) = angle;
  q = model.clamp(q);

  for (std::size_t it = 0; it < settings.ik_iterations; ++it) {
    const auto poses = model.link_poses(q);
    const PoseError err = pose_error(poses[obj], object_pose);
    if (err.position.norm() < 1e-6 && err.rotation.norm() < 1e-6) {
      return q;
    }
    Vec3 dp = -err.position;
    if (dp.norm() > 0.1) {
      dp *= 0.1 / dp.norm();
    }
    Vec3 dr = -err.rotation;
    if (dr.norm() > 0.3) {
      dr *= 0.3 / dr.norm();
    }
    const MatX J = model.point_jacobian(poses, obj, poses[obj].translation());
    std::vector<Constraint> rows;
    for (int i = 0; i < 3; ++i) {
      rows.push_back(make_row("p", err.position(i), J.row(i).transpose(), dp(i), dp(i), 1.0, false));
      rows.push_back(make_row("r", err.rotation(i), J.row(3 + i).transpose(), dr(i), dr(i), 1.0, false));
    }
    VecX lock = VecX::Zero(n);
    lock(pivot) = 1.0;
    rows.push_back(make_row("pivot", q(pivot), lock, angle - q(pivot), angle - q(pivot), 0.0, true));
    // Non-penetration; resting contacts of the held object stay allowed.
    for (const auto & pair : min_distance_robot_scene(model, poses, scene, 0.1)) {
      const double margin = pair.involves_object ? 0.0 : 0.01;
      const Vec3 & normal = pair.result.normal;
      VecX grad = (normal.transpose() *
        model.point_jacobian(poses, pair.link_a, pair.point_a).topRows<3>()).transpose();
      if (pair.link_b) {
        grad -= (normal.transpose() *
          model.point_jacobian(poses, *pair.link_b, pair.point_b).topRows<3>()).transpose();
      }
      rows.push_back(make_row(
          "c", pair.result.distance, std::move(grad),
          std::min(margin - pair.result.distance, 0.05), kInf, 0.0, true));
    }
    for (std::size_t j = 0; j < model.dof(); ++j) {
      const auto i = static_cast<Eigen::Index>(j);
      if (const auto & lim = model.joints()[j].limits) {
        VecX grad = VecX::Zero(n);
        grad(i) = 1.0;
        rows.push_back(make_row("lim", q(i), grad, lim->lower - q(i), lim->upper - q(i), 0.0, true));
      }
    }
    QpOptions opt = settings.qp;
    opt.regularization = 1e-4;
    const StepSolution step = solve_step(rows, model.dof(), opt);
    if (step.status != QpStatus::optimal) {
      return std::nullopt;
    }
    q += step.qdot;
  }
  return std::nullopt;
}

double min_clearance(
  const KinematicModel & model, const Configuration & q, const SceneDescription & scene)
{
  double best = kInf;
  for (const auto & pair : min_distance_robot_scene(model, q, scene)) {
    best = std::min(best, pair.result.distance);
  }
  return best;
}

PlanResult plan(const PlanRequest & request)
{
  const auto wall_start = std::chrono::steady_clock::now();
  if (!request.scene) {
    throw PlanningError("plan: request has no scene");
  }
  if (!(request.timestep > 0.0) || !(request.max_duration > 0.0)) {
    throw PlanningError("plan: timestep and max_duration must be positive");
  }
  if ((request.start_angle && !angle_in_range(*request.start_angle)) ||
    (request.goal_angle && !angle_in_range(*request.goal_angle)))
  {
    throw PlanningError("plan: fixed angles must lie in (-pi, pi]");
  }
  const SceneDescription & scene = *request.scene;
  const PlannerSettings & s = request.settings;
  const KinematicModel model = planning_model(scene, request.object);
  const auto pivot = static_cast<Eigen::Index>(*model.pivot_joint_index());
  const std::size_t obj = model.link_index(kObjectLink);

  PlanResult result;
  auto finish = [&](PlanOutcome outcome, std::string detail) {
      result.outcome = outcome;
      result.detail = std::move(detail);
      result.planning_time_s = std::chrono::duration<double>(
        std::chrono::steady_clock::now() - wall_start).count();
      if (result.trajectory) {
        result.trajectory->planning_time_s = result.planning_time_s;
      }
      return result;
    };

  // A rigid grasp keeps the start angle, so a fixed goal angle pins it.
  GraspAngle start_angle = request.start_angle;
  if (!request.pivoting_enabled && request.goal_angle) {
    if (start_angle && std::abs(*start_angle - *request.goal_angle) > s.angle_tolerance) {
      return finish(PlanOutcome::infeasible_goal, "goal angle differs from the start without pivoting");
    }
    start_angle = request.goal_angle;
  }

  std::optional<Configuration> start;
  for (double angle : start_candidates(start_angle, s.start_angle_samples)) {
    auto q = grasp_configuration(model, scene, request.start_pose, angle, s);
    if (q && min_clearance(model, *q, scene) >= -1e-4) {
      start = q;
      result.chosen_start_angle = angle;
      break;
    }
  }
  if (!start) {
    return finish(PlanOutcome::infeasible_start, "no reachable collision-free grasp");
  }

  std::vector<Transform> targets = request.waypoints;
  targets.push_back(request.goal_pose);

  Trajectory traj;
  for (const auto & j : model.joints()) {
    traj.joint_names.push_back(j.name);
  }
  traj.pivot_index = model.pivot_joint_index();
  traj.timestep = request.timestep;

  Configuration q = *start;
  double t = 0.0;
  traj.times.push_back(t);
  traj.samples.push_back(q);
  traj.phase_starts.push_back(0);

  const auto window = static_cast<std::size_t>(std::lround(s.stall_window / request.timestep));
  std::vector<double> history;
  std::size_t phase = 0;
  while (true) {
    const auto poses = model.link_poses(q);
    const Transform & target = targets[phase];
    const PoseError err = pose_error(poses[obj], target);
    const bool last = phase + 1 == targets.size();
    const double angle_err = request.goal_angle && request.pivoting_enabled ?
      std::abs(q(pivot) - *request.goal_angle) : 0.0;
    const bool reached = last ?
      (err.position.norm() < s.position_tolerance &&
      err.rotation.norm() < s.orientation_tolerance && angle_err < s.angle_tolerance) :
      (err.position.norm() < s.waypoint_tolerance &&
      err.rotation.norm() < 5.0 * s.waypoint_tolerance);
    if (reached) {
      if (last) {
        traj.converged = true;
        result.chosen_goal_angle = q(pivot);
        result.trajectory = std::move(traj);
        return finish(PlanOutcome::success, "");
      }
      ++phase;
      history.clear();
      traj.phase_starts.push_back(traj.samples.size() - 1);
      continue;
    }
    if (t >= request.max_duration - 1e-9) {
      return finish(PlanOutcome::timeout, "max_duration reached in phase " + std::to_string(phase));
    }

    const double elapsed = request.timestep *
      static_cast<double>(traj.samples.size() - 1 - traj.phase_starts.back());
    const StepRows step_rows = assemble(request, model, q, poses, target, elapsed);
    result.max_constraint_rows = std::max(result.max_constraint_rows, step_rows.rows.size());
    const StepSolution sol = solve_step(step_rows.rows, model.dof(), s.qp);
    if (sol.status == QpStatus::infeasible) {
      return finish(PlanOutcome::collision_stuck, "hard constraints infeasible at t=" + std::to_string(t));
    }
    if (sol.status != QpStatus::optimal) {
      return finish(PlanOutcome::collision_stuck, "solver iteration limit at t=" + std::to_string(t));
    }

    const double metric = err.position.norm() + 0.1 * err.rotation.norm() + 0.1 * angle_err;
    history.push_back(metric);
    if (history.size() > window) {
      const double improvement = history[history.size() - 1 - window] - metric;
      if (improvement < s.stall_improvement) {
        return finish(
          step_rows.near_contact ? PlanOutcome::collision_stuck : PlanOutcome::infeasible_goal,
          "stalled in phase " + std::to_string(phase) + " at t=" + std::to_string(t));
      }
    }

    q += sol.qdot * request.timestep;
    t = request.timestep * static_cast<double>(traj.times.size());
    traj.times.push_back(t);
    traj.samples.push_back(q);
  }
}

}  // namespace pivoplan
