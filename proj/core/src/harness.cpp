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

#include "pivoplan/harness.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <iomanip>
#include <random>
#include <sstream>
#include <stdexcept>

#include "pivoplan/csv.hpp"

namespace pivoplan
{

namespace
{

double floor_top(const SceneDescription & scene)
{
  double top = 0.0;
  bool found = false;
  for (const auto & box : scene.obstacles) {
    if (box.role == "floor") {
      top = found ? std::max(top, box.top()) : box.top();
      found = true;
    }
  }
  return top;
}

Transform pose_at(const Vec3 & p, double yaw)
{
  Transform T = Transform::Identity();
  T.linear() = Eigen::AngleAxisd(yaw, Vec3::UnitZ()).toRotationMatrix();
  T.translation() = p;
  return T;
}

/// Linear interpolation of `values` sampled on a uniform grid starting at t0.
double interp(const std::vector<double> & values, double t0, double dt, double t)
{
  if (values.empty()) {
    return 0.0;
  }
  const double s = (t - t0) / dt;
  if (s <= 0.0) {
    return values.front();
  }
  const auto i = static_cast<std::size_t>(std::floor(s));
  if (i + 1 >= values.size()) {
    return values.back();
  }
  const double f = s - static_cast<double>(i);
  return (1.0 - f) * values[i] + f * values[i + 1];
}

std::vector<double> second_difference(const std::vector<double> & x, double dt)
{
  std::vector<double> out(x.size(), 0.0);
  for (std::size_t i = 1; i + 1 < x.size(); ++i) {
    out[i] = (x[i + 1] - 2.0 * x[i] + x[i - 1]) / (dt * dt);
  }
  return out;
}

std::string height_tag(double h)
{
  return format_fixed(h, 2);
}

std::string cell_text(const MatrixCell & cell, const GraspAngle & row, const GraspAngle & col)
{
  if (!cell.success()) {
    return "-";
  }
  std::string s = format_fixed(cell.duration_s, 2);
  if (!row) {
    s += " s=" + format_fixed(cell.start_angle, 2);
  }
  if (!col) {
    s += " g=" + format_fixed(cell.goal_angle, 2);
  }
  return s;
}

/// Planned object CoG vector, pivot axis and related quantities at one sample.
struct SampleGeometry
{
  Vec3 axis = Vec3::UnitY();
  Vec3 cog = Vec3::Zero();       // world position of the CoG
  Vec3 grasp_to_cog = Vec3::Zero();
  double phi = 0.0;              // signed angle gravity -> CoG vector about the axis
  double tilt = kPi / 2.0;
};

SampleGeometry sample_geometry(
  const KinematicModel & model, const Configuration & q, const Vec3 & gravity)
{
  const auto poses = model.link_poses(q);
  const std::size_t pivot = *model.pivot_joint_index();
  const std::size_t obj = model.joint_child_link(pivot);
  const Transform & P = poses[obj];
  SampleGeometry s;
  s.axis = (P.linear() * model.joints()[pivot].axis).normalized();
  s.grasp_to_cog = P.linear() * model.object_cog_offset();
  s.cog = P.translation() + s.grasp_to_cog;
  const Vec3 g = gravity.normalized();
  const Vec3 c = s.grasp_to_cog.normalized();
  s.phi = std::atan2(s.axis.dot(g.cross(c)), g.dot(c));
  s.tilt = std::acos(std::clamp(std::abs(s.axis.dot(g)), 0.0, 1.0));
  return s;
}

/// Contact loads beyond static gravity for CoG acceleration `acc`.
void inertial_loads(
  const ObjectModel & object, const Vec3 & gravity, const Vec3 & axis, const Vec3 & grasp_to_cog,
  const Vec3 & acc, double tilt, double & extra_ft, double & extra_tau)
{
  const double m = object.mass;
  const Vec3 load = m * (gravity - acc);
  const Vec3 in_plane = load - load.dot(axis) * axis;
  extra_ft = in_plane.norm() - m * gravity.norm() * std::sin(tilt);
  extra_tau = grasp_to_cog.cross(-m * acc).dot(axis);
}

double min_jerk(double tau)
{
  tau = std::clamp(tau, 0.0, 1.0);
  return tau * tau * tau * (10.0 - 15.0 * tau + 6.0 * tau * tau);
}

double min_jerk_rate(double tau, double T)
{
  if (tau <= 0.0 || tau >= 1.0) {
    return 0.0;
  }
  return 30.0 * tau * tau * (1.0 - tau) * (1.0 - tau) / T;
}

double min_jerk_accel(double tau, double T)
{
  if (tau <= 0.0 || tau >= 1.0) {
    return 0.0;
  }
  return (60.0 * tau - 180.0 * tau * tau + 120.0 * tau * tau * tau) / (T * T);
}

SensitivityOutcome classify(const ExecutionResult & r)
{
  if (r.slipped_out) {
    return SensitivityOutcome::drop;
  }
  if (r.final_deviation > kPivotFailureDeviation) {
    return SensitivityOutcome::pivot_failure;
  }
  return SensitivityOutcome::ok;
}

}  // namespace

std::vector<GraspAngle> default_angle_grid()
{
  return {-kPi / 2.0, -kPi / 4.0, 0.0, kPi / 4.0, kPi / 2.0, std::nullopt};
}

GraspAngle parse_angle(const std::string & text)
{
  std::string s;
  for (char c : text) {
    if (!std::isspace(static_cast<unsigned char>(c))) {
      s += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
  }
  if (s == "free") {
    return std::nullopt;
  }
  if (s.empty()) {
    throw std::invalid_argument("empty angle");
  }
  const auto pi_pos = s.find("pi");
  if (pi_pos == std::string::npos) {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) {
      throw std::invalid_argument("bad angle: " + text);
    }
    return v;
  }
  // [-][k*]pi[/d]
  double sign = 1.0;
  std::string head = s.substr(0, pi_pos);
  if (!head.empty() && head.front() == '-') {
    sign = -1.0;
    head.erase(0, 1);
  }
  double k = 1.0;
  if (!head.empty()) {
    if (head.back() != '*') {
      throw std::invalid_argument("bad angle: " + text);
    }
    head.pop_back();
    std::size_t used = 0;
    k = std::stod(head, &used);
    if (used != head.size()) {
      throw std::invalid_argument("bad angle: " + text);
    }
  }
  double d = 1.0;
  const std::string tail = s.substr(pi_pos + 2);
  if (!tail.empty()) {
    if (tail.front() != '/' || tail.size() < 2) {
      throw std::invalid_argument("bad angle: " + text);
    }
    std::size_t used = 0;
    d = std::stod(tail.substr(1), &used);
    if (used != tail.size() - 1 || d == 0.0) {
      throw std::invalid_argument("bad angle: " + text);
    }
  }
  return sign * k * kPi / d;
}

std::string angle_label(const GraspAngle & angle)
{
  if (!angle) {
    return "free";
  }
  const double q = *angle / (kPi / 4.0);
  const double r = std::round(q);
  if (std::abs(q - r) < 1e-9) {
    switch (static_cast<int>(r)) {
      case -2: return "-pi/2";
      case -1: return "-pi/4";
      case 0: return "0";
      case 1: return "pi/4";
      case 2: return "pi/2";
      default: break;
    }
  }
  return format_fixed(*angle, 4);
}

std::string FeasibilityMatrix::to_csv() const
{
  std::vector<std::string> header{"start\\goal"};
  for (const auto & c : cols) {
    header.push_back(angle_label(c));
  }
  CsvTable table(header);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::vector<std::string> line{angle_label(rows[i])};
    for (std::size_t j = 0; j < cols.size(); ++j) {
      line.push_back(cell_text(cells[i][j], rows[i], cols[j]));
    }
    table.add_row(line);
  }
  return table.str();
}

std::string FeasibilityMatrix::to_text() const
{
  std::ostringstream out;
  out << label << " (object " << object << " on " << support << ", height " <<
    format_fixed(height, 2) << " m, pivoting " << (pivoting_enabled ? "on" : "off") << ")\n";
  const int w = 22;
  out << std::left << std::setw(8) << "s\\g";
  for (const auto & c : cols) {
    out << std::setw(w) << angle_label(c);
  }
  out << '\n';
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out << std::setw(8) << angle_label(rows[i]);
    for (std::size_t j = 0; j < cols.size(); ++j) {
      std::string t = cell_text(cells[i][j], rows[i], cols[j]);
      if (cells[i][j].gray) {
        t += " *";
      }
      out << std::setw(w) << t;
    }
    out << '\n';
  }
  return out.str();
}

std::shared_ptr<const SceneDescription> scene_with_support_height(
  const SceneDescription & scene, const std::string & support, double height)
{
  auto out = std::make_shared<SceneDescription>(scene);
  auto it = std::find_if(out->obstacles.begin(), out->obstacles.end(),
      [&](const BoxObstacle & b) {return b.name == support;});
  if (it == out->obstacles.end()) {
    throw SceneError("unknown support obstacle: " + support);
  }
  BoxObstacle & box = *it;
  const double bottom = box.pose.translation().z() - box.half_extents.z();
  if (!(height > bottom)) {
    throw SceneError("support " + support + ": height below its base");
  }
  const double old_top = box.top();
  const Vec3 c = box.pose.translation();
  const Vec3 h = box.half_extents;
  box.half_extents.z() = 0.5 * (height - bottom);
  box.pose.translation().z() = bottom + box.half_extents.z();

  // Boxes resting on the support top ride along with it.
  for (auto & other : out->obstacles) {
    if (&other == &box) {
      continue;
    }
    const Vec3 oc = other.pose.translation();
    const double other_bottom = oc.z() - other.half_extents.z();
    const bool on_top = std::abs(other_bottom - old_top) < 1e-6 &&
      std::abs(oc.x() - c.x()) < h.x() + other.half_extents.x() &&
      std::abs(oc.y() - c.y()) < h.y() + other.half_extents.y();
    if (on_top) {
      other.pose.translation().z() += height - old_top;
    }
  }
  return out;
}

const BoxObstacle & layer_at(const SceneDescription & scene, double height)
{
  const BoxObstacle * best = nullptr;
  for (const auto & box : scene.obstacles) {
    if (box.role == "shelf_layer" &&
      (!best || std::abs(box.top() - height) < std::abs(best->top() - height)))
    {
      best = &box;
    }
  }
  if (!best || std::abs(best->top() - height) > 0.05) {
    throw SceneError("no shelf layer near height " + format_fixed(height, 2));
  }
  return *best;
}

TaskPoses task_poses(
  const SceneDescription & scene, const std::string & object, const std::string & support)
{
  const ObjectModel & o = scene.object(object);
  const BoxObstacle & s = scene.obstacle(support);
  const TaskLayout & task = scene.task;
  // Grasp point height above the surface the object stands on.
  const double rest = o.half_extents.z() - o.cog_offset.z();

  TaskPoses out;
  out.pick = pose_at(
    Vec3(task.pick_position.x(), task.pick_position.y(), floor_top(scene) + rest), task.pick_yaw);
  out.goal = pose_at(
    Vec3(s.front() + task.place_depth, s.pose.translation().y() + task.place_lateral,
    s.top() + task.place_hover + rest), task.place_yaw);

  Transform lift = out.pick;
  lift.translation().z() += task.lift;
  Transform pre = out.goal;
  pre.translation() += task.approach;
  out.waypoints = {lift, pre};
  return out;
}

PlanRequest make_request(
  std::shared_ptr<const SceneDescription> scene, const std::string & object,
  const std::string & support, GraspAngle start, GraspAngle goal, bool pivoting_enabled)
{
  const TaskPoses poses = task_poses(*scene, object, support);
  PlanRequest r;
  r.scene = std::move(scene);
  r.object = object;
  r.start_pose = poses.pick;
  r.waypoints = poses.waypoints;
  r.goal_pose = poses.goal;
  r.start_angle = start;
  r.goal_angle = goal;
  r.pivoting_enabled = pivoting_enabled;
  return r;
}

FeasibilityMatrix run_grid(
  std::shared_ptr<const SceneDescription> scene, const std::string & object,
  const std::string & support, const std::vector<GraspAngle> & angles, bool pivoting_enabled,
  const std::string & label, double height)
{
  FeasibilityMatrix m;
  m.label = label;
  m.support = support;
  m.object = object;
  m.height = height;
  m.pivoting_enabled = pivoting_enabled;
  m.rows = angles;
  m.cols = angles;
  m.cells.assign(angles.size(), std::vector<MatrixCell>(angles.size()));
  m.trajectories.assign(angles.size(), std::vector<std::optional<Trajectory>>(angles.size()));
  for (std::size_t i = 0; i < angles.size(); ++i) {
    for (std::size_t j = 0; j < angles.size(); ++j) {
      const PlanRequest req =
        make_request(scene, object, support, angles[i], angles[j], pivoting_enabled);
      PlanResult res = plan(req);
      MatrixCell & cell = m.cells[i][j];
      cell.outcome = res.outcome;
      cell.planning_time_s = res.planning_time_s;
      cell.start_angle = res.chosen_start_angle;
      cell.goal_angle = res.chosen_goal_angle;
      cell.max_rows = res.max_constraint_rows;
      cell.gray = angles[i] && angles[j] && std::abs(*angles[i] - *angles[j]) < 1e-12;
      if (res.outcome == PlanOutcome::success && res.trajectory) {
        cell.duration_s = res.trajectory->duration();
        m.trajectories[i][j] = std::move(res.trajectory);
      }
    }
  }
  return m;
}

TrajectoryCheck check_trajectory(
  const SceneDescription & scene, const std::string & object, const Trajectory & traj)
{
  const KinematicModel model = planning_model(scene, object);
  TrajectoryCheck c;
  for (std::size_t k = 0; k < traj.samples.size(); ++k) {
    const Configuration & q = traj.samples[k];
    c.min_clearance = std::min(c.min_clearance, min_clearance(model, q, scene));
    c.max_verticality = std::max(c.max_verticality, verticality_error(model, q, scene.gravity));
    if (k > 0) {
      const double dt = traj.times[k] - traj.times[k - 1];
      for (std::size_t j = 0; j < model.dof(); ++j) {
        const auto i = static_cast<Eigen::Index>(j);
        const double v = std::abs(q(i) - traj.samples[k - 1](i)) / dt;
        c.max_velocity_excess =
          std::max(c.max_velocity_excess, v - model.joints()[j].velocity_limit);
      }
    }
  }
  return c;
}

ExecutionTrack track_from_trajectory(
  const SceneDescription & scene, const std::string & object, const Trajectory & traj)
{
  if (!traj.pivot_index) {
    throw std::invalid_argument("trajectory has no virtual joint");
  }
  const KinematicModel model = planning_model(scene, object);
  const ObjectModel & o = scene.object(object);
  const auto pivot = static_cast<Eigen::Index>(*traj.pivot_index);
  const std::size_t n = traj.samples.size();
  const double dt = traj.timestep > 0.0 ? traj.timestep :
    (n > 1 ? traj.times[1] - traj.times[0] : 0.05);

  std::vector<SampleGeometry> geo;
  geo.reserve(n);
  std::vector<double> psi(n);
  std::vector<double> cx(n), cy(n), cz(n);
  for (std::size_t k = 0; k < n; ++k) {
    geo.push_back(sample_geometry(model, traj.samples[k], scene.gravity));
    psi[k] = geo[k].phi - traj.samples[k](pivot);
    if (k > 0) {
      psi[k] = psi[k - 1] + wrap_angle(psi[k] - psi[k - 1]);
    }
    cx[k] = geo[k].cog.x();
    cy[k] = geo[k].cog.y();
    cz[k] = geo[k].cog.z();
  }
  const auto psi_dd = second_difference(psi, dt);
  const auto ax = second_difference(cx, dt);
  const auto ay = second_difference(cy, dt);
  const auto az = second_difference(cz, dt);

  std::vector<double> extra_ft(n), extra_tau(n), tilt(n);
  for (std::size_t k = 0; k < n; ++k) {
    inertial_loads(
      o, scene.gravity, geo[k].axis, geo[k].grasp_to_cog, Vec3(ax[k], ay[k], az[k]), geo[k].tilt,
      extra_ft[k], extra_tau[k]);
    tilt[k] = geo[k].tilt;
  }

  ExecutionTrack track;
  track.plan = traj;
  track.initial_theta = n > 0 ? traj.samples.front()(pivot) : 0.0;
  const double t0 = n > 0 ? traj.times.front() : 0.0;
  const double duration = traj.duration();
  const auto ticks = static_cast<std::size_t>(std::llround(duration / kSliderTimestep)) + 1;
  track.times.reserve(ticks);
  track.gripper.reserve(ticks);
  track.observed.reserve(ticks);
  for (std::size_t i = 0; i < ticks && n > 0; ++i) {
    const double t = t0 + static_cast<double>(i) * kSliderTimestep;
    GripperMotion g;
    g.angle = interp(psi, t0, dt, t);
    g.angular_acceleration = interp(psi_dd, t0, dt, t);
    g.axis_tilt = interp(tilt, t0, dt, t);
    g.extra_ft = interp(extra_ft, t0, dt, t);
    g.extra_tau = interp(extra_tau, t0, dt, t);
    const double s = std::clamp((t - t0) / dt, 0.0, static_cast<double>(n - 1));
    const auto k = std::min(static_cast<std::size_t>(s), n - 1);
    const std::size_t k1 = std::min(k + 1, n - 1);
    const double f = s - static_cast<double>(k);
    track.times.push_back(t);
    track.gripper.push_back(g);
    track.observed.push_back((1.0 - f) * traj.samples[k] + f * traj.samples[k1]);
  }
  return track;
}

ExecutionResult execute_track(
  const ExecutionTrack & track, const ObjectModel & object, const ExecutionOptions & options)
{
  options.controller.validate();
  options.truth.validate();
  const double g = 9.81;
  const double dt = kSliderTimestep;
  const double alpha = options.actuator_lag > 0.0 ?
    1.0 - std::exp(-dt / options.actuator_lag) : 1.0;

  ExecutionResult res;
  res.schedule = compute_schedule(track.plan, options.schedule);
  const std::vector<double> vj = virtual_joint_velocity(track.plan);
  const double plan_t0 = track.plan.times.empty() ? 0.0 : track.plan.times.front();
  const double plan_dt = track.plan.timestep > 0.0 ? track.plan.timestep : 0.05;
  ModalityDispatcher dispatcher(res.schedule, track.plan, nullptr);

  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  auto measure = [&](double ft, double tau, double t) {
      ContactWrench w;
      w.ft = std::max(0.0, ft + options.noise_ft * unit(rng));
      w.tau = std::max(0.0, tau + options.noise_tau * unit(rng));
      w.timestamp = t;
      return w;
    };

  DynamicComponent dynamic;
  SliderState state;
  state.theta = track.initial_theta + options.initial_offset;

  GripperMotion hold = track.gripper.empty() ? GripperMotion{} : track.gripper.front();
  hold.angular_acceleration = 0.0;
  hold.extra_ft = 0.0;
  hold.extra_tau = 0.0;

  // Grasp already closed at the static requirement when the settle phase starts.
  const double d = object.cog_offset.norm();
  const double phi0 = object_world_angle(state, hold);
  const double ft0 = object.mass * g * std::sin(hold.axis_tilt);
  const double tau0 = std::abs(object.mass * g * std::sin(hold.axis_tilt) * d * std::sin(phi0));
  double fn_act = required_fn_SA({ft0, tau0, 0.0}, options.controller).fn;

  double ft_load = ft0;
  double tau_load = tau0;
  auto tick = [&](double t, const GripperMotion & motion, Modality modality, bool loaded,
      double v_j, bool record) {
      const ContactWrench w = measure(ft_load, tau_load, t);
      const GraspForceOutput out = compute_grasp_force(w, options.controller, modality, dynamic);
      fn_act += (out.fn_commanded - fn_act) * alpha;
      const bool was_slipped = state.slipped_out;
      if (loaded) {
        const SliderStepResult r =
          slider_step(state, motion, fn_act, dt, object, options.truth, g);
        state = r.state;
        ft_load = r.ft_load;
        tau_load = r.tau_load;
      } else {
        ft_load = 0.0;
        tau_load = 0.0;
      }
      if (state.slipped_out) {
        ft_load = 0.0;
        tau_load = 0.0;
        if (!was_slipped) {
          res.slip_time = t;
        }
      }
      if (record) {
        ExecutionSample s;
        s.t = t;
        s.theta = state.theta;
        s.deviation = wrap_angle(object_world_angle(state, motion));
        s.fn = fn_act;
        s.fn_cmd = out.fn_commanded;
        s.fn_SA = out.fn_SA;
        s.fn_GP = out.fn_GP;
        s.ft = w.ft;
        s.tau = w.tau;
        s.v_j = v_j;
        s.modality = modality;
        res.samples.push_back(s);
      }
    };

  const double t_start = track.times.empty() ? 0.0 : track.times.front();
  const auto settle_ticks = static_cast<std::size_t>(std::llround(options.settle_time / dt));
  for (std::size_t i = 0; i < settle_ticks; ++i) {
    const double t = t_start - options.settle_time + static_cast<double>(i) * dt;
    tick(t, hold, Modality::slipping_avoidance, true, 0.0, false);
  }

  for (std::size_t i = 0; i < track.times.size(); ++i) {
    const double t = track.times[i];
    dispatcher.observe(t, track.observed[i]);
    const GripperMotion & motion = track.gripper[i];
    tick(t, motion, dispatcher.current(), true, interp(vj, plan_t0, plan_dt, t), true);
    res.max_deviation = std::max(res.max_deviation, std::abs(res.samples.back().deviation));
  }
  res.motion_end = track.times.empty() ? t_start : track.times.back();
  if (!track.gripper.empty()) {
    res.final_deviation = std::abs(wrap_angle(object_world_angle(state, track.gripper.back())));
  }
  res.slipped_out = state.slipped_out;

  GripperMotion rest = track.gripper.empty() ? hold : track.gripper.back();
  rest.angular_acceleration = 0.0;
  const auto release_ticks = static_cast<std::size_t>(std::llround(options.release_time / dt));
  for (std::size_t i = 1; i <= release_ticks; ++i) {
    const double t = res.motion_end + static_cast<double>(i) * dt;
    tick(t, rest, Modality::slipping_avoidance, false, 0.0, true);
  }
  res.dispatch = dispatcher.report();
  return res;
}

std::string execution_csv(const ExecutionResult & result)
{
  CsvTable table({"t", "theta", "deviation", "fn", "fn_cmd", "fn_SA", "fn_GP", "ft", "tau", "v_j",
      "modality"});
  for (const auto & s : result.samples) {
    table.add_row(
      {format_fixed(s.t, 3), format_fixed(s.theta, 6), format_fixed(s.deviation, 6),
        format_fixed(s.fn, 4), format_fixed(s.fn_cmd, 4), format_fixed(s.fn_SA, 4),
        format_fixed(s.fn_GP, 4), format_fixed(s.ft, 4), format_fixed(s.tau, 5),
        format_fixed(s.v_j, 5), to_string(s.modality)});
  }
  return table.str();
}

std::string plot_script(
  const std::string & trace_file, const std::string & schedule_file, const std::string & title)
{
  std::ostringstream py;
  py << "import csv\n"
     << "import matplotlib\n"
     << "matplotlib.use('Agg')\n"
     << "import matplotlib.pyplot as plt\n\n"
     << "def load(name):\n"
     << "    with open(name) as f:\n"
     << "        return list(csv.DictReader(f))\n\n"
     << "rows = load('" << trace_file << "')\n"
     << "events = load('" << schedule_file << "')\n"
     << "t = [float(r['t']) for r in rows]\n"
     << "fig, (ax1, ax2) = plt.subplots(2, 1, sharex=True, figsize=(8, 6))\n"
     << "ax1.plot(t, [float(r['fn']) for r in rows], 'k', label='fn')\n"
     << "ax1.plot(t, [float(r['fn_SA']) for r in rows], 'b--', label='fn SA')\n"
     << "ax1.plot(t, [float(r['fn_GP']) for r in rows], 'r:', label='fn GP')\n"
     << "ax1.set_ylabel('grasp force [N]')\n"
     << "ax1.legend()\n"
     << "ax2.plot(t, [float(r['v_j']) for r in rows], 'g', label='virtual joint rate')\n"
     << "ax2.set_ylabel('rad/s')\n"
     << "ax2.set_xlabel('time [s]')\n"
     << "end = t[-1] if t else 0.0\n"
     << "for i, e in enumerate(events):\n"
     << "    if e['command'] != 'GP':\n"
     << "        continue\n"
     << "    stop = float(events[i + 1]['time']) if i + 1 < len(events) else end\n"
     << "    for ax in (ax1, ax2):\n"
     << "        ax.axvspan(float(e['time']), stop, color='0.85')\n"
     << "ax1.set_title('" << title << "')\n"
     << "fig.tight_layout()\n"
     << "fig.savefig('" << title << ".png')\n";
  return py.str();
}

void write_execution(
  const std::filesystem::path & dir, const std::string & name, const ExecutionResult & result)
{
  const std::string trace = "trace_" + name + ".csv";
  const std::string sched = "schedule_" + name + ".csv";
  write_text_file(dir / trace, execution_csv(result));
  std::ostringstream s;
  write_schedule_csv(s, result.schedule);
  write_text_file(dir / sched, s.str());
  write_text_file(dir / ("plot_" + name + ".py"), plot_script(trace, sched, name));
}

ExecutionTrack stability_track(bool fast, double initial_offset)
{
  (void)initial_offset;
  struct Move
  {
    int coord;
    double delta;
    double duration;
    bool back;
  };
  const double T = fast ? 0.8 : 2.0;
  const double Tp = fast ? 1.2 : 3.0;
  // Tool coordinates: x, y (pivot axis), z (down), rotations about x, y, z.
  const std::vector<Move> moves{
    {0, 0.10, T, true}, {1, 0.10, T, true}, {2, 0.10, T, true},
    {3, 0.20, T, true}, {5, kPi / 4.0, T, true}, {4, kPi / 2.0, Tp, false}};
  const double pause = 0.3;

  struct Segment
  {
    double start;
    int coord;
    double from;
    double delta;
    double duration;
  };
  std::vector<Segment> segs;
  double t = 0.0;
  std::array<double, 6> pos{};
  for (const auto & m : moves) {
    segs.push_back({t, m.coord, pos[m.coord], m.delta, m.duration});
    t += m.duration + pause;
    pos[m.coord] += m.delta;
    if (m.back) {
      segs.push_back({t, m.coord, pos[m.coord], -m.delta, m.duration});
      t += m.duration + pause;
      pos[m.coord] -= m.delta;
    }
  }
  const double total = t;

  auto state_at = [&](double time, std::array<double, 6> & x, std::array<double, 6> & xd,
      std::array<double, 6> & xdd) {
      x.fill(0.0);
      xd.fill(0.0);
      xdd.fill(0.0);
      // Segments are chronological; the latest started one owns its coordinate.
      for (const auto & s : segs) {
        if (time < s.start) {
          continue;
        }
        const auto c = static_cast<std::size_t>(s.coord);
        const double tau = (time - s.start) / s.duration;
        x[c] = s.from + s.delta * min_jerk(tau);
        xd[c] = s.delta * min_jerk_rate(tau, s.duration);
        xdd[c] = s.delta * min_jerk_accel(tau, s.duration);
      }
    };

  const double g = 9.81;
  const Vec3 gravity(0.0, 0.0, -g);
  ExecutionTrack track;
  track.initial_theta = 0.0;
  const auto ticks = static_cast<std::size_t>(std::llround(total / kSliderTimestep)) + 1;
  std::array<double, 6> x{}, xd{}, xdd{};
  auto config = [&](const std::array<double, 6> & c, double q_v) {
      Configuration q(7);
      for (int i = 0; i < 6; ++i) {
        q(i) = c[static_cast<std::size_t>(i)];
      }
      q(6) = q_v;
      return q;
    };
  for (std::size_t i = 0; i < ticks; ++i) {
    const double time = static_cast<double>(i) * kSliderTimestep;
    state_at(time, x, xd, xdd);
    GripperMotion m;
    m.angle = x[4];
    m.angular_acceleration = xdd[4];
    const double rx = x[3];
    const Vec3 axis(0.0, std::cos(rx), std::sin(rx));
    m.axis_tilt = std::acos(std::clamp(std::abs(axis.dot(gravity.normalized())), 0.0, 1.0));
    // Object hanging below the grasp point, tool z pointing down.
    const Vec3 acc(xdd[0], xdd[1], -xdd[2]);
    const Vec3 c(-std::sin(m.angle), 0.0, -std::cos(m.angle));
    const double mass = 1.0;  // loads scale with mass; rescaled in run_stability_case
    inertial_loads(
      ObjectModel{"", Vec3::Zero(), mass, Vec3::Zero(), 1.0, 1.0}, gravity, axis, c, acc,
      m.axis_tilt, m.extra_ft, m.extra_tau);
    track.times.push_back(time);
    track.gripper.push_back(m);
    track.observed.push_back(config(x, 0.0));
  }

  const double plan_dt = 0.05;
  const auto plan_n = static_cast<std::size_t>(std::floor(total / plan_dt)) + 1;
  Trajectory & p = track.plan;
  p.joint_names = {"tool_x", "tool_y", "tool_z", "tool_rx", "tool_ry", "tool_rz", "pivot"};
  p.pivot_index = 6;
  p.timestep = plan_dt;
  p.phase_starts = {0};
  p.converged = true;
  for (std::size_t k = 0; k < plan_n; ++k) {
    const double time = static_cast<double>(k) * plan_dt;
    state_at(time, x, xd, xdd);
    p.times.push_back(time);
    p.samples.push_back(config(x, -x[4]));
  }
  return track;
}

StabilityRun run_stability_case(
  const SceneDescription & scene, const std::string & object, bool fast, double initial_offset,
  std::uint64_t seed, bool noise)
{
  const ObjectModel & o = scene.object(object);
  ExecutionTrack track = stability_track(fast, initial_offset);
  // The track carries unit-mass, unit-length inertial loads.
  const double d = o.cog_offset.norm();
  for (auto & m : track.gripper) {
    m.extra_ft *= o.mass;
    m.extra_tau *= o.mass * d;
  }
  ExecutionOptions opt;
  opt.controller = make_limit_surface(scene.contact, o.mu);
  opt.truth = opt.controller;
  opt.seed = seed;
  opt.initial_offset = initial_offset;
  if (!noise) {
    opt.noise_ft = 0.0;
    opt.noise_tau = 0.0;
  }
  const ExecutionResult r = execute_track(track, o, opt);
  StabilityRun run;
  run.fast = fast;
  run.initial_offset = initial_offset;
  run.final_deviation = r.final_deviation;
  run.max_deviation = r.max_deviation;
  run.dropped = r.slipped_out;
  return run;
}

StabilityReport run_stability(const ExperimentSpec & spec, const SceneDescription & scene)
{
  const std::string object = spec.objects.empty() ? std::string("E") : spec.objects.front();
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> offset(-0.028, 0.060);
  StabilityReport rep;
  std::size_t slow = 0;
  std::size_t fast = 0;
  CsvTable table({"run", "speed", "initial_offset", "final_deviation", "max_deviation", "dropped"});
  for (std::size_t i = 0; i < 12; ++i) {
    const bool is_fast = i >= 6;
    const double off = offset(rng);
    const StabilityRun run = run_stability_case(scene, object, is_fast, off, spec.seed + i, true);
    rep.runs.push_back(run);
    if (run.dropped) {
      ++rep.drops;
    }
    if (is_fast) {
      rep.mean_fast += run.final_deviation;
      rep.max_fast = std::max(rep.max_fast, run.final_deviation);
      ++fast;
    } else {
      rep.mean_slow += run.final_deviation;
      rep.max_slow = std::max(rep.max_slow, run.final_deviation);
      ++slow;
    }
    table.add_row(
      {std::to_string(i), is_fast ? "fast" : "slow", format_fixed(off, 4),
        format_fixed(run.final_deviation, 4), format_fixed(run.max_deviation, 4),
        run.dropped ? "1" : "0"});
  }
  rep.mean_slow /= static_cast<double>(std::max<std::size_t>(slow, 1));
  rep.mean_fast /= static_cast<double>(std::max<std::size_t>(fast, 1));
  if (!spec.out_dir.empty()) {
    table.write(spec.out_dir / "stability.csv");
  }
  return rep;
}

const char * to_string(SensitivityOutcome outcome)
{
  switch (outcome) {
    case SensitivityOutcome::ok: return "ok";
    case SensitivityOutcome::pivot_failure: return "pivot_failure";
    case SensitivityOutcome::drop: return "drop";
  }
  return "unknown";
}

SensitivityCase replay_with_mu(
  const SceneDescription & scene, const std::string & object, const std::string & support,
  const Trajectory & traj, double mu_controller, std::uint64_t seed)
{
  const ObjectModel & o = scene.object(object);
  ExecutionOptions opt;
  opt.controller = make_limit_surface(scene.contact, mu_controller);
  opt.truth = make_limit_surface(scene.contact, o.mu);
  opt.seed = seed;
  const ExecutionTrack track = track_from_trajectory(scene, object, traj);

  SensitivityCase c;
  c.object = object;
  c.support = support;
  c.mu_controller = mu_controller;
  c.mu_true = o.mu;
  c.execution = execute_track(track, o, opt);
  c.outcome = classify(c.execution);
  c.final_deviation = c.execution.final_deviation;
  c.slipped_out = c.execution.slipped_out;
  c.slip_time = c.execution.slip_time;
  if (c.slipped_out) {
    for (const auto & s : c.execution.samples) {
      if (s.t >= c.slip_time + 0.2 && s.t <= c.slip_time + 0.7) {
        c.fn_after_release = std::max(c.fn_after_release, s.fn_cmd);
      }
    }
  }
  return c;
}

std::optional<Trajectory> shelf_plan(
  std::shared_ptr<const SceneDescription> scene, const std::string & object,
  const std::string & support)
{
  PlanResult r = plan(make_request(std::move(scene), object, support, std::nullopt, std::nullopt, true));
  if (r.outcome != PlanOutcome::success) {
    return std::nullopt;
  }
  return r.trajectory;
}

std::vector<SensitivityCase> run_sensitivity(const ExperimentSpec & spec, const SceneDescription & scene)
{
  struct Job
  {
    std::string object;
    double height;
    std::vector<double> mus;
  };
  std::vector<Job> jobs{{"B", 0.6, {0.25, 0.3, 0.5, 0.9}}, {"D", 1.31, {0.85, 0.72}}};
  if (!spec.mu_override.empty()) {
    for (auto & job : jobs) {
      const auto it = spec.mu_override.find(job.object);
      job.mus = it == spec.mu_override.end() ? std::vector<double>{} :
        std::vector<double>{it->second};
    }
  }
  auto shared = std::make_shared<const SceneDescription>(scene);
  std::vector<SensitivityCase> out;
  CsvTable table({"object", "support", "mu_controller", "mu_true", "outcome", "final_deviation",
      "slip_time", "fn_after_release"});
  for (const auto & job : jobs) {
    if (job.mus.empty()) {
      continue;
    }
    const std::string support = layer_at(scene, job.height).name;
    const auto traj = shelf_plan(shared, job.object, support);
    if (!traj) {
      throw PlanningError("sensitivity: no plan for object " + job.object + " on " + support);
    }
    for (double mu : job.mus) {
      SensitivityCase c = replay_with_mu(scene, job.object, support, *traj, mu, spec.seed);
      table.add_row(
        {c.object, c.support, format_fixed(c.mu_controller, 2), format_fixed(c.mu_true, 2),
          to_string(c.outcome), format_fixed(c.final_deviation, 4), format_fixed(c.slip_time, 3),
          format_fixed(c.fn_after_release, 3)});
      if (!spec.out_dir.empty()) {
        write_execution(
          spec.out_dir, "sensitivity_" + c.object + "_mu" + format_fixed(mu, 2), c.execution);
      }
      out.push_back(std::move(c));
    }
  }
  if (!spec.out_dir.empty()) {
    table.write(spec.out_dir / "sensitivity.csv");
  }
  return out;
}

std::vector<FeasibilityMatrix> run_desk(const ExperimentSpec & spec, const SceneDescription & scene)
{
  const std::vector<double> heights =
    spec.heights.empty() ? std::vector<double>{0.2, 1.31} : spec.heights;
  const std::vector<GraspAngle> angles =
    spec.angle_grid.empty() ? default_angle_grid() : spec.angle_grid;
  const std::string support = scene.task.support;
  const std::string object = spec.objects.empty() ? scene.task.pick_object : spec.objects.front();
  std::vector<FeasibilityMatrix> out;
  for (double h : heights) {
    auto s = scene_with_support_height(scene, support, h);
    FeasibilityMatrix m = run_grid(
      s, object, support, angles, spec.pivoting_enabled, "desk " + height_tag(h), h);
    if (!spec.out_dir.empty()) {
      const std::string tag = height_tag(h) + (spec.pivoting_enabled ? "" : "_nopivot");
      write_text_file(spec.out_dir / ("matrix_" + tag + ".csv"), m.to_csv());
      write_text_file(spec.out_dir / ("matrix_" + tag + ".txt"), m.to_text());
    }
    out.push_back(std::move(m));
  }
  return out;
}

std::vector<FeasibilityMatrix> run_shelf(const ExperimentSpec & spec, const SceneDescription & scene)
{
  const std::vector<double> heights =
    spec.heights.empty() ? std::vector<double>{0.2, 0.6, 0.93, 1.31} : spec.heights;
  const std::vector<GraspAngle> angles =
    spec.angle_grid.empty() ? default_angle_grid() : spec.angle_grid;
  auto shared = std::make_shared<const SceneDescription>(scene);
  std::vector<FeasibilityMatrix> out;
  for (double h : heights) {
    const BoxObstacle & layer = layer_at(scene, h);
    std::string object;
    if (!spec.objects.empty()) {
      object = spec.objects.front();
    } else {
      const auto it = scene.task.object_for_support.find(layer.name);
      object = it != scene.task.object_for_support.end() ? it->second : scene.task.pick_object;
    }
    FeasibilityMatrix m = run_grid(
      shared, object, layer.name, angles, spec.pivoting_enabled, "shelf " + height_tag(h), h);
    if (!spec.out_dir.empty()) {
      const std::string tag = height_tag(h) + (spec.pivoting_enabled ? "" : "_nopivot");
      write_text_file(spec.out_dir / ("shelf_" + tag + ".csv"), m.to_csv());
      write_text_file(spec.out_dir / ("shelf_" + tag + ".txt"), m.to_text());
      // Execute the free/free plan when the grid contains one.
      for (std::size_t i = 0; i < angles.size(); ++i) {
        if (angles[i] || !m.trajectories[i][i]) {
          continue;
        }
        const ObjectModel & o = scene.object(object);
        ExecutionOptions opt;
        opt.controller = make_limit_surface(
          scene.contact, spec.mu_override.count(object) ? spec.mu_override.at(object) : o.mu);
        opt.truth = make_limit_surface(scene.contact, o.mu);
        opt.seed = spec.seed;
        opt.schedule.threshold = spec.threshold;
        const ExecutionTrack track = track_from_trajectory(scene, object, *m.trajectories[i][i]);
        write_execution(spec.out_dir, "shelf_" + height_tag(h), execute_track(track, o, opt));
      }
    }
    out.push_back(std::move(m));
  }
  return out;
}

}  // namespace pivoplan
