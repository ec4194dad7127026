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

#include "pivoplan/modality_switch.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>

namespace pivoplan
{

Modality SwitchSchedule::at(double t) const
{
  Modality m = Modality::slipping_avoidance;
  for (const auto & e : events) {
    if (e.time > t) {
      break;
    }
    m = e.command;
  }
  return m;
}

std::vector<std::pair<double, double>> SwitchSchedule::gp_intervals(double end_time) const
{
  std::vector<std::pair<double, double>> out;
  for (std::size_t i = 0; i < events.size(); ++i) {
    if (events[i].command != Modality::gripper_pivoting) {
      continue;
    }
    const double end = i + 1 < events.size() ? events[i + 1].time : end_time;
    out.emplace_back(events[i].time, end);
  }
  return out;
}

std::vector<double> virtual_joint_velocity(const Trajectory & traj)
{
  if (!traj.pivot_index) {
    throw ScheduleError("trajectory has no virtual joint");
  }
  const auto j = static_cast<Eigen::Index>(*traj.pivot_index);
  const std::size_t n = traj.samples.size();
  std::vector<double> v(n, 0.0);
  if (n < 2) {
    return v;
  }
  const double dt = traj.times[1] - traj.times[0];
  for (std::size_t i = 0; i < n; ++i) {
    if (i == 0) {
      v[i] = (traj.samples[1](j) - traj.samples[0](j)) / dt;
    } else if (i + 1 == n) {
      v[i] = (traj.samples[i](j) - traj.samples[i - 1](j)) / dt;
    } else {
      v[i] = (traj.samples[i + 1](j) - traj.samples[i - 1](j)) / (2.0 * dt);
    }
  }
  return v;
}

namespace
{

void check_uniform(const Trajectory & traj)
{
  if (traj.times.size() != traj.samples.size()) {
    throw ScheduleError("trajectory times and samples differ in length");
  }
  if (traj.times.size() < 2) {
    return;
  }
  const double dt = traj.times[1] - traj.times[0];
  if (!(dt > 0.0)) {
    throw ScheduleError("trajectory times must be strictly increasing");
  }
  for (std::size_t i = 1; i < traj.times.size(); ++i) {
    if (std::abs(traj.times[i] - traj.times[i - 1] - dt) > 1e-9 * std::max(1.0, dt)) {
      throw ScheduleError("trajectory timestep is not uniform");
    }
  }
}

/// Merges runs shorter than `min_len` samples into their predecessor (the first into its successor).
void enforce_min_runs(std::vector<Modality> & req, std::size_t min_len)
{
  if (req.size() < min_len || min_len < 2) {
    return;
  }
  bool changed = true;
  while (changed) {
    changed = false;
    std::size_t i = 0;
    while (i < req.size()) {
      std::size_t j = i;
      while (j < req.size() && req[j] == req[i]) {
        ++j;
      }
      if (j - i < min_len) {
        const Modality fill = i > 0 ? req[i - 1] : (j < req.size() ? req[j] : req[i]);
        if (fill != req[i]) {
          std::fill(req.begin() + static_cast<std::ptrdiff_t>(i),
            req.begin() + static_cast<std::ptrdiff_t>(j), fill);
          changed = true;
          break;
        }
      }
      i = j;
    }
  }
}

}  // namespace

SwitchSchedule compute_schedule(const Trajectory & traj, const ScheduleOptions & options)
{
  if (!traj.pivot_index) {
    throw ScheduleError("trajectory has no virtual joint");
  }
  if (!(options.threshold > 0.0)) {
    throw ScheduleError("threshold must be positive");
  }
  check_uniform(traj);

  SwitchSchedule schedule;
  schedule.threshold = options.threshold;
  if (traj.samples.empty()) {
    schedule.events.push_back({0.0, Modality::slipping_avoidance});
    return schedule;
  }

  const std::vector<double> v = virtual_joint_velocity(traj);
  std::vector<Modality> req(v.size());
  Modality state = Modality::slipping_avoidance;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double speed = std::abs(v[i]);
    if (!options.hysteresis) {
      state = speed >= options.threshold ? Modality::gripper_pivoting : Modality::slipping_avoidance;
    } else if (state == Modality::slipping_avoidance && speed >= options.threshold) {
      state = Modality::gripper_pivoting;
    } else if (state == Modality::gripper_pivoting && speed < options.exit_threshold) {
      state = Modality::slipping_avoidance;
    }
    req[i] = state;
  }
  if (options.hysteresis) {
    enforce_min_runs(req, options.min_region_samples);
  }

  for (std::size_t i = 0; i < req.size(); ++i) {
    if (i == 0 || req[i] != req[i - 1]) {
      schedule.events.push_back({traj.times[i], req[i]});
    }
  }
  return schedule;
}

SwitchSchedule compute_schedule(const Trajectory & traj, double threshold)
{
  ScheduleOptions options;
  options.threshold = threshold;
  return compute_schedule(traj, options);
}

void write_schedule_csv(std::ostream & out, const SwitchSchedule & schedule)
{
  out << "time,command\n" << std::fixed << std::setprecision(3);
  for (const auto & e : schedule.events) {
    out << e.time << ',' << to_string(e.command) << '\n';
  }
  out << std::defaultfloat;
}

ModalityDispatcher::ModalityDispatcher(SwitchSchedule schedule, const Trajectory & traj, Sink sink)
: schedule_(std::move(schedule)), traj_(traj), sink_(std::move(sink))
{
  if (!traj_.samples.empty()) {
    progress_ = traj_.times.front();
  }
}

void ModalityDispatcher::observe(double t, const Configuration & q)
{
  if (aborted_) {
    return;
  }
  const std::size_t n = traj_.samples.size();
  if (n < 2) {
    progress_ = std::max(progress_, n == 1 ? traj_.times.front() : t);
  } else {
    const std::size_t last = std::min(segment_ + 50, n - 2);
    const auto pivot = traj_.pivot_index;
    auto robot_part = [&](const Configuration & c) {
        Configuration r = c;
        if (pivot && static_cast<Eigen::Index>(*pivot) < r.size()) {
          r(static_cast<Eigen::Index>(*pivot)) = 0.0;
        }
        return r;
      };
    const Configuration x = robot_part(q);
    double best_dist = kInf;
    double best_time = progress_;
    std::size_t best_seg = segment_;
    for (std::size_t k = segment_; k <= last; ++k) {
      const Configuration a = robot_part(traj_.samples[k]);
      const Configuration d = robot_part(traj_.samples[k + 1]) - a;
      const double dt = traj_.times[k + 1] - traj_.times[k];
      const double len2 = d.squaredNorm();
      double lambda;
      if (len2 > 1e-18) {
        lambda = std::clamp((x - a).dot(d) / len2, 0.0, 1.0);
      } else {
        lambda = std::clamp((t - traj_.times[k]) / dt, 0.0, 1.0);
      }
      const double dist = (x - (a + lambda * d)).norm();
      const double time = traj_.times[k] + lambda * dt;
      const bool better = dist < best_dist - 1e-12 ||
        (std::abs(dist - best_dist) <= 1e-12 && std::abs(time - t) < std::abs(best_time - t));
      if (better) {
        best_dist = dist;
        best_time = time;
        best_seg = k;
      }
    }
    segment_ = best_seg;
    progress_ = std::max(progress_, best_time);
  }
  deliver_due(t);
}

void ModalityDispatcher::deliver_due(double t)
{
  while (next_ < schedule_.events.size() &&
    schedule_.events[next_].time <= progress_ + 1e-9)
  {
    const SwitchEvent & e = schedule_.events[next_];
    if (sink_) {
      sink_(e.command, t);
    }
    current_ = e.command;
    report_.deliveries.push_back({e, t});
    ++next_;
  }
  report_.completed = next_ == schedule_.events.size();
}

void ModalityDispatcher::abort(std::string reason)
{
  aborted_ = true;
  report_.completed = false;
  report_.abort_reason = std::move(reason);
}

DispatchReport dispatch(
  const SwitchSchedule & schedule, const Trajectory & traj,
  const std::vector<std::pair<double, Configuration>> & observations,
  const ModalityDispatcher::Sink & sink, std::optional<double> abort_at)
{
  ModalityDispatcher d(schedule, traj, sink);
  for (const auto & [t, q] : observations) {
    if (abort_at && t >= *abort_at) {
      d.abort("execution aborted at t=" + std::to_string(t));
      break;
    }
    d.observe(t, q);
  }
  if (observations.empty() && traj.samples.empty() && !(abort_at && *abort_at <= 0.0)) {
    d.observe(0.0, Configuration());
  }
  return d.report();
}

}  // namespace pivoplan
