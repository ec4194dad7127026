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

#ifndef PIVOPLAN__MODALITY_SWITCH_HPP_
#define PIVOPLAN__MODALITY_SWITCH_HPP_

#include <functional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "pivoplan/grasp_control.hpp"
#include "pivoplan/planner.hpp"

namespace pivoplan
{

class ScheduleError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

struct SwitchEvent
{
  double time = 0.0;
  Modality command = Modality::slipping_avoidance;
};

struct SwitchSchedule
{
  std::vector<SwitchEvent> events;
  double threshold = 0.01;

  /// Modality in force at time t (the last event at or before t).
  Modality at(double t) const;
  /// Closed-open [start, end) intervals where GP is active; the last one ends at `end_time`.
  std::vector<std::pair<double, double>> gp_intervals(double end_time) const;
};

struct ScheduleOptions
{
  double threshold = 0.01;        // rad/s
  bool hysteresis = false;
  double exit_threshold = 0.005;  // rad/s, GP -> SA when hysteresis is on
  std::size_t min_region_samples = 2;  // hysteresis only
};

/// Central-difference virtual-joint velocity at every sample (one-sided at the ends).
std::vector<double> virtual_joint_velocity(const Trajectory & traj);

SwitchSchedule compute_schedule(const Trajectory & traj, const ScheduleOptions & options);
SwitchSchedule compute_schedule(const Trajectory & traj, double threshold = 0.01);

void write_schedule_csv(std::ostream & out, const SwitchSchedule & schedule);

struct Delivery
{
  SwitchEvent event;
  double delivered_at = 0.0;
};

struct DispatchReport
{
  std::vector<Delivery> deliveries;
  bool completed = false;
  std::string abort_reason;
};

/**
 * @brief Sequential reactor delivering schedule commands during execution.
 *
 * Each observed joint state is matched against the planned trajectory
 * (virtual joint excluded, the robot cannot measure it); an event fires once
 * the matched progress reaches its timestamp.
 */
class ModalityDispatcher
{
public:
  using Sink = std::function<void(Modality, double)>;

  ModalityDispatcher(SwitchSchedule schedule, const Trajectory & traj, Sink sink);

  /// Execution time t (s) and the observed robot configuration.
  void observe(double t, const Configuration & q);
  void abort(std::string reason);
  /// Trajectory time matched to the last observation.
  double progress() const {return progress_;}
  Modality current() const {return current_;}
  const DispatchReport & report() const {return report_;}

private:
  void deliver_due(double t);

  SwitchSchedule schedule_;
  const Trajectory & traj_;
  Sink sink_;
  std::size_t next_ = 0;
  std::size_t segment_ = 0;
  double progress_ = 0.0;
  bool aborted_ = false;
  Modality current_ = Modality::slipping_avoidance;
  DispatchReport report_;
};

/// Plays a time-ordered observation stream through a dispatcher.
DispatchReport dispatch(
  const SwitchSchedule & schedule, const Trajectory & traj,
  const std::vector<std::pair<double, Configuration>> & observations,
  const ModalityDispatcher::Sink & sink, std::optional<double> abort_at = std::nullopt);

}  // namespace pivoplan

#endif  // PIVOPLAN__MODALITY_SWITCH_HPP_
