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

#include "pivoplan/slider_sim.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <stdexcept>

namespace pivoplan
{

SliderStepResult slider_step(
  const SliderState & state, const GripperMotion & gripper, double fn, double dt,
  const ObjectModel & object, const LimitSurfaceParams & true_params, double gravity)
{
  SliderStepResult out;
  out.state = state;
  if (state.slipped_out) {
    out.sticking = false;
    return out;
  }

  const double m = object.mass;
  const double d = object.cog_offset.norm();
  const double I = object.inertia_about_pivot;

  // Gravity component in the plane normal to the closing axis.
  const double g_perp = gravity * std::sin(gripper.axis_tilt);
  out.ft_load = std::max(0.0, m * g_perp + gripper.extra_ft);
  const double cap_t = true_params.mu * std::max(fn, 0.0);
  if (out.ft_load > cap_t) {
    out.state.slipped_out = true;
    out.state.theta_dot = 0.0;
    out.sticking = false;
    return out;
  }
  const double ratio = cap_t > 0.0 ? out.ft_load / cap_t : 0.0;
  const double tau_cap = tau_max(fn, true_params) * std::sqrt(std::max(0.0, 1.0 - ratio * ratio));

  const double phi = object_world_angle(state, gripper);
  const double tau_g = -m * g_perp * d * std::sin(phi) + gripper.extra_tau;

  // Friction torque the contact must supply to keep theta_ddot = 0.
  const double needed = I * gripper.angular_acceleration - tau_g;
  if (state.theta_dot == 0.0 && std::abs(needed) <= tau_cap) {
    out.tau_load = std::abs(needed);
    out.sticking = true;
    return out;
  }

  double friction;
  if (state.theta_dot != 0.0) {
    friction = -std::copysign(tau_cap, state.theta_dot);
  } else {
    friction = std::copysign(tau_cap, needed);
  }
  const double theta_ddot = (tau_g + friction) / I - gripper.angular_acceleration;
  double v = state.theta_dot + theta_ddot * dt;
  if (state.theta_dot != 0.0 && v * state.theta_dot < 0.0) {
    // Relative velocity crossed zero inside the step: friction brings it to rest.
    v = 0.0;
  }
  out.state.theta_dot = v;
  out.state.theta = state.theta + v * dt;
  out.tau_load = tau_cap;
  out.sticking = false;
  return out;
}

double pendulum_energy(
  const SliderState & state, double gripper_rate, const GripperMotion & gripper,
  const ObjectModel & object, double gravity)
{
  const double w = gripper_rate + state.theta_dot;
  const double phi = object_world_angle(state, gripper);
  return 0.5 * object.inertia_about_pivot * w * w +
         object.mass * gravity * std::sin(gripper.axis_tilt) * object.cog_offset.norm() *
         (1.0 - std::cos(phi));
}

PivotSimResult simulate_pivot(const PivotSimInput & input)
{
  const std::size_t n = input.times.size();
  if (input.gripper.size() != n || input.fn.size() != n) {
    throw std::invalid_argument("simulate_pivot: traces must share the timeline");
  }
  input.true_params.validate();

  PivotSimResult res;
  res.times = input.times;
  SliderState s = input.initial;
  for (std::size_t i = 0; i < n; ++i) {
    const double dt = i + 1 < n ? input.times[i + 1] - input.times[i] : kSliderTimestep;
    const SliderStepResult r = slider_step(
      s, input.gripper[i], input.fn[i], dt, input.object, input.true_params, input.gravity);
    res.states.push_back(s);
    res.fn.push_back(input.fn[i]);
    res.ft_load.push_back(r.ft_load);
    res.tau_load.push_back(r.tau_load);
    res.max_deviation = std::max(
      res.max_deviation, std::abs(wrap_angle(object_world_angle(s, input.gripper[i]))));
    s = r.state;
  }
  res.slipped_out = s.slipped_out;
  if (n > 0) {
    res.final_deviation = std::abs(wrap_angle(object_world_angle(s, input.gripper.back())));
  }
  return res;
}

void write_trace_csv(std::ostream & out, const PivotSimResult & result)
{
  out << "t,theta,fn,ft_load,tau_load\n";
  out << std::setprecision(9);
  for (std::size_t i = 0; i < result.times.size(); ++i) {
    out << result.times[i] << ',' << result.states[i].theta << ',' << result.fn[i] << ',' <<
      result.ft_load[i] << ',' << result.tau_load[i] << '\n';
  }
}

}  // namespace pivoplan
