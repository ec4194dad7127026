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

#ifndef PIVOPLAN__SLIDER_SIM_HPP_
#define PIVOPLAN__SLIDER_SIM_HPP_

#include <ostream>
#include <vector>

#include "pivoplan/geometry.hpp"
#include "pivoplan/grasp_control.hpp"
#include "pivoplan/scene.hpp"

namespace pivoplan
{

/// Object angle relative to the fingers, about the pivot axis.
struct SliderState
{
  double theta = 0.0;      // rad
  double theta_dot = 0.0;  // rad/s
  bool slipped_out = false;
};

/**
 * @brief Gripper motion about the pivot axis at one sample.
 *
 * `angle` is the world angle that the grasp-to-CoG vector would make with
 * gravity at theta = 0. Extra loads model inertial effects of the arm motion.
 */
struct GripperMotion
{
  double angle = 0.0;
  double angular_acceleration = 0.0;
  double axis_tilt = kPi / 2.0;  // closing axis vs gravity
  double extra_ft = 0.0;         // N
  double extra_tau = 0.0;        // N m, about the pivot axis
};

struct SliderStepResult
{
  SliderState state;
  double ft_load = 0.0;
  double tau_load = 0.0;
  bool sticking = true;
};

inline constexpr double kSliderTimestep = 0.002;

/// World angle between the grasp-to-CoG vector and gravity (signed).
inline double object_world_angle(const SliderState & s, const GripperMotion & g)
{
  return g.angle + s.theta;
}

/**
 * @brief One semi-implicit Euler step of the friction-damped pendulum.
 *
 * The contact first spends its limit surface on the tangential load; the
 * remaining torsional capacity resists relative rotation. Static and kinetic
 * capacities are equal.
 */
SliderStepResult slider_step(
  const SliderState & state, const GripperMotion & gripper, double fn, double dt,
  const ObjectModel & object, const LimitSurfaceParams & true_params, double gravity = 9.81);

/// Kinetic plus potential energy relative to the hanging equilibrium.
double pendulum_energy(
  const SliderState & state, double gripper_rate, const GripperMotion & gripper,
  const ObjectModel & object, double gravity = 9.81);

struct PivotSimInput
{
  std::vector<double> times;
  std::vector<GripperMotion> gripper;
  std::vector<double> fn;
  ObjectModel object;
  LimitSurfaceParams true_params;
  SliderState initial;
  double gravity = 9.81;
};

struct PivotSimResult
{
  std::vector<double> times;
  std::vector<SliderState> states;
  std::vector<double> fn;
  std::vector<double> ft_load;
  std::vector<double> tau_load;
  double final_deviation = 0.0;
  double max_deviation = 0.0;
  bool slipped_out = false;
};

/// Open-loop rollout over the given force trace. Throws std::invalid_argument on ragged input.
PivotSimResult simulate_pivot(const PivotSimInput & input);

/// CSV columns t,theta,fn,ft_load,tau_load.
void write_trace_csv(std::ostream & out, const PivotSimResult & result);

}  // namespace pivoplan

#endif  // PIVOPLAN__SLIDER_SIM_HPP_
