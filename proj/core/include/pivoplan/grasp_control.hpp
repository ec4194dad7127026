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

#ifndef PIVOPLAN__GRASP_CONTROL_HPP_
#define PIVOPLAN__GRASP_CONTROL_HPP_

#include <array>

#include "pivoplan/geometry.hpp"
#include "pivoplan/scene.hpp"

namespace pivoplan
{

/**
 * @brief Elliptical limit surface of one soft-pad contact.
 *
 * Torsional capacity follows a Hertz-like contact radius pad_k * fn^pad_gamma.
 */
struct LimitSurfaceParams
{
  double mu = 0.5;
  double pad_k = 0.01;          // m N^-gamma
  double pad_gamma = 1.0 / 3.0;
  double torsion_c0 = 0.6;
  double fn_min = 0.5;          // N
  double fn_max = 20.0;         // N
  double safety_factor = 1.2;
  double tolerance = 1e-4;      // N, bisection width

  /// Throws std::invalid_argument when a field is out of range.
  void validate() const;
};

LimitSurfaceParams make_limit_surface(const ContactPadParams & pad, double mu);

struct ContactWrench
{
  double ft = 0.0;   // N
  double tau = 0.0;  // N m
  double timestamp = 0.0;
};

enum class Modality
{
  slipping_avoidance,
  gripper_pivoting,
};

const char * to_string(Modality modality);

struct ForceRequirement
{
  double fn = 0.0;
  bool saturated = false;
};

double tau_max(double fn, const LimitSurfaceParams & params);

/// Smallest fn with (ft/(mu fn))^2 + (tau/tau_max(fn))^2 <= 1, before the safety factor.
double limit_surface_force(double ft, double tau, const LimitSurfaceParams & params);

ForceRequirement required_fn_SA(const ContactWrench & w, const LimitSurfaceParams & params);

/// Slipping avoidance with the torque input zeroed: stops translation, lets the object rotate.
ForceRequirement required_fn_GP(const ContactWrench & w, const LimitSurfaceParams & params);

struct DynamicSettings
{
  double k_dyn = 0.1;               // s
  double sample_period = 0.002;     // s
  std::array<double, 2> process_noise{1.0e-2, 2.0e-5};      // (ft, tau) random-walk spectral density
  std::array<double, 2> measurement_noise{1.0e-3, 2.0e-6};  // (ft, tau) variance
};

/**
 * @brief Wrench-rate term of the slipping-avoidance force.
 *
 * A random-walk Kalman filter per wrench channel smooths the signal and the
 * rate is the change of the estimate per sample. The first-order filter keeps
 * the step response free of undershoot. The rates are mapped through the
 * gradient of the limit-surface force and the positive part is scaled by k_dyn.
 */
class DynamicComponent
{
public:
  explicit DynamicComponent(DynamicSettings settings = {});

  /// Feeds one sample and returns the current additive force (N, >= 0).
  double update(const ContactWrench & w, const LimitSurfaceParams & params);
  double value() const {return value_;}
  double ft_rate() const {return channels_[0].rate;}
  double tau_rate() const {return channels_[1].rate;}
  void reset();

private:
  struct Channel
  {
    double x = 0.0;
    double P = 1.0;
    double rate = 0.0;
  };

  void step(Channel & c, double z, double q, double r) const;

  DynamicSettings settings_;
  std::array<Channel, 2> channels_;
  bool initialized_ = false;
  double value_ = 0.0;
};

struct GraspForceOutput
{
  double fn_SA = 0.0;
  double fn_GP = 0.0;
  double fn_commanded = 0.0;
  double dynamic = 0.0;
  Modality active_modality = Modality::slipping_avoidance;
  bool saturated = false;
};

/// One controller tick; updates `history` with the sample.
GraspForceOutput compute_grasp_force(
  const ContactWrench & w, const LimitSurfaceParams & params, Modality modality,
  DynamicComponent & history);

}  // namespace pivoplan

#endif  // PIVOPLAN__GRASP_CONTROL_HPP_
