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

#include "pivoplan/grasp_control.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace pivoplan
{

void LimitSurfaceParams::validate() const
{
  if (!(mu > 0.0)) {
    throw std::invalid_argument("limit surface: mu must be positive");
  }
  if (!(pad_k > 0.0) || !(pad_gamma > 0.0 && pad_gamma <= 1.0)) {
    throw std::invalid_argument("limit surface: pad parameters out of range");
  }
  if (!(torsion_c0 > 0.0 && torsion_c0 <= 1.0)) {
    throw std::invalid_argument("limit surface: torsion_c0 must lie in (0, 1]");
  }
  if (!(fn_min > 0.0 && fn_min < fn_max)) {
    throw std::invalid_argument("limit surface: require 0 < fn_min < fn_max");
  }
  if (!(safety_factor >= 1.0) || !(tolerance > 0.0)) {
    throw std::invalid_argument("limit surface: bad safety factor or tolerance");
  }
}

LimitSurfaceParams make_limit_surface(const ContactPadParams & pad, double mu)
{
  LimitSurfaceParams p;
  p.mu = mu;
  p.pad_k = pad.pad_k;
  p.pad_gamma = pad.pad_gamma;
  p.torsion_c0 = pad.torsion_c0;
  p.fn_min = pad.fn_min;
  p.fn_max = pad.fn_max;
  p.validate();
  return p;
}

const char * to_string(Modality modality)
{
  return modality == Modality::slipping_avoidance ? "SA" : "GP";
}

double tau_max(double fn, const LimitSurfaceParams & params)
{
  if (fn <= 0.0) {
    return 0.0;
  }
  return params.torsion_c0 * params.mu * fn * params.pad_k * std::pow(fn, params.pad_gamma);
}

namespace
{

bool contained(double ft, double tau, double fn, const LimitSurfaceParams & p)
{
  if (fn <= 0.0) {
    return ft <= 0.0 && tau <= 0.0;
  }
  const double a = ft / (p.mu * fn);
  const double b = tau > 0.0 ? tau / tau_max(fn, p) : 0.0;
  return a * a + b * b <= 1.0;
}

ForceRequirement finalize(double raw, bool reachable, const LimitSurfaceParams & p)
{
  if (!reachable) {
    return {p.fn_max, true};
  }
  const double scaled = p.safety_factor * raw;
  return {std::clamp(scaled, p.fn_min, p.fn_max), scaled > p.fn_max};
}

}  // namespace

double limit_surface_force(double ft, double tau, const LimitSurfaceParams & p)
{
  ft = std::max(ft, 0.0);
  tau = std::max(tau, 0.0);
  if (ft == 0.0 && tau == 0.0) {
    return 0.0;
  }
  double lo = 0.0;
  double hi = p.fn_max;
  while (!contained(ft, tau, hi, p)) {
    hi *= 2.0;
    if (hi > 1e9) {
      return std::numeric_limits<double>::infinity();
    }
  }
  while (hi - lo > p.tolerance) {
    const double mid = 0.5 * (lo + hi);
    if (contained(ft, tau, mid, p)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

ForceRequirement required_fn_SA(const ContactWrench & w, const LimitSurfaceParams & params)
{
  const double raw = limit_surface_force(w.ft, w.tau, params);
  return finalize(raw, std::isfinite(raw), params);
}

ForceRequirement required_fn_GP(const ContactWrench & w, const LimitSurfaceParams & params)
{
  const double raw = std::max(w.ft, 0.0) / params.mu;
  return finalize(raw, true, params);
}

DynamicComponent::DynamicComponent(DynamicSettings settings)
: settings_(settings)
{
  reset();
}

void DynamicComponent::reset()
{
  for (auto & c : channels_) {
    c = Channel{};
  }
  initialized_ = false;
  value_ = 0.0;
}

void DynamicComponent::step(Channel & c, double z, double q, double r) const
{
  const double dt = settings_.sample_period;
  const double prior = c.P + q * dt;
  const double K = prior / (prior + r);
  const double x = c.x + K * (z - c.x);
  c.P = (1.0 - K) * prior;
  c.rate = (x - c.x) / dt;
  c.x = x;
}

double DynamicComponent::update(const ContactWrench & w, const LimitSurfaceParams & params)
{
  const double z[2] = {w.ft, w.tau};
  if (!initialized_) {
    for (int i = 0; i < 2; ++i) {
      channels_[i] = Channel{z[i], settings_.measurement_noise[i], 0.0};
    }
    initialized_ = true;
    value_ = 0.0;
    return value_;
  }
  for (int i = 0; i < 2; ++i) {
    step(channels_[i], z[i], settings_.process_noise[i], settings_.measurement_noise[i]);
  }

  // Implicit-function gradient of the limit-surface force at the current wrench.
  const double ft = std::max(w.ft, 0.0);
  const double tau = std::max(w.tau, 0.0);
  const double fn = limit_surface_force(ft, tau, params);
  double d_ft = 1.0 / params.mu;
  double d_tau = 0.0;
  if (fn > 1e-9 && std::isfinite(fn)) {
    const double tm = tau_max(fn, params);
    const double mu_fn = params.mu * fn;
    const double F_ft = 2.0 * ft / (mu_fn * mu_fn);
    const double F_tau = 2.0 * tau / (tm * tm);
    const double F_fn = -2.0 * ft * ft / (mu_fn * mu_fn * fn) -
      2.0 * tau * tau * (1.0 + params.pad_gamma) / (tm * tm * fn);
    if (F_fn < -1e-12) {
      d_ft = -F_ft / F_fn;
      d_tau = -F_tau / F_fn;
    }
  }
  const double rate = params.safety_factor * (d_ft * ft_rate() + d_tau * tau_rate());
  value_ = settings_.k_dyn * std::max(rate, 0.0);
  return value_;
}

GraspForceOutput compute_grasp_force(
  const ContactWrench & w, const LimitSurfaceParams & params, Modality modality,
  DynamicComponent & history)
{
  GraspForceOutput out;
  out.dynamic = history.update(w, params);
  const ForceRequirement sa = required_fn_SA(w, params);
  const ForceRequirement gp = required_fn_GP(w, params);
  const double sa_total = sa.fn + out.dynamic;
  out.fn_SA = std::clamp(sa_total, params.fn_min, params.fn_max);
  out.fn_GP = gp.fn;
  out.active_modality = modality;
  if (modality == Modality::slipping_avoidance) {
    out.fn_commanded = out.fn_SA;
    out.saturated = sa.saturated || sa_total > params.fn_max;
  } else {
    out.fn_commanded = out.fn_GP;
    out.saturated = gp.saturated;
  }
  return out;
}

}  // namespace pivoplan
