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

#ifndef PIVOPLAN__TESTS__ORACLES_HPP_
#define PIVOPLAN__TESTS__ORACLES_HPP_

// Brute-force references shared by the unit tests and the acceptance binary.

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "pivoplan/grasp_control.hpp"
#include "pivoplan/kinematics.hpp"
#include "pivoplan/modality_switch.hpp"
#include "pivoplan/planner.hpp"
#include "pivoplan/qp_solver.hpp"

namespace pivoplan::oracle
{

inline Constraint row(VecX g, double lower, double upper, double weight = 1.0, bool hard = false)
{
  Constraint c;
  c.name = "row";
  c.gradient = std::move(g);
  c.lower_rate = lower;
  c.upper_rate = upper;
  c.weight = weight;
  c.hard = hard;
  return c;
}

inline double qp_objective(const std::vector<Constraint> & rows, const VecX & x, double r)
{
  double f = r * x.squaredNorm();
  for (const auto & c : rows) {
    if (c.hard) {
      continue;
    }
    const double e = c.gradient.dot(x);
    const double s = e < c.lower_rate ? c.lower_rate - e : (e > c.upper_rate ? e - c.upper_rate : 0.0);
    f += c.weight * s * s;
  }
  return f;
}

inline bool hard_feasible(const std::vector<Constraint> & rows, const VecX & x, double tol)
{
  for (const auto & c : rows) {
    const double e = c.gradient.dot(x);
    if (c.hard && (e < c.lower_rate - tol || e > c.upper_rate + tol)) {
      return false;
    }
  }
  return true;
}

// Exhaustive oracle: every row is below, inside or above its band. Each assignment fixes a
// smooth quadratic (soft rows) or an equality (hard rows at a bound); its minimiser is a
// candidate. The best feasible candidate under the true objective is the global optimum.
inline VecX brute_force_qp(const std::vector<Constraint> & rows, std::size_t dof, double r)
{
  const auto n = static_cast<Eigen::Index>(dof);
  const std::size_t m = rows.size();
  std::size_t combos = 1;
  for (std::size_t i = 0; i < m; ++i) {
    combos *= 3;
  }
  VecX best;
  double best_f = kInf;
  for (std::size_t code = 0; code < combos; ++code) {
    MatX H = 2.0 * r * MatX::Identity(n, n);
    VecX lin = VecX::Zero(n);
    std::vector<std::pair<VecX, double>> eq;
    std::size_t c = code;
    bool skip = false;
    for (std::size_t i = 0; i < m; ++i) {
      const int state = static_cast<int>(c % 3);
      c /= 3;
      const Constraint & k = rows[i];
      if (state == 1) {
        continue;
      }
      const double bound = state == 0 ? k.lower_rate : k.upper_rate;
      if (!std::isfinite(bound)) {
        skip = true;
        break;
      }
      if (k.hard) {
        eq.emplace_back(k.gradient, bound);
      } else {
        H += 2.0 * k.weight * k.gradient * k.gradient.transpose();
        lin -= 2.0 * k.weight * bound * k.gradient;
      }
    }
    if (skip) {
      continue;
    }
    const auto ne = static_cast<Eigen::Index>(eq.size());
    MatX K = MatX::Zero(n + ne, n + ne);
    VecX rhs = VecX::Zero(n + ne);
    K.topLeftCorner(n, n) = H;
    rhs.head(n) = -lin;
    for (Eigen::Index j = 0; j < ne; ++j) {
      K.block(0, n + j, n, 1) = eq[static_cast<std::size_t>(j)].first;
      K.block(n + j, 0, 1, n) = eq[static_cast<std::size_t>(j)].first.transpose();
      rhs(n + j) = eq[static_cast<std::size_t>(j)].second;
    }
    Eigen::FullPivLU<MatX> lu(K);
    if (lu.rank() < K.rows()) {
      continue;
    }
    const VecX x = lu.solve(rhs).head(n);
    if (!hard_feasible(rows, x, 1e-9)) {
      continue;
    }
    const double f = qp_objective(rows, x, r);
    if (f < best_f) {
      best_f = f;
      best = x;
    }
  }
  return best;
}

struct QpInstance
{
  std::vector<Constraint> rows;
  std::size_t dof = 0;
};

/// Up to 4 DOF and 6 rows; hard rows bracket a common point so the hard set is feasible.
inline QpInstance random_qp(std::mt19937 & rng)
{
  std::uniform_int_distribution<int> dof_dist(1, 4);
  std::uniform_int_distribution<int> rows_dist(1, 6);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_real_distribution<double> w(0.1, 100.0);
  QpInstance out;
  out.dof = static_cast<std::size_t>(dof_dist(rng));
  const int m = rows_dist(rng);
  VecX x0(static_cast<Eigen::Index>(out.dof));
  for (Eigen::Index i = 0; i < x0.size(); ++i) {
    x0(i) = u(rng);
  }
  for (int i = 0; i < m; ++i) {
    VecX g(static_cast<Eigen::Index>(out.dof));
    for (Eigen::Index k = 0; k < g.size(); ++k) {
      g(k) = u(rng);
    }
    const bool hard = u(rng) > 0.4;
    double lo;
    double hi;
    if (hard) {
      const double e = g.dot(x0);
      lo = e - std::abs(u(rng));
      hi = e + std::abs(u(rng));
    } else {
      lo = u(rng);
      hi = lo + std::abs(u(rng));
    }
    const double pick = u(rng);
    if (pick > 0.7) {
      lo = -kInf;
    } else if (pick < -0.7) {
      hi = kInf;
    }
    out.rows.push_back(row(g, lo, hi, w(rng), hard));
  }
  return out;
}

/// Largest column error between the analytic Jacobian and central differences of FK.
inline double jacobian_fd_error(
  const KinematicModel & model, const Configuration & q, const std::string & link,
  const Vec3 & point, double h = 1e-6)
{
  const MatX jac = jacobian(model, q, link, point);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < q.size(); ++i) {
    Configuration qp = q;
    Configuration qm = q;
    qp(i) += h;
    qm(i) -= h;
    const Transform tp = forward_kinematics(model, qp, link);
    const Transform tm = forward_kinematics(model, qm, link);
    const Vec3 lin = (tp * point - tm * point) / (2.0 * h);
    const Vec3 ang = rotation_error(tm.linear(), tp.linear()) / (2.0 * h);
    worst = std::max(worst, (lin - jac.block<3, 1>(0, i)).norm());
    worst = std::max(worst, (ang - jac.block<3, 1>(3, i)).norm());
  }
  return worst;
}

inline bool inside_limit_surface(double ft, double tau, double fn, const LimitSurfaceParams & p)
{
  const double a = ft / (p.mu * fn);
  const double b = tau / tau_max(fn, p);
  return a * a + b * b <= 1.0;
}

/// Slipping-avoidance force by scanning fn on a 1e-4 N grid (a 1e-2 N pass brackets the scan).
inline double grid_search_fn(double ft, double tau, const LimitSurfaceParams & p)
{
  if (ft <= 0.0 && tau <= 0.0) {
    return p.fn_min;
  }
  const double limit = p.fn_max / p.safety_factor + 0.01;
  double coarse = 0.0;
  while (coarse < limit && !inside_limit_surface(ft, tau, coarse + 0.01, p)) {
    coarse += 0.01;
  }
  double fn = coarse;
  while (fn < coarse + 0.0101 && !(fn > 0.0 && inside_limit_surface(ft, tau, fn, p))) {
    fn += 1e-4;
  }
  return std::clamp(p.safety_factor * fn, p.fn_min, p.fn_max);
}

/// Random wrench and friction coefficient for the force oracle.
struct WrenchSample
{
  ContactWrench wrench;
  LimitSurfaceParams params;
};

inline WrenchSample random_wrench(std::mt19937 & rng)
{
  std::uniform_real_distribution<double> ft(0.0, 6.0);
  std::uniform_real_distribution<double> tau(0.0, 0.06);
  std::uniform_real_distribution<double> mu(0.2, 1.0);
  WrenchSample s;
  s.params.mu = mu(rng);
  s.wrench.ft = ft(rng);
  s.wrench.tau = tau(rng);
  return s;
}

/// Virtual-joint motion with an analytic velocity: two cosines.
struct SmoothPivot
{
  double a1, w1, p1, a2, w2, p2;

  double velocity(double t) const
  {
    return a1 * std::cos(w1 * t + p1) + a2 * std::cos(w2 * t + p2);
  }
  double position(double t) const
  {
    return a1 / w1 * std::sin(w1 * t + p1) + a2 / w2 * std::sin(w2 * t + p2);
  }
  /// Central difference of the position over +-dt, the velocity the schedule is defined on.
  double sampled_velocity(double t, double dt) const
  {
    return (position(t + dt) - position(t - dt)) / (2.0 * dt);
  }
};

inline SmoothPivot random_pivot(std::mt19937 & rng)
{
  std::uniform_real_distribution<double> amp(0.0, 0.04);
  std::uniform_real_distribution<double> freq(0.3, 2.0);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * kPi);
  return {amp(rng), freq(rng), phase(rng), amp(rng), freq(rng), phase(rng)};
}

/// Two-joint trajectory: joint 0 is a robot joint advancing with time, joint 1 the pivot.
inline Trajectory synthetic_trajectory(
  const std::function<double(double)> & pivot, double duration, double dt)
{
  Trajectory traj;
  traj.joint_names = {"robot", "pivot"};
  traj.pivot_index = 1;
  traj.timestep = dt;
  const int n = static_cast<int>(std::round(duration / dt)) + 1;
  for (int i = 0; i < n; ++i) {
    const double t = dt * i;
    traj.times.push_back(t);
    traj.samples.push_back(Configuration(Eigen::Vector2d(t, pivot(t))));
  }
  return traj;
}

/// Times where the central-difference |v| crosses the threshold, by dense scan and bisection.
inline std::vector<double> analytic_crossings(
  const SmoothPivot & f, double threshold, double duration, double dt)
{
  auto g = [&](double t) {return std::abs(f.sampled_velocity(t, dt)) - threshold;};
  std::vector<double> out;
  const double h = 1e-3;
  for (double t = 0.0; t + h <= duration + 1e-12; t += h) {
    if ((g(t) >= 0.0) != (g(t + h) >= 0.0)) {
      double lo = t;
      double hi = t + h;
      for (int k = 0; k < 40; ++k) {
        const double mid = 0.5 * (lo + hi);
        ((g(mid) >= 0.0) == (g(lo) >= 0.0) ? lo : hi) = mid;
      }
      out.push_back(0.5 * (lo + hi));
    }
  }
  return out;
}

inline double nearest_gap(const std::vector<double> & xs, double x)
{
  double best = kInf;
  for (double v : xs) {
    best = std::min(best, std::abs(v - x));
  }
  return best;
}

/// Number of schedule/crossing mismatches beyond one timestep. The initial event stands for
/// crossings before the first sample. Crossing pairs closer than two samples bound an
/// excursion the samples may miss, so they are not required.
inline std::size_t crossing_mismatches(
  const SwitchSchedule & s, const std::vector<double> & crossings, double dt, double duration)
{
  std::size_t bad = 0;
  std::vector<double> event_times;
  if (!s.events.empty()) {
    event_times.push_back(s.events.front().time);
  }
  for (std::size_t i = 1; i < s.events.size(); ++i) {
    event_times.push_back(s.events[i].time);
    if (nearest_gap(crossings, s.events[i].time) > dt + 1e-9) {
      ++bad;
    }
  }
  for (std::size_t i = 0; i < crossings.size(); ++i) {
    const bool isolated = (i == 0 || crossings[i] - crossings[i - 1] > 2.0 * dt) &&
      (i + 1 == crossings.size() || crossings[i + 1] - crossings[i] > 2.0 * dt);
    if (isolated && crossings[i] < duration - dt &&
      nearest_gap(event_times, crossings[i]) > dt + 1e-9)
    {
      ++bad;
    }
  }
  return bad;
}

/// Pivot angle creeping at the threshold rate with per-sample velocity noise.
inline Trajectory chattering_trajectory(std::mt19937 & rng, std::size_t n, double dt)
{
  std::normal_distribution<double> noise(0.0, 0.004);
  Trajectory traj = synthetic_trajectory([](double) {return 0.0;}, dt * static_cast<double>(n - 1), dt);
  double angle = 0.0;
  for (std::size_t i = 1; i < traj.samples.size(); ++i) {
    angle += dt * (0.01 + noise(rng));
    traj.samples[i](1) = angle;
  }
  return traj;
}

/// Shortest run between consecutive events (the trailing run is open-ended and skipped).
inline double shortest_run(const SwitchSchedule & s)
{
  double out = kInf;
  for (std::size_t i = 1; i < s.events.size(); ++i) {
    out = std::min(out, s.events[i].time - s.events[i - 1].time);
  }
  return out;
}

}  // namespace pivoplan::oracle

#endif  // PIVOPLAN__TESTS__ORACLES_HPP_
