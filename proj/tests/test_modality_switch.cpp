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

#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <random>
#include <sstream>

#include "pivoplan/modality_switch.hpp"
#include "oracles.hpp"

namespace pivoplan
{
namespace
{

constexpr double kDt = 0.05;

Trajectory make_trajectory(const std::function<double(double)> & pivot, double duration)
{
  return oracle::synthetic_trajectory(pivot, duration, kDt);
}

// Pivot angle that rests, turns at 0.05 rad/s over [1, 2), then rests.
double piecewise_pivot(double t)
{
  return 0.05 * std::clamp(t - 1.0, 0.0, 1.0);
}

TEST(Schedule, StillPivotIsSlippingAvoidanceOnly)
{
  const auto s = compute_schedule(make_trajectory([](double) {return 0.3;}, 3.0));
  ASSERT_EQ(s.events.size(), 1u);
  EXPECT_EQ(s.events[0].time, 0.0);
  EXPECT_EQ(s.events[0].command, Modality::slipping_avoidance);
}

TEST(Schedule, PiecewiseRotation)
{
  const auto s = compute_schedule(make_trajectory(piecewise_pivot, 3.0));
  ASSERT_EQ(s.events.size(), 3u);
  EXPECT_NEAR(s.events[0].time, 0.0, 1e-12);
  EXPECT_EQ(s.events[0].command, Modality::slipping_avoidance);
  EXPECT_NEAR(s.events[1].time, 1.0, kDt + 1e-9);
  EXPECT_EQ(s.events[1].command, Modality::gripper_pivoting);
  EXPECT_NEAR(s.events[2].time, 2.0, kDt + 1e-9);
  EXPECT_EQ(s.events[2].command, Modality::slipping_avoidance);
  EXPECT_EQ(s.at(1.5), Modality::gripper_pivoting);
  EXPECT_EQ(s.at(2.5), Modality::slipping_avoidance);
  const auto gp = s.gp_intervals(3.0);
  ASSERT_EQ(gp.size(), 1u);
  EXPECT_EQ(gp[0].first, s.events[1].time);
  EXPECT_EQ(gp[0].second, s.events[2].time);
}

TEST(Schedule, SlowRotationBelowThreshold)
{
  const auto s = compute_schedule(make_trajectory([](double t) {return 0.009 * t;}, 3.0));
  ASSERT_EQ(s.events.size(), 1u);
  EXPECT_EQ(s.events[0].command, Modality::slipping_avoidance);
}

TEST(Schedule, EventsMatchAnalyticCrossings)
{
  std::mt19937 rng(21);
  const double duration = 10.0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto f = oracle::random_pivot(rng);
    const auto traj = make_trajectory([&](double t) {return f.position(t);}, duration);
    const auto s = compute_schedule(traj);
    const auto crossings = oracle::analytic_crossings(f, 0.01, duration, kDt);
    EXPECT_EQ(oracle::crossing_mismatches(s, crossings, kDt, duration), 0u) << trial;
  }
}

TEST(Schedule, EventsAlternate)
{
  std::mt19937 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const auto f = oracle::random_pivot(rng);
    const auto s = compute_schedule(make_trajectory([&](double t) {return f.position(t);}, 8.0));
    ASSERT_FALSE(s.events.empty());
    EXPECT_EQ(s.events[0].time, 0.0);
    for (std::size_t i = 1; i < s.events.size(); ++i) {
      EXPECT_NE(s.events[i].command, s.events[i - 1].command);
      EXPECT_GT(s.events[i].time, s.events[i - 1].time);
    }
  }
}

TEST(Schedule, HysteresisSuppressesChattering)
{
  // Velocity hovering at the threshold with sample-level noise.
  std::mt19937 rng(8);
  const Trajectory traj = oracle::chattering_trajectory(rng, 400, kDt);
  ScheduleOptions plain;
  ScheduleOptions hyst;
  hyst.hysteresis = true;
  const auto chatter = compute_schedule(traj, plain);
  const auto calm = compute_schedule(traj, hyst);
  EXPECT_LT(calm.events.size(), chatter.events.size());
  EXPECT_GE(oracle::shortest_run(calm),
    static_cast<double>(hyst.min_region_samples) * kDt - 1e-9);
}

TEST(Schedule, CsvRoundTrip)
{
  const auto s = compute_schedule(make_trajectory(piecewise_pivot, 3.0));
  std::ostringstream out;
  write_schedule_csv(out, s);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "time,command");
  std::size_t i = 0;
  while (std::getline(in, line)) {
    ASSERT_LT(i, s.events.size());
    const auto comma = line.find(',');
    EXPECT_NEAR(std::stod(line.substr(0, comma)), s.events[i].time, 5e-4);
    EXPECT_EQ(line.substr(comma + 1), to_string(s.events[i].command));
    ++i;
  }
  EXPECT_EQ(i, s.events.size());
}

TEST(Schedule, Errors)
{
  auto traj = make_trajectory(piecewise_pivot, 1.0);
  EXPECT_THROW(compute_schedule(traj, 0.0), ScheduleError);
  auto ragged = traj;
  ragged.times[3] += 0.01;
  EXPECT_THROW(compute_schedule(ragged), ScheduleError);
  auto no_pivot = traj;
  no_pivot.pivot_index.reset();
  EXPECT_THROW(compute_schedule(no_pivot), ScheduleError);
  EXPECT_THROW(virtual_joint_velocity(no_pivot), ScheduleError);
}

// Observations at 1 ms, robot joint interpolated, pivot reading garbage.
std::vector<std::pair<double, Configuration>> observe_stream(const Trajectory & traj)
{
  std::vector<std::pair<double, Configuration>> obs;
  const double end = traj.times.back();
  for (int k = 0; 0.001 * k <= end + 1e-12; ++k) {
    const double t = 0.001 * k;
    obs.emplace_back(t, Configuration(Eigen::Vector2d(t, 42.0)));
  }
  return obs;
}

TEST(Dispatch, DeliversEveryEventOnTime)
{
  const auto traj = make_trajectory(piecewise_pivot, 3.0);
  const auto s = compute_schedule(traj);
  std::vector<std::pair<Modality, double>> sunk;
  const auto report = dispatch(s, traj, observe_stream(traj),
      [&](Modality m, double t) {sunk.emplace_back(m, t);});
  EXPECT_TRUE(report.completed);
  ASSERT_EQ(report.deliveries.size(), 3u);
  ASSERT_EQ(sunk.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(report.deliveries[i].event.command, s.events[i].command);
    EXPECT_LE(std::abs(report.deliveries[i].delivered_at - s.events[i].time), 0.002);
    EXPECT_EQ(sunk[i].first, s.events[i].command);
  }
}

TEST(Dispatch, EmptyTrajectoryGivesSingleCommand)
{
  Trajectory traj;
  traj.pivot_index = 1;
  const auto s = compute_schedule(traj);
  ASSERT_EQ(s.events.size(), 1u);
  const auto report = dispatch(s, traj, {}, nullptr);
  ASSERT_EQ(report.deliveries.size(), 1u);
  EXPECT_EQ(report.deliveries[0].event.command, Modality::slipping_avoidance);
  EXPECT_TRUE(report.completed);
}

TEST(Dispatch, AbortKeepsPrefix)
{
  const auto traj = make_trajectory(piecewise_pivot, 3.0);
  const auto s = compute_schedule(traj);
  const auto report = dispatch(s, traj, observe_stream(traj), nullptr, 1.5);
  EXPECT_FALSE(report.completed);
  EXPECT_FALSE(report.abort_reason.empty());
  ASSERT_EQ(report.deliveries.size(), 2u);
  for (std::size_t i = 0; i < report.deliveries.size(); ++i) {
    EXPECT_EQ(report.deliveries[i].event.time, s.events[i].time);
  }
}

}  // namespace
}  // namespace pivoplan
