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

#include <benchmark/benchmark.h>

#include <memory>
#include <random>
#include <string>

#include "pivoplan/grasp_control.hpp"
#include "pivoplan/harness.hpp"
#include "pivoplan/qp_solver.hpp"

namespace pivoplan
{
namespace
{

SceneDescription load(const std::string & name)
{
  return load_scene(std::string(PIVOPLAN_SCENE_DIR) + "/" + name);
}

// Dense random problem of the size the planner produces per step.
void BM_SolveStep(benchmark::State & state)
{
  const auto dof = static_cast<std::size_t>(state.range(0));
  const auto rows = static_cast<int>(state.range(1));
  std::mt19937 rng(1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Constraint> cs;
  for (int i = 0; i < rows; ++i) {
    Constraint c;
    c.name = "row";
    c.gradient = VecX::NullaryExpr(static_cast<Eigen::Index>(dof), [&]() {return u(rng);});
    c.lower_rate = -std::abs(u(rng));
    c.upper_rate = std::abs(u(rng));
    c.weight = 1.0;
    c.hard = i % 3 == 0;
    cs.push_back(std::move(c));
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_step(cs, dof));
  }
}
BENCHMARK(BM_SolveStep)->Args({10, 30})->Args({10, 120})->Args({10, 300});

void BM_MinDistance(benchmark::State & state)
{
  const SceneDescription shelf = load("shelf.yaml");
  const KinematicModel model = planning_model(shelf, shelf.task.pick_object);
  const Configuration q = model.zero_configuration();
  for (auto _ : state) {
    benchmark::DoNotOptimize(min_distance_robot_scene(model, q, shelf));
  }
}
BENCHMARK(BM_MinDistance);

void BM_RequiredFnSA(benchmark::State & state)
{
  const LimitSurfaceParams p;
  const ContactWrench w{2.0, 0.02, 0.0};
  for (auto _ : state) {
    benchmark::DoNotOptimize(required_fn_SA(w, p));
  }
}
BENCHMARK(BM_RequiredFnSA);

void BM_PlanDesk(benchmark::State & state)
{
  const SceneDescription desk = load("desk.yaml");
  const auto scene = scene_with_support_height(desk, desk.task.support, 1.31);
  const PlanRequest req = make_request(
    scene, desk.task.pick_object, desk.task.support, 0.0, std::nullopt, true);
  for (auto _ : state) {
    benchmark::DoNotOptimize(plan(req));
  }
}
BENCHMARK(BM_PlanDesk)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace pivoplan

BENCHMARK_MAIN();
