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

#include <CLI11.hpp>

#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "pivoplan/csv.hpp"
#include "pivoplan/harness.hpp"

namespace
{

constexpr int kSceneError = 2;
constexpr int kSolverError = 3;

struct CommonArgs
{
  std::string scene;
  std::string out;
  std::vector<double> heights;
  std::vector<std::string> angles;
  std::vector<std::string> objects;
  std::vector<std::string> mu_override;
  std::uint64_t seed = 1;
  bool no_pivot = false;
  double threshold = 0.01;
};

void add_common(CLI::App & cmd, CommonArgs & a)
{
  cmd.add_option("--scene", a.scene, "Scene YAML file")->required()->check(CLI::ExistingFile);
  cmd.add_option("--out", a.out, "Output directory");
  cmd.add_option("--heights", a.heights, "Support heights (m)");
  cmd.add_option("--angles", a.angles, "Angle grid, e.g. -pi/2 0 free");
  cmd.add_option("--objects", a.objects, "Object names");
  cmd.add_option("--seed", a.seed, "Seed for noise and sampling");
  cmd.add_flag("--no-pivot", a.no_pivot, "Disable the virtual pivot joint");
  cmd.add_option("--mu-override", a.mu_override, "Controller friction, obj=value");
  cmd.add_option("--threshold", a.threshold, "Modality switch threshold (rad/s)")
  ->check(CLI::PositiveNumber);
}

pivoplan::ExperimentSpec make_spec(pivoplan::ExperimentKind kind, const CommonArgs & a)
{
  pivoplan::ExperimentSpec spec;
  spec.kind = kind;
  spec.scene_path = a.scene;
  spec.out_dir = a.out;
  spec.heights = a.heights;
  spec.objects = a.objects;
  spec.seed = a.seed;
  spec.pivoting_enabled = !a.no_pivot;
  spec.threshold = a.threshold;
  for (const auto & s : a.angles) {
    spec.angle_grid.push_back(pivoplan::parse_angle(s));
  }
  for (const auto & s : a.mu_override) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw std::invalid_argument("--mu-override expects obj=value, got '" + s + "'");
    }
    spec.mu_override[s.substr(0, eq)] = std::stod(s.substr(eq + 1));
  }
  return spec;
}

void print_matrices(const std::vector<pivoplan::FeasibilityMatrix> & ms)
{
  for (const auto & m : ms) {
    std::cout << m.to_text() << '\n';
  }
}

}  // namespace

int main(int argc, char ** argv)
{
  CLI::App app{"Pick-and-place planning with gripper pivoting"};
  app.require_subcommand(1);

  CommonArgs desk_args, shelf_args, stab_args, sens_args, plan_args;
  auto * desk = app.add_subcommand("desk", "Desk feasibility matrices");
  add_common(*desk, desk_args);
  auto * shelf = app.add_subcommand("shelf", "Shelf feasibility matrices and executions");
  add_common(*shelf, shelf_args);
  auto * stab = app.add_subcommand("stability", "Repeated pivoting rollouts with contact noise");
  add_common(*stab, stab_args);
  auto * sens = app.add_subcommand("sensitivity", "Replays with a mismatched controller friction");
  add_common(*sens, sens_args);

  auto * single = app.add_subcommand("plan", "Plan one request and print the outcome");
  add_common(*single, plan_args);
  std::string support;
  std::string start = "free";
  std::string goal = "free";
  std::string traj_out;
  single->add_option("--support", support, "Support obstacle (default: task support)");
  single->add_option("--start", start, "Start angle");
  single->add_option("--goal", goal, "Goal angle");
  single->add_option("--trajectory", traj_out, "Write the joint trajectory CSV here");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*desk) {
      const auto spec = make_spec(pivoplan::ExperimentKind::desk, desk_args);
      const auto scene = pivoplan::load_scene(spec.scene_path);
      print_matrices(pivoplan::run_desk(spec, scene));
    } else if (*shelf) {
      const auto spec = make_spec(pivoplan::ExperimentKind::shelf, shelf_args);
      const auto scene = pivoplan::load_scene(spec.scene_path);
      print_matrices(pivoplan::run_shelf(spec, scene));
    } else if (*stab) {
      const auto spec = make_spec(pivoplan::ExperimentKind::stability, stab_args);
      const auto scene = pivoplan::load_scene(spec.scene_path);
      const auto rep = pivoplan::run_stability(spec, scene);
      for (const auto & r : rep.runs) {
        std::cout << (r.fast ? "fast" : "slow") << " offset " <<
          pivoplan::format_fixed(r.initial_offset, 3) << " final " <<
          pivoplan::format_fixed(r.final_deviation, 4) << " max " <<
          pivoplan::format_fixed(r.max_deviation, 4) << (r.dropped ? " DROPPED" : "") << '\n';
      }
      std::cout << "slow mean " << pivoplan::format_fixed(rep.mean_slow, 4) << " max " <<
        pivoplan::format_fixed(rep.max_slow, 4) << "\nfast mean " <<
        pivoplan::format_fixed(rep.mean_fast, 4) << " max " <<
        pivoplan::format_fixed(rep.max_fast, 4) << "\ndrops " << rep.drops << '\n';
    } else if (*sens) {
      const auto spec = make_spec(pivoplan::ExperimentKind::sensitivity, sens_args);
      const auto scene = pivoplan::load_scene(spec.scene_path);
      for (const auto & c : pivoplan::run_sensitivity(spec, scene)) {
        std::cout << c.object << " on " << c.support << " mu_ctrl " <<
          pivoplan::format_fixed(c.mu_controller, 2) << " mu_true " <<
          pivoplan::format_fixed(c.mu_true, 2) << ": " << pivoplan::to_string(c.outcome) <<
          " (final deviation " << pivoplan::format_fixed(c.final_deviation, 3) << ")\n";
      }
    } else if (*single) {
      const auto spec = make_spec(pivoplan::ExperimentKind::desk, plan_args);
      const auto loaded = pivoplan::load_scene(spec.scene_path);
      const std::string sup = support.empty() ? loaded.task.support : support;
      std::shared_ptr<const pivoplan::SceneDescription> scene;
      if (!spec.heights.empty()) {
        scene = pivoplan::scene_with_support_height(loaded, sup, spec.heights.front());
      } else {
        scene = std::make_shared<const pivoplan::SceneDescription>(loaded);
      }
      const std::string object = spec.objects.empty() ? [&] {
          const auto it = loaded.task.object_for_support.find(sup);
          return it != loaded.task.object_for_support.end() ? it->second : loaded.task.pick_object;
        }() : spec.objects.front();
      const auto req = pivoplan::make_request(
        scene, object, sup, pivoplan::parse_angle(start), pivoplan::parse_angle(goal),
        spec.pivoting_enabled);
      const auto res = pivoplan::plan(req);
      std::cout << pivoplan::to_string(res.outcome) << " start " <<
        pivoplan::format_fixed(res.chosen_start_angle, 3) << " goal " <<
        pivoplan::format_fixed(res.chosen_goal_angle, 3) << " rows " << res.max_constraint_rows <<
        " wall " << pivoplan::format_fixed(res.planning_time_s, 3) << "s";
      if (res.trajectory) {
        std::cout << " duration " << pivoplan::format_fixed(res.trajectory->duration(), 2);
      }
      if (!res.detail.empty()) {
        std::cout << " (" << res.detail << ")";
      }
      std::cout << '\n';
      if (res.trajectory && !traj_out.empty()) {
        std::vector<std::string> header{"t"};
        header.insert(header.end(), res.trajectory->joint_names.begin(),
          res.trajectory->joint_names.end());
        pivoplan::CsvTable table(header);
        for (std::size_t k = 0; k < res.trajectory->samples.size(); ++k) {
          std::vector<std::string> row{pivoplan::format_fixed(res.trajectory->times[k], 3)};
          const auto & q = res.trajectory->samples[k];
          for (Eigen::Index i = 0; i < q.size(); ++i) {
            row.push_back(pivoplan::format_fixed(q(i), 6));
          }
          table.add_row(row);
        }
        table.write(traj_out);
      }
    }
  } catch (const pivoplan::SceneError & e) {
    std::cerr << "scene error: " << e.what() << '\n';
    return kSceneError;
  } catch (const pivoplan::KinematicsError & e) {
    std::cerr << "scene error: " << e.what() << '\n';
    return kSceneError;
  } catch (const std::invalid_argument & e) {
    std::cerr << "invalid argument: " << e.what() << '\n';
    return 1;
  } catch (const std::exception & e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    return kSolverError;
  }
  return 0;
}
