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

#ifndef PIVOPLAN__QP_SOLVER_HPP_
#define PIVOPLAN__QP_SOLVER_HPP_

#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "pivoplan/geometry.hpp"

namespace pivoplan
{

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/**
 * @brief One scalar task-function row of the velocity QP.
 *
 * Soft rows get a private slack s with lower <= g.qdot + s <= upper and cost
 * weight * s^2. Hard rows have no slack. Either bound may be infinite.
 */
struct Constraint
{
  std::string name;
  double value = 0.0;
  VecX gradient;
  double lower_rate = -kInf;
  double upper_rate = kInf;
  double weight = 1.0;
  bool hard = false;
};

enum class QpStatus
{
  optimal,
  infeasible,
  iteration_limit,
};

struct QpOptions
{
  double regularization = 1e-3;
  std::size_t max_iterations = 1000;
  double feasibility_tolerance = 1e-10;
};

struct StepSolution
{
  QpStatus status = QpStatus::infeasible;
  VecX qdot;
  VecX slack;  // one entry per constraint, zero for hard rows
  std::size_t iterations = 0;
  std::size_t active_rows = 0;
};

/**
 * @brief Dense strictly convex QP  min 1/2 x'Gx + a'x  s.t.  C'x >= b.
 *
 * Dual active-set method of Goldfarb and Idnani. G must be symmetric
 * positive definite. Columns of C are the constraint normals.
 */
struct DenseQpResult
{
  QpStatus status = QpStatus::infeasible;
  VecX x;
  VecX multipliers;  // one per column of C, zero when inactive
  std::vector<Eigen::Index> active;
  std::size_t iterations = 0;
};

DenseQpResult solve_dense_qp(
  const MatX & G, const VecX & a, const MatX & C, const VecX & b,
  std::size_t max_iterations = 1000, double tolerance = 1e-10);

/**
 * @brief Resolves one planner step for the joint velocities.
 *
 * Minimizes r |qdot|^2 + sum_i w_i s_i^2 over the constraint set. Soft rows
 * with zero weight are ignored. Throws std::invalid_argument on size
 * mismatches, crossed bounds or negative weights.
 */
StepSolution solve_step(
  const std::vector<Constraint> & constraints, std::size_t dof, const QpOptions & options = {});

}  // namespace pivoplan

#endif  // PIVOPLAN__QP_SOLVER_HPP_
