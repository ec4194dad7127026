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

#include "pivoplan/qp_solver.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pivoplan
{

DenseQpResult solve_dense_qp(
  const MatX & G, const VecX & a, const MatX & C, const VecX & b,
  std::size_t max_iterations, double tolerance)
{
  const Eigen::Index n = G.rows();
  const Eigen::Index m = C.cols();
  if (G.cols() != n || a.size() != n || C.rows() != n || b.size() != m) {
    throw std::invalid_argument("solve_dense_qp: inconsistent dimensions");
  }

  DenseQpResult res;
  const Eigen::LLT<MatX> llt(G);
  if (llt.info() != Eigen::Success) {
    throw std::invalid_argument("solve_dense_qp: G is not positive definite");
  }
  const MatX Ginv = llt.solve(MatX::Identity(n, n));

  res.x = -Ginv * a;
  res.multipliers = VecX::Zero(m);
  std::vector<Eigen::Index> & A = res.active;
  std::vector<double> u;
  std::vector<bool> in_active(static_cast<std::size_t>(m), false);

  MatX N(n, 0);
  MatX GiN(n, 0);
  Eigen::LDLT<MatX> Mfact;

  auto refresh = [&]() {
      const auto k = static_cast<Eigen::Index>(A.size());
      N.resize(n, k);
      for (Eigen::Index j = 0; j < k; ++j) {
        N.col(j) = C.col(A[static_cast<std::size_t>(j)]);
      }
      GiN = Ginv * N;
      if (k > 0) {
        Mfact.compute(N.transpose() * GiN);
      }
    };

  auto drop = [&](std::size_t idx) {
      in_active[static_cast<std::size_t>(A[idx])] = false;
      A.erase(A.begin() + static_cast<std::ptrdiff_t>(idx));
      u.erase(u.begin() + static_cast<std::ptrdiff_t>(idx));
      refresh();
    };

  refresh();
  while (true) {
    if (res.iterations >= max_iterations) {
      res.status = QpStatus::iteration_limit;
      break;
    }
    // Most violated inactive constraint.
    Eigen::Index p = -1;
    double worst = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
      if (in_active[static_cast<std::size_t>(i)]) {
        continue;
      }
      const double s = C.col(i).dot(res.x) - b(i);
      const double scale = 1.0 + std::abs(b(i));
      if (s < -tolerance * scale && s / scale < worst) {
        worst = s / scale;
        p = i;
      }
    }
    if (p < 0) {
      res.status = QpStatus::optimal;
      break;
    }

    const VecX np = C.col(p);
    double up = 0.0;
    bool added = false;
    bool failed = false;
    while (!added) {
      ++res.iterations;
      if (res.iterations > max_iterations) {
        failed = true;
        res.status = QpStatus::iteration_limit;
        break;
      }
      const VecX Gin = Ginv * np;
      VecX r;
      VecX z = Gin;
      if (!A.empty()) {
        r = Mfact.solve(GiN.transpose() * np);
        z -= GiN * r;
      }

      double t1 = kInf;
      std::size_t k = 0;
      for (std::size_t j = 0; j < A.size(); ++j) {
        const double rj = r(static_cast<Eigen::Index>(j));
        if (rj > 1e-14) {
          const double ratio = u[j] / rj;
          if (ratio < t1) {
            t1 = ratio;
            k = j;
          }
        }
      }
      const double zn = z.dot(np);
      double t2 = kInf;
      if (z.norm() > 1e-12 * (1.0 + np.norm()) && zn > 0.0) {
        t2 = -(np.dot(res.x) - b(p)) / zn;
      }

      if (std::isinf(t1) && std::isinf(t2)) {
        failed = true;
        res.status = QpStatus::infeasible;
        break;
      }
      if (std::isinf(t2)) {
        for (std::size_t j = 0; j < A.size(); ++j) {
          u[j] -= t1 * r(static_cast<Eigen::Index>(j));
        }
        up += t1;
        drop(k);
        continue;
      }
      const double t = std::min(t1, t2);
      res.x += t * z;
      for (std::size_t j = 0; j < A.size(); ++j) {
        u[j] -= t * r(static_cast<Eigen::Index>(j));
      }
      up += t;
      if (t2 <= t1) {
        A.push_back(p);
        u.push_back(up);
        in_active[static_cast<std::size_t>(p)] = true;
        refresh();
        added = true;
      } else {
        drop(k);
      }
    }
    if (failed) {
      break;
    }
  }

  for (std::size_t j = 0; j < A.size(); ++j) {
    res.multipliers(A[j]) = std::max(0.0, u[j]);
  }
  return res;
}

StepSolution solve_step(
  const std::vector<Constraint> & constraints, std::size_t dof, const QpOptions & options)
{
  if (dof == 0) {
    throw std::invalid_argument("solve_step: dof must be at least 1");
  }
  if (!(options.regularization > 0.0)) {
    throw std::invalid_argument("solve_step: regularization must be positive");
  }
  const auto n = static_cast<Eigen::Index>(dof);

  std::vector<std::size_t> soft_index(constraints.size(), 0);
  Eigen::Index soft = 0;
  Eigen::Index rows = 0;
  for (std::size_t i = 0; i < constraints.size(); ++i) {
    const Constraint & c = constraints[i];
    if (c.gradient.size() != n) {
      throw std::invalid_argument("solve_step: constraint '" + c.name + "' has wrong gradient size");
    }
    if (c.lower_rate > c.upper_rate) {
      throw std::invalid_argument("solve_step: constraint '" + c.name + "' has lower > upper");
    }
    if (!c.hard && !(c.weight >= 0.0 && std::isfinite(c.weight))) {
      throw std::invalid_argument("solve_step: constraint '" + c.name + "' has invalid weight");
    }
    if (!c.hard && c.weight == 0.0) {
      continue;
    }
    if (!c.hard) {
      soft_index[i] = static_cast<std::size_t>(n + soft);
      ++soft;
    }
    rows += std::isfinite(c.lower_rate) ? 1 : 0;
    rows += std::isfinite(c.upper_rate) ? 1 : 0;
  }

  const Eigen::Index nv = n + soft;
  VecX diag(nv);
  diag.head(n).setConstant(2.0 * options.regularization);
  MatX C = MatX::Zero(nv, rows);
  VecX b(rows);
  Eigen::Index col = 0;
  for (std::size_t i = 0; i < constraints.size(); ++i) {
    const Constraint & c = constraints[i];
    if (!c.hard && c.weight == 0.0) {
      continue;
    }
    const bool has_slack = !c.hard;
    if (has_slack) {
      diag(static_cast<Eigen::Index>(soft_index[i])) = 2.0 * c.weight;
    }
    if (std::isfinite(c.lower_rate)) {
      C.col(col).head(n) = c.gradient;
      if (has_slack) {
        C(static_cast<Eigen::Index>(soft_index[i]), col) = 1.0;
      }
      b(col) = c.lower_rate;
      ++col;
    }
    if (std::isfinite(c.upper_rate)) {
      C.col(col).head(n) = -c.gradient;
      if (has_slack) {
        C(static_cast<Eigen::Index>(soft_index[i]), col) = -1.0;
      }
      b(col) = -c.upper_rate;
      ++col;
    }
  }

  const MatX G = diag.asDiagonal();
  const DenseQpResult qp = solve_dense_qp(
    G, VecX::Zero(nv), C, b, options.max_iterations, options.feasibility_tolerance);

  StepSolution out;
  out.status = qp.status;
  out.iterations = qp.iterations;
  out.active_rows = qp.active.size();
  out.qdot = qp.x.head(n);
  out.slack = VecX::Zero(static_cast<Eigen::Index>(constraints.size()));
  for (std::size_t i = 0; i < constraints.size(); ++i) {
    if (soft_index[i] != 0) {
      out.slack(static_cast<Eigen::Index>(i)) = qp.x(static_cast<Eigen::Index>(soft_index[i]));
    }
  }
  return out;
}

}  // namespace pivoplan
