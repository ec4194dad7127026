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

#ifndef PIVOPLAN__GEOMETRY_HPP_
#define PIVOPLAN__GEOMETRY_HPP_

#include <Eigen/Dense>
#include <Eigen/Geometry>

namespace pivoplan
{

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;
using Transform = Eigen::Isometry3d;

inline constexpr double kPi = 3.14159265358979323846;

/// Fixed-axis roll/pitch/yaw (URDF convention): R = Rz(yaw) * Ry(pitch) * Rx(roll).
Mat3 rpy_to_matrix(const Vec3 & rpy);

Transform make_transform(const Vec3 & xyz, const Vec3 & rpy = Vec3::Zero());

/// Rotation vector w such that exp([w]) * from = to, expressed in the world frame.
Vec3 rotation_error(const Mat3 & from, const Mat3 & to);

/// Wraps an angle to (-pi, pi].
double wrap_angle(double angle);

}  // namespace pivoplan

#endif  // PIVOPLAN__GEOMETRY_HPP_
