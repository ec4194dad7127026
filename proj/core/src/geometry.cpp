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

#include "pivoplan/geometry.hpp"

#include <cmath>

namespace pivoplan
{

Mat3 rpy_to_matrix(const Vec3 & rpy)
{
  return (Eigen::AngleAxisd(rpy.z(), Vec3::UnitZ()) *
         Eigen::AngleAxisd(rpy.y(), Vec3::UnitY()) *
         Eigen::AngleAxisd(rpy.x(), Vec3::UnitX())).toRotationMatrix();
}

Transform make_transform(const Vec3 & xyz, const Vec3 & rpy)
{
  Transform t = Transform::Identity();
  t.linear() = rpy_to_matrix(rpy);
  t.translation() = xyz;
  return t;
}

Vec3 rotation_error(const Mat3 & from, const Mat3 & to)
{
  const Eigen::AngleAxisd aa(to * from.transpose());
  return aa.axis() * aa.angle();
}

double wrap_angle(double angle)
{
  double a = std::fmod(angle + kPi, 2.0 * kPi);
  if (a <= 0.0) {
    a += 2.0 * kPi;
  }
  return a - kPi;
}

}  // namespace pivoplan
