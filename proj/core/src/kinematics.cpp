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

#include "pivoplan/kinematics.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace pivoplan
{

KinematicModel::KinematicModel(
  std::vector<JointSpec> joints, std::vector<FixedFrame> frames,
  std::vector<LinkGeometry> geometry, std::optional<GripperInfo> gripper)
: joints_(std::move(joints)),
  frames_(std::move(frames)),
  geometry_(std::move(geometry)),
  gripper_(std::move(gripper))
{
  build();
}

void KinematicModel::build()
{
  nodes_.clear();
  nodes_.push_back(Node{"world", 0, std::nullopt, Transform::Identity()});
  joint_child_.assign(joints_.size(), 0);

  auto find = [this](const std::string & name) -> std::optional<std::size_t> {
      for (std::size_t i = 0; i < nodes_.size(); ++i) {
        if (nodes_[i].name == name) {
          return i;
        }
      }
      return std::nullopt;
    };

  std::vector<bool> placed(frames_.size(), false);
  auto place_frames = [&]() {
      bool progress = true;
      while (progress) {
        progress = false;
        for (std::size_t f = 0; f < frames_.size(); ++f) {
          if (placed[f]) {
            continue;
          }
          if (auto parent = find(frames_[f].parent)) {
            if (find(frames_[f].name)) {
              throw KinematicsError("duplicate link name '" + frames_[f].name + "'");
            }
            nodes_.push_back(Node{frames_[f].name, *parent, std::nullopt, frames_[f].origin});
            placed[f] = true;
            progress = true;
          }
        }
      }
    };

  for (std::size_t j = 0; j < joints_.size(); ++j) {
    place_frames();
    JointSpec & joint = joints_[j];
    const double n = joint.axis.norm();
    if (std::abs(n - 1.0) > 1e-9) {
      throw KinematicsError("joint '" + joint.name + "' axis is not unit length");
    }
    if (joint.kind == JointKind::continuous_rotational && joint.limits) {
      throw KinematicsError("continuous joint '" + joint.name + "' cannot have position limits");
    }
    if (joint.limits && !(joint.limits->lower < joint.limits->upper)) {
      throw KinematicsError("joint '" + joint.name + "' has lower >= upper limit");
    }
    if (joint.velocity_limit < 0.0) {
      throw KinematicsError("joint '" + joint.name + "' has a negative velocity limit");
    }
    const auto parent = find(joint.parent);
    if (!parent) {
      throw KinematicsError(
              "joint '" + joint.name + "' references parent '" + joint.parent +
              "' which does not precede it");
    }
    if (joint.child.empty() || find(joint.child)) {
      throw KinematicsError("joint '" + joint.name + "' has an empty or duplicate child link");
    }
    nodes_.push_back(Node{joint.child, *parent, j, joint.origin});
    joint_child_[j] = nodes_.size() - 1;
  }
  place_frames();
  for (std::size_t f = 0; f < frames_.size(); ++f) {
    if (!placed[f]) {
      throw KinematicsError(
              "frame '" + frames_[f].name + "' has unknown parent '" + frames_[f].parent + "'");
    }
  }

  ancestors_.assign(nodes_.size(), std::vector<bool>(joints_.size(), false));
  body_of_.assign(nodes_.size(), 0);
  for (std::size_t i = 1; i < nodes_.size(); ++i) {
    ancestors_[i] = ancestors_[nodes_[i].parent];
    body_of_[i] = nodes_[i].joint ? i : body_of_[nodes_[i].parent];
    if (nodes_[i].joint) {
      ancestors_[i][*nodes_[i].joint] = true;
    }
  }

  for (const auto & g : geometry_) {
    if (!find(g.link)) {
      throw KinematicsError("collision geometry references unknown link '" + g.link + "'");
    }
  }
  if (gripper_ && !find(gripper_->fingertip_link)) {
    throw KinematicsError("unknown fingertip link '" + gripper_->fingertip_link + "'");
  }
}

bool KinematicModel::has_link(std::string_view name) const
{
  return std::any_of(nodes_.begin(), nodes_.end(), [&](const Node & n) {return n.name == name;});
}

std::size_t KinematicModel::link_index(std::string_view name) const
{
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].name == name) {
      return i;
    }
  }
  throw KinematicsError("unknown link '" + std::string(name) + "'");
}

std::optional<std::size_t> KinematicModel::joint_index(std::string_view name) const
{
  for (std::size_t j = 0; j < joints_.size(); ++j) {
    if (joints_[j].name == name) {
      return j;
    }
  }
  return std::nullopt;
}

bool KinematicModel::joint_moves_link(std::size_t j, std::size_t link) const
{
  return ancestors_.at(link).at(j);
}

void KinematicModel::check_configuration(const Configuration & q) const
{
  if (static_cast<std::size_t>(q.size()) != joints_.size()) {
    throw KinematicsError(
            "configuration has " + std::to_string(q.size()) + " values, model has " +
            std::to_string(joints_.size()) + " joints");
  }
}

Configuration KinematicModel::clamp(const Configuration & q) const
{
  check_configuration(q);
  Configuration out = q;
  for (std::size_t j = 0; j < joints_.size(); ++j) {
    if (const auto & lim = joints_[j].limits) {
      const auto i = static_cast<Eigen::Index>(j);
      out(i) = std::clamp(out(i), lim->lower, lim->upper);
    }
  }
  return out;
}

std::vector<Transform> KinematicModel::link_poses(const Configuration & q) const
{
  check_configuration(q);
  std::vector<Transform> poses(nodes_.size(), Transform::Identity());
  for (std::size_t i = 1; i < nodes_.size(); ++i) {
    const Node & node = nodes_[i];
    Transform t = poses[node.parent] * node.origin;
    if (node.joint) {
      const JointSpec & joint = joints_[*node.joint];
      const double v = q(static_cast<Eigen::Index>(*node.joint));
      if (joint.kind == JointKind::translational) {
        t.translate(joint.axis * v);
      } else {
        t.rotate(Eigen::AngleAxisd(v, joint.axis));
      }
    }
    poses[i] = t;
  }
  return poses;
}

MatX KinematicModel::point_jacobian(
  const std::vector<Transform> & poses, std::size_t link, const Vec3 & world_point) const
{
  MatX jac = MatX::Zero(6, static_cast<Eigen::Index>(joints_.size()));
  for (std::size_t j = 0; j < joints_.size(); ++j) {
    if (!ancestors_[link][j]) {
      continue;
    }
    // The joint axis is fixed in the child frame, so read it from there.
    const Transform & child = poses[joint_child_[j]];
    const Vec3 axis = child.linear() * joints_[j].axis;
    const auto c = static_cast<Eigen::Index>(j);
    if (joints_[j].kind == JointKind::translational) {
      jac.block<3, 1>(0, c) = axis;
    } else {
      jac.block<3, 1>(0, c) = axis.cross(world_point - child.translation());
      jac.block<3, 1>(3, c) = axis;
    }
  }
  return jac;
}

Transform forward_kinematics(
  const KinematicModel & model, const Configuration & q, std::string_view link)
{
  const std::size_t idx = model.link_index(link);
  return model.link_poses(q)[idx];
}

MatX jacobian(
  const KinematicModel & model, const Configuration & q, std::string_view link,
  const Vec3 & point)
{
  const std::size_t idx = model.link_index(link);
  const auto poses = model.link_poses(q);
  return model.point_jacobian(poses, idx, poses[idx] * point);
}

KinematicModel attach_pivot(
  const KinematicModel & model, const Transform & grasp_frame, const Vec3 & cog_offset,
  const std::vector<Capsule> & object_geometry)
{
  if (model.pivot_joint_index()) {
    throw KinematicsError("a pivot joint is already attached");
  }
  if (cog_offset.norm() <= 1e-6) {
    throw KinematicsError("grasp point coincides with the CoG; pivoting is impossible");
  }
  if (!model.gripper()) {
    throw KinematicsError("model has no gripper description");
  }
  const GripperInfo & gripper = *model.gripper();

  JointSpec pivot;
  pivot.name = kPivotJoint;
  pivot.kind = JointKind::continuous_rotational;
  pivot.axis = (grasp_frame.linear().transpose() * gripper.closing_axis).normalized();
  pivot.origin = grasp_frame;
  pivot.velocity_limit = 1.0;
  pivot.parent = gripper.fingertip_link;
  pivot.child = kObjectLink;

  std::vector<JointSpec> joints = model.joints();
  joints.push_back(pivot);
  std::vector<LinkGeometry> geometry = model.geometry();
  if (!object_geometry.empty()) {
    geometry.push_back(LinkGeometry{kObjectLink, object_geometry});
  }
  KinematicModel out(std::move(joints), model.fixed_frames(), std::move(geometry), model.gripper());
  out.pivot_index_ = out.dof() - 1;
  out.cog_offset_ = cog_offset;
  return out;
}

}  // namespace pivoplan
