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

#ifndef PIVOPLAN__KINEMATICS_HPP_
#define PIVOPLAN__KINEMATICS_HPP_

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "pivoplan/geometry.hpp"

namespace pivoplan
{

class KinematicsError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

enum class JointKind
{
  translational,
  rotational,
  continuous_rotational,
};

struct JointLimits
{
  double lower = 0.0;
  double upper = 0.0;
};

/**
 * @brief One actuated (or virtual) joint.
 *
 * The joint frame is parent_link * origin; motion is applied about/along
 * `axis`, expressed in that joint frame. The resulting frame is the pose of
 * `child`.
 */
struct JointSpec
{
  std::string name;
  JointKind kind = JointKind::rotational;
  Vec3 axis = Vec3::UnitZ();
  Transform origin = Transform::Identity();
  std::optional<JointLimits> limits;
  double velocity_limit = 1.0;  // rad/s or m/s
  std::string parent = "world";
  std::string child;
};

/// A frame rigidly attached to a link (tool flange, fingertip, camera mount).
struct FixedFrame
{
  std::string name;
  std::string parent;
  Transform origin = Transform::Identity();
};

/// Capsule in link coordinates. Distance queries sample it at both ends and the middle.
struct Capsule
{
  Vec3 a = Vec3::Zero();
  Vec3 b = Vec3::Zero();
  double radius = 0.0;
};

struct LinkGeometry
{
  std::string link;
  std::vector<Capsule> capsules;
};

struct GripperInfo
{
  std::string fingertip_link;
  Vec3 closing_axis = Vec3::UnitY();  // in fingertip coordinates
};

using Configuration = VecX;

/**
 * @brief Kinematic tree of the mobile manipulator.
 *
 * Immutable once constructed. Link 0 is always "world". Joints are
 * validated in declaration order: a joint's parent link must already exist,
 * either as the child of an earlier joint or as a fixed frame hanging off one.
 */
class KinematicModel
{
public:
  KinematicModel()
  : KinematicModel(std::vector<JointSpec>{}) {}

  explicit KinematicModel(
    std::vector<JointSpec> joints,
    std::vector<FixedFrame> frames = {},
    std::vector<LinkGeometry> geometry = {},
    std::optional<GripperInfo> gripper = std::nullopt);

  std::size_t dof() const {return joints_.size();}
  const std::vector<JointSpec> & joints() const {return joints_;}
  const std::vector<FixedFrame> & fixed_frames() const {return frames_;}
  const std::vector<LinkGeometry> & geometry() const {return geometry_;}
  const std::optional<GripperInfo> & gripper() const {return gripper_;}

  std::optional<std::size_t> pivot_joint_index() const {return pivot_index_;}
  const Vec3 & object_cog_offset() const {return cog_offset_;}

  std::size_t link_count() const {return nodes_.size();}
  bool has_link(std::string_view name) const;
  /// Throws KinematicsError for unknown names.
  std::size_t link_index(std::string_view name) const;
  const std::string & link_name(std::size_t link) const {return nodes_.at(link).name;}
  std::optional<std::size_t> joint_index(std::string_view name) const;
  /// Link whose pose is set directly by joint `j`.
  std::size_t joint_child_link(std::size_t j) const {return joint_child_.at(j);}
  /// True if joint `j` lies on the path from the world to `link`.
  bool joint_moves_link(std::size_t j, std::size_t link) const;
  /// Nearest ancestor link created by a joint (or the link itself); 0 when none.
  std::size_t moving_body(std::size_t link) const {return body_of_.at(link);}

  void check_configuration(const Configuration & q) const;
  Configuration zero_configuration() const {return Configuration::Zero(static_cast<Eigen::Index>(dof()));}
  Configuration clamp(const Configuration & q) const;

  /// World pose of every link, indexed like link_index().
  std::vector<Transform> link_poses(const Configuration & q) const;

  /// 6xN geometric Jacobian of a world point rigidly attached to `link`.
  MatX point_jacobian(
    const std::vector<Transform> & poses, std::size_t link,
    const Vec3 & world_point) const;

private:
  struct Node
  {
    std::string name;
    std::size_t parent = 0;
    std::optional<std::size_t> joint;
    Transform origin = Transform::Identity();
  };

  void build();

  std::vector<JointSpec> joints_;
  std::vector<FixedFrame> frames_;
  std::vector<LinkGeometry> geometry_;
  std::optional<GripperInfo> gripper_;
  std::optional<std::size_t> pivot_index_;
  Vec3 cog_offset_ = Vec3::Zero();

  std::vector<Node> nodes_;
  std::vector<std::size_t> joint_child_;
  std::vector<std::size_t> body_of_;
  std::vector<std::vector<bool>> ancestors_;  // [link][joint]

  friend KinematicModel attach_pivot(
    const KinematicModel &, const Transform &, const Vec3 &, const std::vector<Capsule> &);
};

Transform forward_kinematics(
  const KinematicModel & model, const Configuration & q, std::string_view link);

/// Rows 0-2 linear velocity of `point` (link coordinates), rows 3-5 angular velocity.
MatX jacobian(
  const KinematicModel & model, const Configuration & q, std::string_view link,
  const Vec3 & point = Vec3::Zero());

/**
 * @brief Adds the virtual pivot joint between the fingertips and the held object.
 *
 * The new continuous joint rotates about the gripper closing axis; its child
 * link "object" carries the CoG offset and the object's collision spheres
 * (given as zero-length capsules in object coordinates).
 */
KinematicModel attach_pivot(
  const KinematicModel & model, const Transform & grasp_frame, const Vec3 & cog_offset,
  const std::vector<Capsule> & object_geometry = {});

inline constexpr const char * kObjectLink = "object";
inline constexpr const char * kPivotJoint = "pivot";

}  // namespace pivoplan

#endif  // PIVOPLAN__KINEMATICS_HPP_
