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
#include <random>
#include <string>

#include "pivoplan/kinematics.hpp"
#include "pivoplan/scene.hpp"

namespace pivoplan
{
namespace
{

SceneDescription desk_scene()
{
  return load_scene(std::string(PIVOPLAN_SCENE_DIR) + "/desk.yaml");
}

KinematicModel with_pivot(const SceneDescription & scene)
{
  return attach_pivot(scene.robot.model, scene.robot.grasp_frame, Vec3(0.0, 0.0, -0.05));
}

Configuration random_configuration(const KinematicModel & model, std::mt19937 & rng)
{
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  Configuration q(static_cast<Eigen::Index>(model.dof()));
  for (Eigen::Index i = 0; i < q.size(); ++i) {
    q(i) = u(rng);
  }
  return q;
}

// Independent oracle: walks the chain with plain 4x4 matrices and Rodrigues' formula.
Eigen::Matrix4d homogeneous(const Transform & t)
{
  return t.matrix();
}

Eigen::Matrix4d joint_motion(const JointSpec & j, double v)
{
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  if (j.kind == JointKind::translational) {
    m.block<3, 1>(0, 3) = j.axis * v;
    return m;
  }
  const Vec3 k = j.axis;
  Mat3 K;
  K << 0, -k.z(), k.y(), k.z(), 0, -k.x(), -k.y(), k.x(), 0;
  m.block<3, 3>(0, 0) = Mat3::Identity() + std::sin(v) * K + (1.0 - std::cos(v)) * K * K;
  return m;
}

Eigen::Matrix4d chain_product(const KinematicModel & model, const Configuration & q, const std::string & link)
{
  for (const auto & f : model.fixed_frames()) {
    if (f.name == link) {
      return chain_product(model, q, f.parent) * homogeneous(f.origin);
    }
  }
  if (link == "world") {
    return Eigen::Matrix4d::Identity();
  }
  for (std::size_t j = 0; j < model.joints().size(); ++j) {
    const JointSpec & spec = model.joints()[j];
    if (spec.child == link) {
      return chain_product(model, q, spec.parent) * homogeneous(spec.origin) *
             joint_motion(spec, q(static_cast<Eigen::Index>(j)));
    }
  }
  ADD_FAILURE() << "link not found: " << link;
  return Eigen::Matrix4d::Identity();
}

TEST(ForwardKinematics, ZeroConfigurationBaseIsIdentity)
{
  const auto model = desk_scene().robot.model;
  const Transform t = forward_kinematics(model, model.zero_configuration(), "base_link");
  EXPECT_TRUE(t.matrix().isApprox(Eigen::Matrix4d::Identity(), 1e-12));
}

TEST(ForwardKinematics, BaseTranslation)
{
  const auto model = desk_scene().robot.model;
  Configuration q = model.zero_configuration();
  q(0) = 1.0;
  q(1) = 2.0;
  const Transform t = forward_kinematics(model, q, "base_link");
  EXPECT_TRUE(t.translation().isApprox(Vec3(1.0, 2.0, 0.0), 1e-12));
  EXPECT_TRUE(t.linear().isApprox(Mat3::Identity(), 1e-12));
}

TEST(ForwardKinematics, MatchesMatrixProductOracle)
{
  const auto model = with_pivot(desk_scene());
  std::mt19937 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const Configuration q = random_configuration(model, rng);
    const auto poses = model.link_poses(q);
    for (std::size_t l = 1; l < model.link_count(); ++l) {
      const Eigen::Matrix4d expected = chain_product(model, q, model.link_name(l));
      EXPECT_TRUE(poses[l].matrix().isApprox(expected, 1e-10)) << model.link_name(l);
    }
  }
}

TEST(ForwardKinematics, ChainPrefixesCompose)
{
  const auto model = desk_scene().robot.model;
  std::mt19937 rng(11);
  const Configuration q = random_configuration(model, rng);
  const Transform base = forward_kinematics(model, q, "base_link");
  const Transform tip = forward_kinematics(model, q, "fingertip");
  const Transform rel = base.inverse() * tip;
  EXPECT_TRUE((base * rel).matrix().isApprox(tip.matrix(), 1e-12));
  const Transform forearm = forward_kinematics(model, q, "forearm_link");
  EXPECT_TRUE((forearm * (forearm.inverse() * tip)).matrix().isApprox(tip.matrix(), 1e-12));
}

TEST(ForwardKinematics, RejectsUnknownLinkAndWrongSize)
{
  const auto model = desk_scene().robot.model;
  EXPECT_THROW(forward_kinematics(model, model.zero_configuration(), "nope"), KinematicsError);
  EXPECT_THROW(forward_kinematics(model, Configuration::Zero(3), "base_link"), KinematicsError);
}

TEST(Jacobian, PlanarRotationColumn)
{
  JointSpec yaw;
  yaw.name = "yaw";
  yaw.kind = JointKind::continuous_rotational;
  yaw.axis = Vec3::UnitZ();
  yaw.child = "arm";
  const KinematicModel model({yaw});
  const double r = 0.7;
  const MatX jac = jacobian(model, Configuration::Zero(1), "arm", Vec3(r, 0.0, 0.0));
  EXPECT_NEAR(jac.col(0).segment<3>(0).norm(), r, 1e-12);
  EXPECT_TRUE(jac.col(0).segment<3>(3).isApprox(Vec3::UnitZ(), 1e-12));
}

TEST(Jacobian, PrismaticColumn)
{
  const auto model = desk_scene().robot.model;
  const MatX jac = jacobian(model, model.zero_configuration(), "fingertip");
  EXPECT_TRUE(jac.col(0).segment<3>(0).isApprox(Vec3::UnitX(), 1e-12));
  EXPECT_TRUE(jac.col(0).segment<3>(3).isZero(1e-12));
  EXPECT_TRUE(jac.col(1).segment<3>(0).isApprox(Vec3::UnitY(), 1e-12));
}

TEST(Jacobian, ColumnsOffThePathAreZero)
{
  const auto model = with_pivot(desk_scene());
  const MatX jac = jacobian(model, model.zero_configuration(), "forearm_link");
  const auto pivot = static_cast<Eigen::Index>(*model.pivot_joint_index());
  EXPECT_TRUE(jac.col(pivot).isZero(0.0));
  EXPECT_TRUE(jac.col(*model.joint_index("wrist_1")).isZero(0.0));
}

TEST(Jacobian, MatchesCentralFiniteDifferences)
{
  const auto model = with_pivot(desk_scene());
  std::mt19937 rng(3);
  const double h = 1e-6;
  const Vec3 point(0.02, -0.01, 0.03);
  for (int trial = 0; trial < 100; ++trial) {
    const Configuration q = random_configuration(model, rng);
    const MatX jac = jacobian(model, q, kObjectLink, point);
    for (Eigen::Index i = 0; i < q.size(); ++i) {
      Configuration qp = q;
      Configuration qm = q;
      qp(i) += h;
      qm(i) -= h;
      const Transform tp = forward_kinematics(model, qp, kObjectLink);
      const Transform tm = forward_kinematics(model, qm, kObjectLink);
      const Vec3 lin = (tp * point - tm * point) / (2.0 * h);
      const Vec3 ang = rotation_error(tm.linear(), tp.linear()) / (2.0 * h);
      EXPECT_LT((lin - jac.block<3, 1>(0, i)).norm(), 1e-5) << "column " << i;
      EXPECT_LT((ang - jac.block<3, 1>(3, i)).norm(), 1e-5) << "column " << i;
    }
  }
}

TEST(AttachPivot, AddsContinuousJointAboutClosingAxis)
{
  const auto scene = desk_scene();
  const auto model = with_pivot(scene);
  ASSERT_EQ(model.dof(), scene.robot.model.dof() + 1);
  ASSERT_TRUE(model.pivot_joint_index());
  const JointSpec & j = model.joints()[*model.pivot_joint_index()];
  EXPECT_EQ(j.kind, JointKind::continuous_rotational);
  EXPECT_FALSE(j.limits);
  // The pivot axis is the closing axis seen from the fingertip.
  const Configuration q = model.zero_configuration();
  const auto poses = model.link_poses(q);
  const Vec3 world_axis = poses[model.link_index(kObjectLink)].linear() * j.axis;
  const Vec3 closing = poses[model.link_index("fingertip")].linear() *
    scene.robot.model.gripper()->closing_axis;
  EXPECT_TRUE(world_axis.isApprox(closing, 1e-12));
}

TEST(AttachPivot, RejectsZeroOffsetAndSecondAttach)
{
  const auto scene = desk_scene();
  EXPECT_THROW(
    attach_pivot(scene.robot.model, scene.robot.grasp_frame, Vec3::Zero()), KinematicsError);
  const auto model = with_pivot(scene);
  EXPECT_THROW(
    attach_pivot(model, scene.robot.grasp_frame, Vec3(0.0, 0.0, -0.05)), KinematicsError);
}

}  // namespace
}  // namespace pivoplan
