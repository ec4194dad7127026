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

#include "pivoplan/scene.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace pivoplan
{

namespace
{

Vec3 read_vec3(const YAML::Node & node, const std::string & what)
{
  if (!node || !node.IsSequence() || node.size() != 3) {
    throw SceneError(what + ": expected a 3-element sequence");
  }
  return Vec3(node[0].as<double>(), node[1].as<double>(), node[2].as<double>());
}

Transform read_pose(const YAML::Node & node, const std::string & what)
{
  if (!node) {
    return Transform::Identity();
  }
  const Vec3 xyz = node["xyz"] ? read_vec3(node["xyz"], what + ".xyz") : Vec3::Zero();
  const Vec3 rpy = node["rpy"] ? read_vec3(node["rpy"], what + ".rpy") : Vec3::Zero();
  return make_transform(xyz, rpy);
}

template<typename T>
T read_or(const YAML::Node & node, const char * key, T fallback)
{
  return node[key] ? node[key].as<T>() : fallback;
}

JointKind read_kind(const std::string & kind, const std::string & joint)
{
  if (kind == "translational" || kind == "prismatic") {
    return JointKind::translational;
  }
  if (kind == "rotational" || kind == "revolute") {
    return JointKind::rotational;
  }
  if (kind == "continuous" || kind == "continuous-rotational") {
    return JointKind::continuous_rotational;
  }
  throw SceneError("joint '" + joint + "': unknown kind '" + kind + "'");
}

RobotDescription read_robot(const YAML::Node & node)
{
  if (!node || !node["joints"]) {
    throw SceneError("robot: missing 'joints'");
  }
  std::vector<JointSpec> joints;
  for (const auto & j : node["joints"]) {
    JointSpec spec;
    spec.name = j["name"].as<std::string>();
    spec.kind = read_kind(read_or<std::string>(j, "kind", "rotational"), spec.name);
    spec.axis = read_vec3(j["axis"], "joint '" + spec.name + "' axis");
    spec.origin = read_pose(j["origin"], "joint '" + spec.name + "' origin");
    if (j["limits"]) {
      spec.limits = JointLimits{j["limits"][0].as<double>(), j["limits"][1].as<double>()};
    }
    spec.velocity_limit = read_or<double>(j, "velocity_limit", 1.0);
    spec.parent = read_or<std::string>(j, "parent", "world");
    spec.child = j["child"].as<std::string>();
    joints.push_back(std::move(spec));
  }

  std::vector<FixedFrame> frames;
  for (const auto & f : node["frames"]) {
    FixedFrame frame;
    frame.name = f["name"].as<std::string>();
    frame.parent = f["parent"].as<std::string>();
    frame.origin = read_pose(f["origin"], "frame '" + frame.name + "' origin");
    frames.push_back(std::move(frame));
  }

  std::vector<LinkGeometry> geometry;
  for (const auto & g : node["collision"]) {
    LinkGeometry lg;
    lg.link = g["link"].as<std::string>();
    for (const auto & c : g["capsules"]) {
      Capsule cap;
      cap.a = read_vec3(c["a"], "capsule on '" + lg.link + "'");
      cap.b = read_vec3(c["b"], "capsule on '" + lg.link + "'");
      cap.radius = c["radius"].as<double>();
      if (cap.radius <= 0.0) {
        throw SceneError("capsule on '" + lg.link + "': radius must be positive");
      }
      lg.capsules.push_back(cap);
    }
    geometry.push_back(std::move(lg));
  }

  std::optional<GripperInfo> gripper;
  if (const auto g = node["gripper"]) {
    GripperInfo info;
    info.fingertip_link = g["fingertip_link"].as<std::string>();
    info.closing_axis = read_vec3(g["closing_axis"], "gripper closing_axis").normalized();
    gripper = info;
  }

  RobotDescription robot{
    KinematicModel(std::move(joints), std::move(frames), std::move(geometry), gripper),
    Configuration(), Transform::Identity(), CollisionSettings{}};

  if (robot.model.dof() != 9) {
    throw SceneError(
            "robot: expected 9 joints (x, y, yaw base and a 6-joint arm), got " +
            std::to_string(robot.model.dof()));
  }
  robot.home = robot.model.zero_configuration();
  if (const auto h = node["home"]) {
    if (h.size() != robot.model.dof()) {
      throw SceneError("robot: 'home' must list one value per joint");
    }
    for (std::size_t i = 0; i < h.size(); ++i) {
      robot.home(static_cast<Eigen::Index>(i)) = h[i].as<double>();
    }
  }
  robot.grasp_frame = read_pose(node["grasp_frame"], "robot grasp_frame");

  if (const auto c = node["collision_settings"]) {
    robot.collision.cutoff = read_or<double>(c, "cutoff", 0.3);
    for (const auto & p : c["self_pairs"]) {
      robot.collision.self_pairs.emplace_back(p[0].as<std::string>(), p[1].as<std::string>());
    }
    for (const auto & l : c["object_ignore"]) {
      robot.collision.object_ignore.push_back(l.as<std::string>());
    }
  }
  for (const auto & [a, b] : robot.collision.self_pairs) {
    for (const auto & l : {a, b}) {
      if (!robot.model.has_link(l)) {
        throw SceneError("self-collision pair references unknown link '" + l + "'");
      }
    }
  }
  return robot;
}

TaskLayout read_task(const YAML::Node & node)
{
  TaskLayout task;
  if (!node) {
    return task;
  }
  if (const auto pick = node["pick"]) {
    task.pick_object = read_or<std::string>(pick, "object", "");
    task.pick_position = read_vec3(pick["xyz"], "task.pick.xyz");
    task.pick_yaw = read_or<double>(pick, "yaw", 0.0);
  }
  if (const auto place = node["place"]) {
    task.support = read_or<std::string>(place, "support", "");
    task.place_depth = read_or<double>(place, "depth", task.place_depth);
    task.place_lateral = read_or<double>(place, "lateral", task.place_lateral);
    task.place_hover = read_or<double>(place, "hover", task.place_hover);
    task.place_yaw = read_or<double>(place, "yaw", task.place_yaw);
    if (place["approach"]) {
      task.approach = read_vec3(place["approach"], "task.place.approach");
    }
  }
  task.lift = read_or<double>(node, "lift", task.lift);
  task.base_standoff = read_or<double>(node, "base_standoff", task.base_standoff);
  for (const auto & kv : node["object_for_support"]) {
    task.object_for_support[kv.first.as<std::string>()] = kv.second.as<std::string>();
  }
  return task;
}

}  // namespace

double BoxObstacle::top() const
{
  double z = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < 8; ++i) {
    const Vec3 corner((i & 1 ? 1 : -1) * half_extents.x(), (i & 2 ? 1 : -1) * half_extents.y(),
      (i & 4 ? 1 : -1) * half_extents.z());
    z = std::max(z, (pose * corner).z());
  }
  return z;
}

double BoxObstacle::front() const
{
  double x = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 8; ++i) {
    const Vec3 corner((i & 1 ? 1 : -1) * half_extents.x(), (i & 2 ? 1 : -1) * half_extents.y(),
      (i & 4 ? 1 : -1) * half_extents.z());
    x = std::min(x, (pose * corner).x());
  }
  return x;
}

const ObjectModel & SceneDescription::object(const std::string & name) const
{
  for (const auto & o : objects) {
    if (o.name == name) {
      return o;
    }
  }
  throw SceneError("unknown object '" + name + "'");
}

const BoxObstacle & SceneDescription::obstacle(const std::string & name) const
{
  for (const auto & o : obstacles) {
    if (o.name == name) {
      return o;
    }
  }
  throw SceneError("unknown obstacle '" + name + "'");
}

void SceneDescription::validate() const
{
  std::set<std::string> names;
  for (const auto & o : obstacles) {
    if (!names.insert(o.name).second) {
      throw SceneError("duplicate name '" + o.name + "'");
    }
    if ((o.half_extents.array() <= 0.0).any()) {
      throw SceneError("obstacle '" + o.name + "': half_extents must be strictly positive");
    }
  }
  for (const auto & o : objects) {
    if (!names.insert(o.name).second) {
      throw SceneError("duplicate name '" + o.name + "'");
    }
    if ((o.half_extents.array() <= 0.0).any()) {
      throw SceneError("object '" + o.name + "': half_extents must be strictly positive");
    }
    if (!(o.mass > 0.0)) {
      throw SceneError("object '" + o.name + "': mass must be positive");
    }
    if (!(o.mu > 0.0)) {
      throw SceneError("object '" + o.name + "': mu must be positive");
    }
    if (!(o.inertia_about_pivot > 0.0)) {
      throw SceneError("object '" + o.name + "': inertia must be positive");
    }
    if (o.cog_offset.norm() <= 1e-6) {
      throw SceneError("object '" + o.name + "': grasp point coincides with the CoG");
    }
  }
  if (std::abs(gravity.norm() - 9.81) > 0.05 * 9.81) {
    throw SceneError("gravity: norm must be within 5% of 9.81 m/s^2");
  }
  if (!(contact.fn_min > 0.0 && contact.fn_min < contact.fn_max)) {
    throw SceneError("contact: require 0 < fn_min < fn_max");
  }
  if (!(contact.pad_k > 0.0 && contact.pad_gamma > 0.0 && contact.pad_gamma <= 1.0 &&
    contact.torsion_c0 > 0.0 && contact.torsion_c0 <= 1.0))
  {
    throw SceneError("contact: pad parameters out of range");
  }
  if (!task.pick_object.empty()) {
    object(task.pick_object);
  }
  if (!task.support.empty()) {
    obstacle(task.support);
  }
  for (const auto & [support, obj] : task.object_for_support) {
    obstacle(support);
    object(obj);
  }
}

SceneDescription parse_scene(const std::string & yaml_text)
{
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::Exception & e) {
    throw SceneError(std::string("parse error: ") + e.what());
  }
  if (!root.IsMap()) {
    throw SceneError("parse error: top level must be a mapping");
  }

  SceneDescription scene;
  try {
    for (const auto & o : root["obstacles"]) {
      BoxObstacle box;
      box.name = o["name"].as<std::string>();
      box.pose = read_pose(o["pose"], "obstacle '" + box.name + "' pose");
      box.half_extents = read_vec3(o["half_extents"], "obstacle '" + box.name + "' half_extents");
      box.role = read_or<std::string>(o, "role", "");
      scene.obstacles.push_back(std::move(box));
    }
    for (const auto & o : root["objects"]) {
      ObjectModel obj;
      obj.name = o["name"].as<std::string>();
      obj.half_extents = read_vec3(o["half_extents"], "object '" + obj.name + "' half_extents");
      obj.mass = o["mass"].as<double>();
      obj.cog_offset = read_vec3(o["cog_offset"], "object '" + obj.name + "' cog_offset");
      obj.mu = o["mu"].as<double>();
      obj.inertia_about_pivot = o["inertia"].as<double>();
      scene.objects.push_back(std::move(obj));
    }
    if (root["gravity"]) {
      scene.gravity = read_vec3(root["gravity"], "gravity");
    }
    if (const auto c = root["contact"]) {
      scene.contact.pad_k = read_or<double>(c, "pad_k", scene.contact.pad_k);
      scene.contact.pad_gamma = read_or<double>(c, "pad_gamma", scene.contact.pad_gamma);
      scene.contact.torsion_c0 = read_or<double>(c, "torsion_c0", scene.contact.torsion_c0);
      scene.contact.fn_min = read_or<double>(c, "fn_min", scene.contact.fn_min);
      scene.contact.fn_max = read_or<double>(c, "fn_max", scene.contact.fn_max);
    }
    scene.robot = read_robot(root["robot"]);
    scene.task = read_task(root["task"]);
  } catch (const YAML::Exception & e) {
    throw SceneError(std::string("parse error: ") + e.what());
  } catch (const KinematicsError & e) {
    throw SceneError(std::string("robot: ") + e.what());
  }
  scene.validate();
  return scene;
}

SceneDescription load_scene(const std::filesystem::path & path)
{
  std::ifstream in(path);
  if (!in) {
    throw SceneError("cannot open scene file '" + path.string() + "'");
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_scene(buffer.str());
}

DistanceResult sphere_box_distance(const Vec3 & center, double radius, const BoxObstacle & box)
{
  const Vec3 local = box.pose.inverse() * center;
  const Vec3 & h = box.half_extents;
  const Vec3 clamped = local.cwiseMax(-h).cwiseMin(h);

  DistanceResult r;
  const Vec3 delta = local - clamped;
  const double outside = delta.norm();
  Vec3 normal_local;
  Vec3 surface_local;
  double center_distance;
  if (outside > 0.0) {
    normal_local = delta / outside;
    surface_local = clamped;
    center_distance = outside;
  } else {
    // Inside: leave through the nearest face.
    Eigen::Index axis = 0;
    double depth = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < 3; ++i) {
      const double d = h(i) - std::abs(local(i));
      if (d < depth) {
        depth = d;
        axis = i;
      }
    }
    normal_local = Vec3::Zero();
    normal_local(axis) = local(axis) >= 0.0 ? 1.0 : -1.0;
    surface_local = local;
    surface_local(axis) = normal_local(axis) * h(axis);
    center_distance = -depth;
  }
  r.normal = box.pose.linear() * normal_local;
  r.witness_b = box.pose * surface_local;
  r.witness_a = center - r.normal * radius;
  r.distance = center_distance - radius;
  return r;
}

DistanceResult sphere_sphere_distance(
  const Vec3 & center_a, double radius_a, const Vec3 & center_b, double radius_b)
{
  DistanceResult r;
  const Vec3 d = center_a - center_b;
  const double n = d.norm();
  r.normal = n > 1e-12 ? Vec3(d / n) : Vec3(Vec3::UnitZ());
  r.distance = n - radius_a - radius_b;
  r.witness_a = center_a - r.normal * radius_a;
  r.witness_b = center_b + r.normal * radius_b;
  return r;
}

std::vector<std::pair<Vec3, double>> capsule_spheres(const Capsule & capsule)
{
  if ((capsule.a - capsule.b).norm() < 1e-12) {
    return {{capsule.a, capsule.radius}};
  }
  return {
    {capsule.a, capsule.radius},
    {0.5 * (capsule.a + capsule.b), capsule.radius},
    {capsule.b, capsule.radius},
  };
}

std::vector<Capsule> object_collision_spheres(const ObjectModel & object)
{
  const Vec3 & h = object.half_extents;
  const double radius = std::hypot(h.x(), h.y());
  const Vec3 & c = object.cog_offset;
  const double lo = c.z() - h.z() + radius;
  const double hi = c.z() + h.z() - radius;
  std::vector<Capsule> out;
  if (hi <= lo) {
    out.push_back(Capsule{c, c, radius});
    return out;
  }
  const int n = std::max(2, static_cast<int>(std::ceil((hi - lo) / radius)) + 1);
  for (int i = 0; i < n; ++i) {
    const double z = lo + (hi - lo) * i / (n - 1);
    const Vec3 p(c.x(), c.y(), z);
    out.push_back(Capsule{p, p, radius});
  }
  return out;
}

namespace
{

struct WorldSphere
{
  Vec3 center;
  double radius;
};

std::vector<WorldSphere> world_spheres(const Transform & pose, const Capsule & capsule)
{
  std::vector<WorldSphere> out;
  for (const auto & [c, r] : capsule_spheres(capsule)) {
    out.push_back({pose * c, r});
  }
  return out;
}

}  // namespace

std::vector<CollisionPair> min_distance_robot_scene(
  const KinematicModel & model, const std::vector<Transform> & poses,
  const SceneDescription & scene, double cutoff)
{
  std::vector<CollisionPair> pairs;
  const bool has_object = model.has_link(kObjectLink);
  const std::size_t object_link = has_object ? model.link_index(kObjectLink) : 0;

  // Robot and object against the environment.
  for (const auto & geom : model.geometry()) {
    const std::size_t link = model.link_index(geom.link);
    const bool is_object = has_object && link == object_link;
    if (is_object) {
      // The held object is one geometry; report its closest sphere per obstacle.
      for (std::size_t o = 0; o < scene.obstacles.size(); ++o) {
        CollisionPair best;
        best.result.distance = std::numeric_limits<double>::infinity();
        for (const auto & cap : geom.capsules) {
          for (const auto & s : world_spheres(poses[link], cap)) {
            const auto d = sphere_box_distance(s.center, s.radius, scene.obstacles[o]);
            if (d.distance < best.result.distance) {
              best.result = d;
              best.point_a = s.center;
            }
          }
        }
        if (best.result.distance < cutoff) {
          best.link_a = link;
          best.obstacle = o;
          best.involves_object = true;
          best.label = geom.link + "/" + scene.obstacles[o].name;
          pairs.push_back(std::move(best));
        }
      }
      continue;
    }
    for (std::size_t ci = 0; ci < geom.capsules.size(); ++ci) {
      const auto spheres = world_spheres(poses[link], geom.capsules[ci]);
      for (std::size_t o = 0; o < scene.obstacles.size(); ++o) {
        CollisionPair best;
        best.result.distance = std::numeric_limits<double>::infinity();
        for (const auto & s : spheres) {
          const auto d = sphere_box_distance(s.center, s.radius, scene.obstacles[o]);
          if (d.distance < best.result.distance) {
            best.result = d;
            best.point_a = s.center;
          }
        }
        if (best.result.distance < cutoff) {
          best.link_a = link;
          best.obstacle = o;
          best.label = geom.link + "#" + std::to_string(ci) + "/" + scene.obstacles[o].name;
          pairs.push_back(std::move(best));
        }
      }
    }
  }

  auto capsule_pair = [&](
    const LinkGeometry & ga, const LinkGeometry & gb, bool involves_object) {
      const std::size_t la = model.link_index(ga.link);
      const std::size_t lb = model.link_index(gb.link);
      for (std::size_t ca = 0; ca < ga.capsules.size(); ++ca) {
        const auto sa = world_spheres(poses[la], ga.capsules[ca]);
        for (std::size_t cb = 0; cb < gb.capsules.size(); ++cb) {
          const auto sb = world_spheres(poses[lb], gb.capsules[cb]);
          CollisionPair best;
          best.result.distance = std::numeric_limits<double>::infinity();
          for (const auto & a : sa) {
            for (const auto & b : sb) {
              const auto d = sphere_sphere_distance(a.center, a.radius, b.center, b.radius);
              if (d.distance < best.result.distance) {
                best.result = d;
                best.point_a = a.center;
                best.point_b = b.center;
              }
            }
          }
          if (best.result.distance < cutoff) {
            best.link_a = la;
            best.link_b = lb;
            best.involves_object = involves_object;
            best.label = ga.link + "#" + std::to_string(ca) + "/" + gb.link + "#" +
              std::to_string(cb);
            pairs.push_back(std::move(best));
          }
        }
      }
    };

  auto geometry_of = [&](const std::string & link) -> const LinkGeometry * {
      for (const auto & g : model.geometry()) {
        if (g.link == link) {
          return &g;
        }
      }
      return nullptr;
    };

  for (const auto & [a, b] : scene.robot.collision.self_pairs) {
    const auto * ga = geometry_of(a);
    const auto * gb = geometry_of(b);
    if (ga && gb) {
      capsule_pair(*ga, *gb, false);
    }
  }

  if (has_object) {
    const auto * go = geometry_of(kObjectLink);
    const auto & ignore = scene.robot.collision.object_ignore;
    if (go) {
      for (const auto & g : model.geometry()) {
        if (g.link == kObjectLink ||
          std::find(ignore.begin(), ignore.end(), g.link) != ignore.end())
        {
          continue;
        }
        capsule_pair(*go, g, true);
      }
    }
  }
  return pairs;
}

std::vector<CollisionPair> min_distance_robot_scene(
  const KinematicModel & model, const Configuration & q, const SceneDescription & scene,
  std::optional<double> cutoff)
{
  return min_distance_robot_scene(
    model, model.link_poses(q), scene, cutoff.value_or(scene.robot.collision.cutoff));
}

}  // namespace pivoplan
