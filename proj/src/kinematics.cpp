#include "sthrn/kinematics.hpp"

#include <string>

#include "sthrn/errors.hpp"

namespace sthrn {

namespace {

constexpr double kMinBoneLength = 1e-9;

Vec3 bone_direction(const Frame& joints, std::size_t from, std::size_t to, const SkeletonTopology& topo) {
  const Vec3 d = joints[to] - joints[from];
  const double len = d.norm();
  if (!(len >= kMinBoneLength)) {
    throw DegenerateBone("bone " + topo.joints[from] + " -> " + topo.joints[to] + " has length " + std::to_string(len));
  }
  return d / len;
}

}  // namespace

LieVector pose_to_lie(const Frame& joints, const SkeletonTopology& topo) {
  if (joints.size() != topo.joints.size()) {
    throw DimensionMismatch("pose has " + std::to_string(joints.size()) + " joints, topology has " +
                            std::to_string(topo.joints.size()));
  }
  LieVector w;
  w.reserve(topo.lie_size());
  for (const auto& chain : topo.chains) {
    Vec3 parent = bone_direction(joints, chain.joints[0], chain.joints[1], topo);
    for (std::size_t k = 1; k + 1 < chain.joints.size(); ++k) {
      const Vec3 child = bone_direction(joints, chain.joints[k], chain.joints[k + 1], topo);
      w.push_back(geometry::log_map(geometry::rodrigues(geometry::axis_angle_between_resolved(parent, child))));
      parent = child;
    }
  }
  return w;
}

Frame lie_to_pose(const LieVector& w, const SkeletonTopology& topo, const RootConfig& root) {
  if (w.size() != topo.lie_size()) {
    throw DimensionMismatch("Lie vector has " + std::to_string(w.size()) + " entries, topology needs " +
                            std::to_string(topo.lie_size()));
  }
  if (root.first_bone_directions.size() != topo.chains.size()) {
    throw DimensionMismatch("root config has " + std::to_string(root.first_bone_directions.size()) +
                            " chain directions, topology has " + std::to_string(topo.chains.size()) + " chains");
  }
  Frame pos(topo.joints.size(), Vec3::Zero());
  pos[topo.chains.front().joints.front()] = root.position;
  std::size_t bone = 0;
  std::size_t entry = 0;
  for (std::size_t c = 0; c < topo.chains.size(); ++c) {
    const auto& chain = topo.chains[c];
    Vec3 dir = root.first_bone_directions[c].normalized();
    pos[chain.joints[1]] = pos[chain.joints[0]] + topo.lengths[bone++] * dir;
    for (std::size_t k = 1; k + 1 < chain.joints.size(); ++k) {
      dir = geometry::exp_map(w[entry++]) * dir;
      pos[chain.joints[k + 1]] = pos[chain.joints[k]] + topo.lengths[bone++] * dir;
    }
  }
  return pos;
}

RootConfig root_from_pose(const Frame& joints, const SkeletonTopology& topo) {
  if (joints.size() != topo.joints.size()) {
    throw DimensionMismatch("pose has " + std::to_string(joints.size()) + " joints, topology has " +
                            std::to_string(topo.joints.size()));
  }
  RootConfig root;
  root.position = joints[topo.chains.front().joints.front()];
  for (const auto& chain : topo.chains) {
    root.first_bone_directions.push_back(bone_direction(joints, chain.joints[0], chain.joints[1], topo));
  }
  return root;
}

RootConfig default_root(const SkeletonTopology& topo) {
  RootConfig root;
  int arms = 0;
  int legs = 0;
  for (const auto& chain : topo.chains) {
    switch (chain.role) {
      case ChainRole::spine:
        root.first_bone_directions.push_back(Vec3::UnitY());
        break;
      case ChainRole::arm:
        root.first_bone_directions.push_back(Vec3(arms++ % 2 == 0 ? -1.0 : 1.0, 0.0, 0.0));
        break;
      case ChainRole::leg:
        root.first_bone_directions.push_back(Vec3(legs++ % 2 == 0 ? -1.0 : 1.0, -0.3, 0.0).normalized());
        break;
    }
  }
  return root;
}

}  // namespace sthrn
