#pragma once

#include <vector>

#include "sthrn/geometry.hpp"
#include "sthrn/skeleton.hpp"

namespace sthrn {

/// Absolute anchor for forward kinematics.
///
/// Lie vectors only carry rotations between adjacent bones of a chain, so the
/// root joint position and the direction of each chain's first bone have to
/// come from somewhere else (usually the last observed frame).
struct RootConfig {
  Vec3 position = Vec3::Zero();
  std::vector<Vec3> first_bone_directions;  // one unit vector per chain
};

/// Relative rotations between adjacent bones, chain-major.
/// Throws DegenerateBone for bones shorter than 1e-9.
LieVector pose_to_lie(const Frame& joints, const SkeletonTopology& topo);

/// Forward kinematics using the topology's bone lengths.
Frame lie_to_pose(const LieVector& w, const SkeletonTopology& topo, const RootConfig& root);

/// Reads the root anchor off a joint-position frame.
RootConfig root_from_pose(const Frame& joints, const SkeletonTopology& topo);

/// Upright rest anchor: spine along +y, arms sideways, legs down.
RootConfig default_root(const SkeletonTopology& topo);

}  // namespace sthrn
