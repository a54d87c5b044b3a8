#pragma once

#include <cstdint>
#include <string_view>

#include "sthrn/kinematics.hpp"
#include "sthrn/skeleton.hpp"

namespace sthrn {

enum class SynthKind { constant, linear_sweep, sinusoid };

SynthKind parse_synth_kind(std::string_view text);

struct SynthOptions {
  double fps = 25.0;
  /// Per-frame angle increment of the linear sweep (radians).
  double sweep_step = 0.01;
  /// Sinusoid amplitude (radians) and period (frames).
  double amplitude = 0.5;
  double period = 25.0;
};

/// Lie-vector motion with known dynamics.
///
/// Every chain moves in its own plane: all entries of chain c rotate about a
/// fixed unit normal n_c orthogonal to the chain's first bone, so entry
/// (c, m) at frame i is angle(c, m, i) * n_c. Such vectors are exactly the
/// minimal rotations that pose_to_lie recovers, which makes joint-space
/// roundtrips exact. Planes and phases are drawn from `seed`.
MotionSequence synth_motion(SynthKind kind, std::size_t frames, const SkeletonTopology& topo, std::uint64_t seed,
                            const SynthOptions& options = {});

/// Root anchor matching synth_motion for the same topology and seed.
RootConfig synthetic_root(const SkeletonTopology& topo, std::uint64_t seed);

/// Joint positions of a synthetic Lie sequence under synthetic_root.
MotionSequence synth_joints(const MotionSequence& lie, const SkeletonTopology& topo, std::uint64_t seed);

}  // namespace sthrn
