#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "sthrn/geometry.hpp"

namespace sthrn {

/// Which decoder branch a kinematic chain belongs to.
enum class ChainRole { spine, arm, leg };

std::string_view to_string(ChainRole role);
ChainRole parse_chain_role(std::string_view text);

struct Chain {
  ChainRole role = ChainRole::spine;
  std::vector<std::size_t> joints;  // indices into SkeletonTopology::joints, root to tip

  std::size_t bone_count() const { return joints.empty() ? 0 : joints.size() - 1; }
  /// Number of relative rotations carried by this chain (bones - 1).
  std::size_t lie_size() const { return bone_count() == 0 ? 0 : bone_count() - 1; }
};

/// Kinematic tree split into chains.
///
/// Bones are numbered chain-major, root to tip within a chain; `lengths` is
/// indexed the same way. The Lie vector of a pose holds one so(3) entry per
/// adjacent bone pair inside a chain, in the same chain-major order, so a
/// chain with n bones contributes n - 1 entries.
struct SkeletonTopology {
  std::vector<std::string> joints;
  std::vector<Chain> chains;
  std::vector<double> lengths;

  std::size_t bone_count() const;
  /// K, the total number of so(3) entries per frame.
  std::size_t lie_size() const;
  /// Index of the first bone of chain `c`.
  std::size_t first_bone(std::size_t c) const;
  /// Index of the first Lie entry of chain `c`.
  std::size_t first_entry(std::size_t c) const;
  /// Length of the child bone rotated by Lie entry `entry`.
  double entry_length(std::size_t entry) const;
  std::vector<double> entry_lengths() const;
  std::size_t joint_index(std::string_view id) const;

  /// Throws ValidationError when the tree invariants do not hold.
  void validate() const;
};

SkeletonTopology parse_topology(std::istream& in, const std::string& source = "<stream>");
SkeletonTopology load_topology(const std::filesystem::path& path);
void write_topology(std::ostream& out, const SkeletonTopology& topo);
void save_topology(const std::filesystem::path& path, const SkeletonTopology& topo);

/// Roles and Lie-entry counts of each chain; all a model needs to know
/// about the skeleton.
struct ChainLayout {
  std::vector<ChainRole> roles;
  std::vector<std::size_t> sizes;  // K_c per chain

  static ChainLayout from(const SkeletonTopology& topo);
  /// Parses "spine:2,arm:2".
  static ChainLayout parse(std::string_view text);
  std::string str() const;
  std::size_t lie_size() const;
  std::size_t first_entry(std::size_t c) const;

  friend bool operator==(const ChainLayout&, const ChainLayout&) = default;
};

using Frame = std::vector<Vec3>;
using LieVector = std::vector<So3Vec>;

enum class FrameKind { joints, lie };

struct MotionSequence {
  double fps = 25.0;
  FrameKind kind = FrameKind::lie;
  std::vector<Frame> frames;
  std::string subject;
  std::string activity;

  std::size_t width() const { return frames.empty() ? 0 : frames.front().size(); }
};

struct SampleWindow {
  std::size_t offset = 0;
  std::vector<Frame> observed;
  std::vector<Frame> target;
};

/// Per-bone mean length over every frame of every sequence.
SkeletonTopology normalize_lengths(const std::vector<MotionSequence>& seqs, const SkeletonTopology& topo);

/// Decimates by the integer stride round(fps / target_fps).
MotionSequence resample_fps(const MotionSequence& seq, double target_fps = 25.0);

/// `count` windows with start offsets drawn uniformly (with replacement).
std::vector<SampleWindow> sample_windows(const MotionSequence& seq, std::size_t observed, std::size_t horizon,
                                         std::size_t count, std::uint64_t seed);

/// Splits frames [offset, offset + observed + horizon) into a window.
SampleWindow window_at(const MotionSequence& seq, std::size_t offset, std::size_t observed, std::size_t horizon);

enum class MotionFormat { csv_joints, csv_lie };

MotionFormat parse_motion_format(std::string_view text);
/// Reads the header of a motion file to tell the two csv formats apart.
MotionFormat detect_motion_format(const std::filesystem::path& path);

MotionSequence read_motion(std::istream& in, MotionFormat format, const std::string& source = "<stream>");
MotionSequence load_motion(const std::filesystem::path& path, MotionFormat format);
/// Also checks the width against `topo` (joint count or K).
MotionSequence load_motion(const std::filesystem::path& path, MotionFormat format, const SkeletonTopology& topo);
void write_motion(std::ostream& out, const MotionSequence& seq);
void save_motion(const std::filesystem::path& path, const MotionSequence& seq);

}  // namespace sthrn
