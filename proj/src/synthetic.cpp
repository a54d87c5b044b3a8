#include "sthrn/synthetic.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "sthrn/errors.hpp"
#include "sthrn/random.hpp"

namespace sthrn {

namespace {

struct ChainPlanes {
  RootConfig root;
  std::vector<Vec3> normals;
};

Vec3 gaussian_vec(Rng& rng) {
  const double x = rng.normal();
  const double y = rng.normal();
  const double z = rng.normal();
  return Vec3(x, y, z);
}

ChainPlanes draw_planes(const SkeletonTopology& topo, Rng& rng) {
  ChainPlanes out;
  const RootConfig rest = default_root(topo);
  for (std::size_t c = 0; c < topo.chains.size(); ++c) {
    const Vec3 dir = (rest.first_bone_directions[c] + 0.1 * gaussian_vec(rng)).normalized();
    Vec3 normal = gaussian_vec(rng);
    normal -= normal.dot(dir) * dir;
    out.root.first_bone_directions.push_back(dir);
    out.normals.push_back(normal.normalized());
  }
  return out;
}

}  // namespace

SynthKind parse_synth_kind(std::string_view text) {
  if (text == "constant") return SynthKind::constant;
  if (text == "linear-sweep") return SynthKind::linear_sweep;
  if (text == "sinusoid") return SynthKind::sinusoid;
  throw ValidationError("unknown synthetic motion kind '" + std::string(text) + "'");
}

RootConfig synthetic_root(const SkeletonTopology& topo, std::uint64_t seed) {
  Rng rng(seed);
  return draw_planes(topo, rng).root;
}

MotionSequence synth_motion(SynthKind kind, std::size_t frames, const SkeletonTopology& topo, std::uint64_t seed,
                            const SynthOptions& options) {
  Rng rng(seed);
  const ChainPlanes planes = draw_planes(topo, rng);

  // Per-entry chain index plus the parameters of its angle trajectory.
  struct Entry {
    std::size_t chain;
    double base;
    double phase;
  };
  std::vector<Entry> entries;
  for (std::size_t c = 0; c < topo.chains.size(); ++c) {
    for (std::size_t m = 0; m < topo.chains[c].lie_size(); ++m) {
      Entry e{c, 0.0, 0.0};
      switch (kind) {
        case SynthKind::constant:
          e.base = rng.uniform(-1.0, 1.0);
          break;
        case SynthKind::linear_sweep:
          break;
        case SynthKind::sinusoid:
          e.base = rng.uniform(-0.3, 0.3);
          e.phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
          break;
      }
      entries.push_back(e);
    }
  }

  MotionSequence seq;
  seq.fps = options.fps;
  seq.kind = FrameKind::lie;
  seq.activity = kind == SynthKind::constant ? "constant" : kind == SynthKind::linear_sweep ? "linear-sweep" : "sinusoid";
  seq.frames.reserve(frames);
  for (std::size_t i = 0; i < frames; ++i) {
    LieVector w;
    w.reserve(entries.size());
    for (const auto& e : entries) {
      double angle = e.base;
      if (kind == SynthKind::linear_sweep) {
        angle = options.sweep_step * static_cast<double>(i);
      } else if (kind == SynthKind::sinusoid) {
        angle = e.base +
                options.amplitude * std::sin(2.0 * std::numbers::pi * static_cast<double>(i) / options.period + e.phase);
      }
      w.push_back(geometry::wrap_so3(angle * planes.normals[e.chain]));
    }
    seq.frames.push_back(std::move(w));
  }
  return seq;
}

MotionSequence synth_joints(const MotionSequence& lie, const SkeletonTopology& topo, std::uint64_t seed) {
  const RootConfig root = synthetic_root(topo, seed);
  MotionSequence out;
  out.fps = lie.fps;
  out.kind = FrameKind::joints;
  out.subject = lie.subject;
  out.activity = lie.activity;
  out.frames.reserve(lie.frames.size());
  for (const auto& w : lie.frames) out.frames.push_back(lie_to_pose(w, topo, root));
  return out;
}

}  // namespace sthrn
