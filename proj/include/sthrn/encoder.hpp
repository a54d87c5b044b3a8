#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "sthrn/autodiff.hpp"
#include "sthrn/params.hpp"
#include "sthrn/skeleton.hpp"

namespace sthrn {

struct EncoderConfig {
  std::size_t hidden = 20;
  std::size_t layers = 10;
  bool disable_global_temporal = false;
  bool disable_global_spatial = false;
};

/// Row blocks of the packed local gate parameters, in this order.
enum class EncoderGate : std::size_t {
  input = 0,
  left,             // c from frame i - 1
  same,             // c from the same cell
  right,            // c from frame i + 1
  spatial,          // c from bone j - 1 in the chain
  global_spatial,   // c_gs of frame i
  global_temporal,  // c_gt of bone j
  output,
  candidate,        // tanh-activated modulated input
};
inline constexpr std::size_t kEncoderGateCount = 9;

/// Column blocks of the packed local gate weight, for hidden size H:
/// [pose (3) | h_left, h_right, h_same (3H) | h_spatial (H) | g_s (H) | g_t (H)].
inline constexpr std::size_t encoder_gate_input_width(std::size_t hidden) { return 3 + 6 * hidden; }

/// Parameter indices into the owning ParamStore.
///
/// One set serves every frame, bone and layer, so the parameter count does
/// not depend on sequence length or depth.
struct EncoderParamIndex {
  std::size_t embed_w, embed_b;  // h0 = c0 = W p + b
  std::size_t gates_w, gates_b;  // (9H x (3 + 6H)), (9H)
  // Global state gates; weights are (H x 2H) acting on [h ; g_prev].
  std::size_t temporal_cell_w, temporal_cell_b;
  std::size_t temporal_forget_w, temporal_forget_b;
  std::size_t temporal_out_w, temporal_out_b;
  std::size_t spatial_cell_w, spatial_cell_b;
  std::size_t spatial_forget_w, spatial_forget_b;
  std::size_t spatial_out_w, spatial_out_b;
};

struct CellState {
  ad::Var h;
  ad::Var c;
};

/// Previous-layer context of one (frame, bone) cell.
struct CellInputs {
  ad::Var pose;
  CellState left, same, right, spatial;
  CellState global_spatial;   // (g_s, c_gs) of the frame
  CellState global_temporal;  // (g_t, c_gt) of the bone
};

/// States of one encoder layer over the (frame x bone) grid.
struct EncoderState {
  std::size_t frames = 0;
  std::size_t bones = 0;
  std::vector<ad::Var> h, c;        // frame-major, index i * bones + j
  std::vector<ad::Var> g_t, c_gt;   // per bone
  std::vector<ad::Var> g_s, c_gs;   // per frame

  ad::Var h_at(std::size_t i, std::size_t j) const { return h[i * bones + j]; }
  ad::Var c_at(std::size_t i, std::size_t j) const { return c[i * bones + j]; }
};

struct EncodeOptions {
  /// Order in which cells of a layer are visited (permutation of
  /// 0 .. frames*bones-1). Empty means row-major. Results do not depend on it.
  std::vector<std::size_t> visit_order;
};

/// Spatio-temporal hierarchical recurrent encoder.
class Encoder {
 public:
  Encoder() = default;
  /// Registers the encoder parameters (zero-initialized) in `store`.
  Encoder(const EncoderConfig& config, const ChainLayout& layout, ParamStore& store);

  const EncoderConfig& config() const { return config_; }
  const EncoderParamIndex& index() const { return index_; }
  std::size_t bones() const { return spatial_prev_.size(); }

  /// Layer-0 states from the observed poses. `poses` is frame-major (3-vectors).
  EncoderState init_states(std::span<const ad::Var> params, std::span<const ad::Var> poses,
                           std::size_t frames) const;

  CellState local_cell_step(std::span<const ad::Var> params, const CellInputs& in) const;

  /// New (g_t, c_gt) of one bone from its layer-l cells over all frames.
  CellState global_temporal_step(std::span<const ad::Var> params, std::span<const CellState> cells,
                                 const CellState& previous) const;
  /// Axis-swapped mirror: new (g_s, c_gs) of one frame from its cells over all bones.
  CellState global_spatial_step(std::span<const ad::Var> params, std::span<const CellState> cells,
                                const CellState& previous) const;

  /// Runs init_states and all layers. `frames` are the first t - 1 observed
  /// Lie vectors; they are placed on the tape as constants.
  EncoderState encode(ad::Tape& tape, std::span<const ad::Var> params, std::span<const LieVector> frames,
                      const EncodeOptions& options = {}) const;

 private:
  CellState global_step(std::span<const ad::Var> params, std::span<const CellState> cells, const CellState& previous,
                        std::size_t cell_w, std::size_t cell_b, std::size_t forget_w, std::size_t forget_b,
                        std::size_t out_w, std::size_t out_b) const;

  EncoderConfig config_;
  EncoderParamIndex index_{};
  /// Spatial predecessor of each bone inside its chain, or -1 for a chain's first entry.
  std::vector<long> spatial_prev_;
};

}  // namespace sthrn
