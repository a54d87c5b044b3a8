#include "sthrn/encoder.hpp"

#include <numeric>
#include <string>

#include "sthrn/errors.hpp"

namespace sthrn {

using ad::Var;

Encoder::Encoder(const EncoderConfig& config, const ChainLayout& layout, ParamStore& store) : config_(config) {
  if (config.hidden == 0) throw ValidationError("encoder hidden size must be positive");
  if (config.layers == 0) throw ValidationError("encoder needs at least one layer");
  const std::size_t h = config.hidden;
  const std::size_t gates = kEncoderGateCount * h;

  index_.embed_w = store.add("encoder.embed.w", ad::Tensor(ad::Shape(h, 3)));
  index_.embed_b = store.add("encoder.embed.b", ad::Tensor(ad::Shape(h)));
  index_.gates_w = store.add("encoder.gates.w", ad::Tensor(ad::Shape(gates, encoder_gate_input_width(h))));
  index_.gates_b = store.add("encoder.gates.b", ad::Tensor(ad::Shape(gates)));
  const auto add_block = [&](const std::string& prefix, std::size_t& w, std::size_t& b) {
    w = store.add(prefix + ".w", ad::Tensor(ad::Shape(h, 2 * h)));
    b = store.add(prefix + ".b", ad::Tensor(ad::Shape(h)));
  };
  add_block("encoder.temporal.cell", index_.temporal_cell_w, index_.temporal_cell_b);
  add_block("encoder.temporal.forget", index_.temporal_forget_w, index_.temporal_forget_b);
  add_block("encoder.temporal.out", index_.temporal_out_w, index_.temporal_out_b);
  add_block("encoder.spatial.cell", index_.spatial_cell_w, index_.spatial_cell_b);
  add_block("encoder.spatial.forget", index_.spatial_forget_w, index_.spatial_forget_b);
  add_block("encoder.spatial.out", index_.spatial_out_w, index_.spatial_out_b);

  for (std::size_t size : layout.sizes) {
    for (std::size_t m = 0; m < size; ++m) {
      spatial_prev_.push_back(m == 0 ? -1 : static_cast<long>(spatial_prev_.size()) - 1);
    }
  }
}

EncoderState Encoder::init_states(std::span<const Var> params, std::span<const Var> poses, std::size_t frames) const {
  const std::size_t bones = this->bones();
  if (frames == 0 || poses.size() != frames * bones) {
    throw DimensionMismatch("encoder expects " + std::to_string(frames) + " x " + std::to_string(bones) +
                            " poses, got " + std::to_string(poses.size()));
  }
  EncoderState s;
  s.frames = frames;
  s.bones = bones;
  const Var w = params[index_.embed_w];
  const Var b = params[index_.embed_b];
  for (const Var& p : poses) {
    const Var e = ad::matmul(w, p) + b;
    s.h.push_back(e);
    s.c.push_back(e);
  }
  for (std::size_t j = 0; j < bones; ++j) {
    Var acc = s.h_at(0, j);
    for (std::size_t i = 1; i < frames; ++i) acc = acc + s.h_at(i, j);
    const Var g = ad::scale(acc, 1.0 / static_cast<double>(frames));
    s.g_t.push_back(g);
    s.c_gt.push_back(g);
  }
  for (std::size_t i = 0; i < frames; ++i) {
    Var acc = s.h_at(i, 0);
    for (std::size_t j = 1; j < bones; ++j) acc = acc + s.h_at(i, j);
    const Var g = ad::scale(acc, 1.0 / static_cast<double>(bones));
    s.g_s.push_back(g);
    s.c_gs.push_back(g);
  }
  return s;
}

CellState Encoder::local_cell_step(std::span<const Var> params, const CellInputs& in) const {
  const std::size_t h = config_.hidden;
  const Var x = ad::concat({in.pose, in.left.h, in.right.h, in.same.h, in.spatial.h, in.global_spatial.h,
                            in.global_temporal.h});
  const Var pre = ad::matmul(params[index_.gates_w], x) + params[index_.gates_b];
  const Var sig = ad::sigmoid(ad::slice(pre, 0, 8 * h));
  const Var candidate = ad::tanh(ad::slice(pre, 8 * h, h));
  const auto gate = [&](EncoderGate g) { return ad::slice(sig, static_cast<std::size_t>(g) * h, h); };

  Var c = ad::hadamard(gate(EncoderGate::input), candidate);
  c = c + ad::hadamard(gate(EncoderGate::left), in.left.c);
  c = c + ad::hadamard(gate(EncoderGate::same), in.same.c);
  c = c + ad::hadamard(gate(EncoderGate::right), in.right.c);
  c = c + ad::hadamard(gate(EncoderGate::spatial), in.spatial.c);
  c = c + ad::hadamard(gate(EncoderGate::global_spatial), in.global_spatial.c);
  c = c + ad::hadamard(gate(EncoderGate::global_temporal), in.global_temporal.c);
  const Var hidden = ad::hadamard(gate(EncoderGate::output), ad::tanh(c));
  return {hidden, c};
}

CellState Encoder::global_step(std::span<const Var> params, std::span<const CellState> cells,
                               const CellState& previous, std::size_t cell_w, std::size_t cell_b,
                               std::size_t forget_w, std::size_t forget_b, std::size_t out_w,
                               std::size_t out_b) const {
  if (cells.empty()) throw DimensionMismatch("global state update over zero cells");
  Var h_sum = cells.front().h;
  for (std::size_t n = 1; n < cells.size(); ++n) h_sum = h_sum + cells[n].h;
  const Var h_mean = ad::scale(h_sum, 1.0 / static_cast<double>(cells.size()));

  Var c_new;
  for (std::size_t n = 0; n < cells.size(); ++n) {
    const Var gate =
        ad::sigmoid(ad::matmul(params[cell_w], ad::concat({cells[n].h, previous.h})) + params[cell_b]);
    const Var term = ad::hadamard(gate, cells[n].c);
    c_new = n == 0 ? term : c_new + term;
  }
  const Var summary = ad::concat({h_mean, previous.h});
  const Var forget = ad::sigmoid(ad::matmul(params[forget_w], summary) + params[forget_b]);
  const Var out = ad::sigmoid(ad::matmul(params[out_w], summary) + params[out_b]);
  c_new = c_new + ad::hadamard(forget, previous.c);
  return {ad::hadamard(out, ad::tanh(c_new)), c_new};
}

CellState Encoder::global_temporal_step(std::span<const Var> params, std::span<const CellState> cells,
                                        const CellState& previous) const {
  return global_step(params, cells, previous, index_.temporal_cell_w, index_.temporal_cell_b,
                     index_.temporal_forget_w, index_.temporal_forget_b, index_.temporal_out_w,
                     index_.temporal_out_b);
}

CellState Encoder::global_spatial_step(std::span<const Var> params, std::span<const CellState> cells,
                                       const CellState& previous) const {
  return global_step(params, cells, previous, index_.spatial_cell_w, index_.spatial_cell_b, index_.spatial_forget_w,
                     index_.spatial_forget_b, index_.spatial_out_w, index_.spatial_out_b);
}

EncoderState Encoder::encode(ad::Tape& tape, std::span<const Var> params, std::span<const LieVector> frames,
                             const EncodeOptions& options) const {
  const std::size_t bones = this->bones();
  const std::size_t n_frames = frames.size();
  if (n_frames == 0) throw DimensionMismatch("encoder needs at least one frame");
  if (bones == 0) throw DimensionMismatch("encoder needs at least one Lie entry");

  std::vector<Var> poses;
  poses.reserve(n_frames * bones);
  for (const auto& frame : frames) {
    if (frame.size() != bones) {
      throw DimensionMismatch("frame has " + std::to_string(frame.size()) + " Lie entries, encoder expects " +
                              std::to_string(bones));
    }
    for (const auto& w : frame) poses.push_back(tape.leaf(ad::Tensor::vector({w.x(), w.y(), w.z()})));
  }

  const std::size_t cells = n_frames * bones;
  std::vector<std::size_t> order = options.visit_order;
  if (order.empty()) {
    order.resize(cells);
    std::iota(order.begin(), order.end(), std::size_t{0});
  } else {
    std::vector<bool> seen(cells, false);
    if (order.size() != cells) throw ValidationError("visit order is not a permutation of the cell grid");
    for (std::size_t k : order) {
      if (k >= cells || seen[k]) throw ValidationError("visit order is not a permutation of the cell grid");
      seen[k] = true;
    }
  }

  const Var zero = tape.leaf(ad::Tensor(ad::Shape(config_.hidden)));
  const CellState zero_state{zero, zero};

  EncoderState state = init_states(params, poses, n_frames);
  if (config_.disable_global_temporal) {
    state.g_t.assign(bones, zero);
    state.c_gt.assign(bones, zero);
  }
  if (config_.disable_global_spatial) {
    state.g_s.assign(n_frames, zero);
    state.c_gs.assign(n_frames, zero);
  }

  for (std::size_t layer = 0; layer < config_.layers; ++layer) {
    EncoderState next = state;
    // Every cell reads only the previous layer's states.
    for (std::size_t k : order) {
      const std::size_t i = k / bones;
      const std::size_t j = k % bones;
      CellInputs in;
      in.pose = poses[k];
      in.same = {state.h_at(i, j), state.c_at(i, j)};
      in.left = i > 0 ? CellState{state.h_at(i - 1, j), state.c_at(i - 1, j)} : zero_state;
      in.right = i + 1 < n_frames ? CellState{state.h_at(i + 1, j), state.c_at(i + 1, j)} : zero_state;
      const long sp = spatial_prev_[j];
      in.spatial = sp >= 0 ? CellState{state.h_at(i, static_cast<std::size_t>(sp)),
                                       state.c_at(i, static_cast<std::size_t>(sp))}
                           : zero_state;
      in.global_spatial = {state.g_s[i], state.c_gs[i]};
      in.global_temporal = {state.g_t[j], state.c_gt[j]};
      const CellState out = local_cell_step(params, in);
      next.h[k] = out.h;
      next.c[k] = out.c;
    }

    if (!config_.disable_global_temporal) {
      std::vector<CellState> column(n_frames);
      for (std::size_t j = 0; j < bones; ++j) {
        for (std::size_t i = 0; i < n_frames; ++i) column[i] = {next.h_at(i, j), next.c_at(i, j)};
        const CellState g = global_temporal_step(params, column, {state.g_t[j], state.c_gt[j]});
        next.g_t[j] = g.h;
        next.c_gt[j] = g.c;
      }
    }
    if (!config_.disable_global_spatial) {
      std::vector<CellState> row(bones);
      for (std::size_t i = 0; i < n_frames; ++i) {
        for (std::size_t j = 0; j < bones; ++j) row[j] = {next.h_at(i, j), next.c_at(i, j)};
        const CellState g = global_spatial_step(params, row, {state.g_s[i], state.c_gs[i]});
        next.g_s[i] = g.h;
        next.c_gs[i] = g.c;
      }
    }
    state = std::move(next);
  }
  return state;
}

}  // namespace sthrn
