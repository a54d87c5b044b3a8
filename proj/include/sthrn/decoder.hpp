#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "sthrn/autodiff.hpp"
#include "sthrn/encoder.hpp"
#include "sthrn/params.hpp"
#include "sthrn/skeleton.hpp"

namespace sthrn {

enum class DecoderKind {
  structured,  // overall -> spine -> arm / leg
  plain_lstm,  // two stacked LSTMs over the whole frame
};

std::string_view to_string(DecoderKind kind);
DecoderKind parse_decoder_kind(std::string_view text);

/// Standard LSTM parameters: W is (4D x (in + D)) acting on [x ; h], gate
/// rows ordered input, forget, candidate, output.
struct LstmIndex {
  std::size_t w = 0, b = 0;
  std::size_t input = 0, hidden = 0;
  bool present = false;
};

struct LstmState {
  ad::Var h, c;
};

LstmState lstm_step(std::span<const ad::Var> params, const LstmIndex& lstm, ad::Var x, const LstmState& s);

/// For the plain decoder `overall` and `spine` hold the first and second layer.
struct DecoderState {
  LstmState overall, spine, arm, leg;
};

class Decoder {
 public:
  Decoder() = default;
  /// Registers zero-initialized decoder parameters, all named "decoder.*".
  Decoder(DecoderKind kind, const ChainLayout& layout, std::size_t encoder_hidden, ParamStore& store);

  DecoderKind kind() const { return kind_; }
  /// Width of every decoder LSTM: K times the encoder hidden size.
  std::size_t width() const { return width_; }
  const LstmIndex& overall() const { return overall_; }
  const LstmIndex& spine() const { return spine_; }
  const LstmIndex& arm() const { return arm_; }
  const LstmIndex& leg() const { return leg_; }
  /// Projection (w, b) of chain c; for the plain decoder a single one covering all entries.
  const std::vector<std::pair<std::size_t, std::size_t>>& projections() const { return proj_; }

  /// Initial states from the last encoder layer over t - 1 frames.
  DecoderState init(ad::Tape& tape, const EncoderState& enc) const;

  /// One autoregressive step: returns w_next = wrap(w_prev + delta) as a (3K) vector.
  ad::Var step(std::span<const ad::Var> params, DecoderState& state, ad::Var w_prev) const;

 private:
  ad::Var residual(ad::Var w_prev, ad::Var delta) const;

  DecoderKind kind_ = DecoderKind::structured;
  ChainLayout layout_;
  std::size_t width_ = 0;
  LstmIndex overall_, spine_, arm_, leg_;
  std::vector<std::pair<std::size_t, std::size_t>> proj_;
};

/// Per-entry wrap of a flat (3K) vector so that every entry norm is at most pi.
/// Returns `w` itself when nothing needs wrapping.
ad::Var wrap_entries(ad::Var w);

}  // namespace sthrn
