#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "sthrn/autodiff.hpp"
#include "sthrn/decoder.hpp"
#include "sthrn/encoder.hpp"
#include "sthrn/params.hpp"
#include "sthrn/skeleton.hpp"

namespace sthrn {

struct ModelConfig {
  EncoderConfig encoder;
  DecoderKind decoder = DecoderKind::structured;
};

ad::Tensor flatten(const LieVector& w);
LieVector unflatten(const ad::Tensor& t);

/// Encoder + decoder sharing one parameter store.
class Model {
 public:
  Model(const ModelConfig& config, const ChainLayout& layout);

  const ModelConfig& config() const { return config_; }
  const ChainLayout& layout() const { return layout_; }
  std::size_t lie_size() const { return layout_.lie_size(); }
  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }
  const Encoder& encoder() const { return encoder_; }
  const Decoder& decoder() const { return decoder_; }

  /// Indices of every decoder-owned parameter.
  std::vector<std::size_t> decoder_params() const;

  /// Encodes observed[0 .. t-2], then runs `horizon` decoder steps seeded with
  /// observed[t-1]. With `teacher` (at least horizon - 1 frames), step k > 0
  /// consumes teacher[k-1] instead of the previous prediction.
  std::vector<ad::Var> forward(ad::Tape& tape, std::span<const ad::Var> params, std::span<const LieVector> observed,
                               std::size_t horizon, std::span<const LieVector> teacher = {},
                               const EncodeOptions& options = {}) const;

  std::vector<LieVector> predict(std::span<const LieVector> observed, std::size_t horizon) const;

 private:
  ModelConfig config_;
  ChainLayout layout_;
  ParamStore params_;
  Encoder encoder_;
  Decoder decoder_;
};

}  // namespace sthrn
