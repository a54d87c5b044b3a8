#pragma once

#include <cstddef>
#include <vector>

#include "sthrn/autodiff.hpp"
#include "sthrn/params.hpp"

namespace sthrn {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  std::vector<ad::Tensor> m, v;
  std::size_t step = 0;

  static AdamState zeros_for(const ParamStore& params);
  friend bool operator==(const AdamState&, const AdamState&) = default;
};

/// Global L2 norm over all gradient tensors.
double global_norm(const std::vector<ad::Tensor>& grads);

/// Rescales `grads` in place so the global norm is at most `max_norm`
/// (no-op when max_norm <= 0). Returns the norm before clipping.
double clip_by_global_norm(std::vector<ad::Tensor>& grads, double max_norm);

/// One bias-corrected Adam update of every parameter.
void adam_step(ParamStore& params, const std::vector<ad::Tensor>& grads, AdamState& state, const AdamConfig& config);

}  // namespace sthrn
