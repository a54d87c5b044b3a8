#pragma once

#include <span>
#include <vector>

#include "sthrn/grad_check.hpp"
#include "sthrn/losses.hpp"
#include "sthrn/model.hpp"
#include "sthrn/random.hpp"
#include "sthrn/synthetic.hpp"
#include "test_util.hpp"

namespace testing_util {

/// Gaussian weights with every remaining zero (biases included) filled in,
/// so no gate sits at an exactly symmetric point.
inline void randomize(sthrn::ParamStore& params, std::uint64_t seed, double std = 0.1) {
  sthrn::Rng rng(seed);
  params.init_gaussian(rng, std);
  for (auto& t : params.tensors()) {
    for (double& v : t.values()) {
      if (v == 0.0) v = 0.5 * std * rng.normal();
    }
  }
}

/// Small instance on the tiny topology: t observed frames, `horizon` targets.
struct GradInstance {
  sthrn::SkeletonTopology topo = topology("tiny");
  std::vector<sthrn::LieVector> observed;
  std::vector<sthrn::LieVector> target;
  std::vector<double> theta;

  GradInstance(std::size_t t, std::size_t horizon, double length_scale) {
    const auto seq = sthrn::synth_motion(sthrn::SynthKind::sinusoid, t + horizon, topo, 7);
    observed.assign(seq.frames.begin(), seq.frames.begin() + static_cast<std::ptrdiff_t>(t));
    target.assign(seq.frames.begin() + static_cast<std::ptrdiff_t>(t), seq.frames.end());
    std::vector<double> lengths = topo.entry_lengths();
    for (double& l : lengths) l *= length_scale;
    theta = sthrn::theta_weights(lengths);
  }
};

/// Weighted prediction loss as a function of the parameters listed in `free`;
/// the others stay fixed at their stored values.
inline sthrn::ad::ScalarFn model_loss(const sthrn::Model& model, const GradInstance& inst,
                                      std::vector<std::size_t> free) {
  return [&model, &inst, free](sthrn::ad::Tape& tape, std::span<const sthrn::ad::Var> in) {
    std::vector<sthrn::ad::Var> params = model.params().bind(tape);
    for (std::size_t k = 0; k < free.size(); ++k) params[free[k]] = in[k];
    const auto pred = model.forward(tape, params, inst.observed, inst.target.size());
    return sthrn::weighted_loss(inst.target, pred, inst.theta);
  };
}

inline std::vector<sthrn::ad::Tensor> point_of(const sthrn::Model& model, const std::vector<std::size_t>& free) {
  std::vector<sthrn::ad::Tensor> out;
  for (std::size_t i : free) out.push_back(model.params()[i]);
  return out;
}

inline std::vector<std::size_t> all_params(const sthrn::Model& model) {
  std::vector<std::size_t> out(model.params().size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = i;
  return out;
}

}  // namespace testing_util
