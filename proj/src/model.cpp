#include "sthrn/model.hpp"

#include <string>

#include "sthrn/errors.hpp"

namespace sthrn {

ad::Tensor flatten(const LieVector& w) {
  std::vector<double> v;
  v.reserve(3 * w.size());
  for (const auto& e : w) v.insert(v.end(), {e.x(), e.y(), e.z()});
  return ad::Tensor::vector(std::move(v));
}

LieVector unflatten(const ad::Tensor& t) {
  if (t.size() % 3 != 0) throw DimensionMismatch("flat Lie vector length is not a multiple of 3");
  LieVector out(t.size() / 3);
  for (std::size_t e = 0; e < out.size(); ++e) out[e] = So3Vec(t[3 * e], t[3 * e + 1], t[3 * e + 2]);
  return out;
}

Model::Model(const ModelConfig& config, const ChainLayout& layout)
    : config_(config),
      layout_(layout),
      encoder_(config.encoder, layout, params_),
      decoder_(config.decoder, layout, config.encoder.hidden, params_) {}

std::vector<std::size_t> Model::decoder_params() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < params_.size(); ++i) {
    if (params_.name(i).rfind("decoder.", 0) == 0) out.push_back(i);
  }
  return out;
}

std::vector<ad::Var> Model::forward(ad::Tape& tape, std::span<const ad::Var> params,
                                    std::span<const LieVector> observed, std::size_t horizon,
                                    std::span<const LieVector> teacher, const EncodeOptions& options) const {
  if (observed.size() < 2) {
    throw SequenceTooShort("need at least 2 observed frames, got " + std::to_string(observed.size()));
  }
  if (horizon == 0) throw ValidationError("horizon must be at least 1");
  if (!teacher.empty() && teacher.size() + 1 < horizon) {
    throw DimensionMismatch("teacher sequence shorter than horizon - 1");
  }
  const std::size_t k = lie_size();
  for (const auto& f : observed) {
    if (f.size() != k) {
      throw DimensionMismatch("observed frame has " + std::to_string(f.size()) + " entries, model expects " +
                              std::to_string(k));
    }
  }
  const EncoderState enc = encoder_.encode(tape, params, observed.first(observed.size() - 1), options);
  DecoderState state = decoder_.init(tape, enc);
  ad::Var w = tape.leaf(flatten(observed.back()));
  std::vector<ad::Var> out;
  out.reserve(horizon);
  for (std::size_t step = 0; step < horizon; ++step) {
    if (step > 0 && !teacher.empty()) w = tape.leaf(flatten(teacher[step - 1]));
    w = decoder_.step(params, state, w);
    out.push_back(w);
  }
  return out;
}

std::vector<LieVector> Model::predict(std::span<const LieVector> observed, std::size_t horizon) const {
  ad::Tape tape;
  const auto vars = params_.bind(tape);
  const auto preds = forward(tape, vars, observed, horizon);
  std::vector<LieVector> out;
  out.reserve(preds.size());
  for (const auto& p : preds) out.push_back(unflatten(p.value()));
  return out;
}

}  // namespace sthrn
