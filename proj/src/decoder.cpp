#include "sthrn/decoder.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "sthrn/errors.hpp"

namespace sthrn {

using ad::Var;

std::string_view to_string(DecoderKind kind) {
  return kind == DecoderKind::structured ? "structured" : "plain-lstm";
}

DecoderKind parse_decoder_kind(std::string_view text) {
  if (text == "structured") return DecoderKind::structured;
  if (text == "plain-lstm" || text == "plain_lstm") return DecoderKind::plain_lstm;
  throw ValidationError("unknown decoder kind '" + std::string(text) + "' (expected structured or plain-lstm)");
}

LstmState lstm_step(std::span<const Var> params, const LstmIndex& lstm, Var x, const LstmState& s) {
  const std::size_t d = lstm.hidden;
  const Var pre = ad::matmul(params[lstm.w], ad::concat({x, s.h})) + params[lstm.b];
  const Var in = ad::sigmoid(ad::slice(pre, 0, d));
  const Var forget = ad::sigmoid(ad::slice(pre, d, d));
  const Var candidate = ad::tanh(ad::slice(pre, 2 * d, d));
  const Var out = ad::sigmoid(ad::slice(pre, 3 * d, d));
  const Var c = ad::hadamard(forget, s.c) + ad::hadamard(in, candidate);
  return {ad::hadamard(out, ad::tanh(c)), c};
}

namespace {

LstmIndex add_lstm(ParamStore& store, const std::string& name, std::size_t input, std::size_t hidden) {
  LstmIndex idx;
  idx.input = input;
  idx.hidden = hidden;
  idx.w = store.add("decoder." + name + ".w", ad::Tensor(ad::Shape(4 * hidden, input + hidden)));
  idx.b = store.add("decoder." + name + ".b", ad::Tensor(ad::Shape(4 * hidden)));
  idx.present = true;
  return idx;
}

bool has_role(const ChainLayout& layout, ChainRole role) {
  for (std::size_t c = 0; c < layout.roles.size(); ++c) {
    if (layout.roles[c] == role && layout.sizes[c] > 0) return true;
  }
  return false;
}

}  // namespace

Decoder::Decoder(DecoderKind kind, const ChainLayout& layout, std::size_t encoder_hidden, ParamStore& store)
    : kind_(kind), layout_(layout) {
  const std::size_t k = layout.lie_size();
  if (k == 0) throw ValidationError("decoder needs at least one Lie entry");
  width_ = k * encoder_hidden;

  if (kind == DecoderKind::plain_lstm) {
    overall_ = add_lstm(store, "lstm1", 3 * k, width_);
    spine_ = add_lstm(store, "lstm2", width_, width_);
    proj_.emplace_back(store.add("decoder.proj.w", ad::Tensor(ad::Shape(3 * k, width_))),
                       store.add("decoder.proj.b", ad::Tensor(ad::Shape(3 * k))));
    return;
  }

  overall_ = add_lstm(store, "overall", 3 * k, width_);
  spine_ = add_lstm(store, "spine", width_, width_);
  if (has_role(layout, ChainRole::arm)) arm_ = add_lstm(store, "arm", 2 * width_, width_);
  if (has_role(layout, ChainRole::leg)) leg_ = add_lstm(store, "leg", 2 * width_, width_);
  for (std::size_t c = 0; c < layout.sizes.size(); ++c) {
    const std::size_t kc = layout.sizes[c];
    if (kc == 0) {
      proj_.emplace_back(0, 0);
      continue;
    }
    const std::string prefix = "decoder.proj." + std::to_string(c);
    proj_.emplace_back(store.add(prefix + ".w", ad::Tensor(ad::Shape(3 * kc, width_))),
                       store.add(prefix + ".b", ad::Tensor(ad::Shape(3 * kc))));
  }
}

DecoderState Decoder::init(ad::Tape& tape, const EncoderState& enc) const {
  if (enc.bones != layout_.lie_size()) {
    throw DimensionMismatch("encoder state has " + std::to_string(enc.bones) + " bones, decoder expects " +
                            std::to_string(layout_.lie_size()));
  }
  if (enc.frames == 0 || enc.h.size() != enc.frames * enc.bones || enc.g_t.size() != enc.bones) {
    throw DimensionMismatch("malformed encoder state");
  }
  const double inv_frames = 1.0 / static_cast<double>(enc.frames);
  const double inv_t = 1.0 / static_cast<double>(enc.frames + 1);
  std::vector<Var> h_mean, c_mean, h_spine;
  for (std::size_t j = 0; j < enc.bones; ++j) {
    Var hs = enc.h_at(0, j);
    Var cs = enc.c_at(0, j);
    for (std::size_t i = 1; i < enc.frames; ++i) {
      hs = hs + enc.h_at(i, j);
      cs = cs + enc.c_at(i, j);
    }
    h_mean.push_back(ad::scale(hs, inv_frames));
    c_mean.push_back(ad::scale(cs, inv_frames));
    h_spine.push_back(ad::scale(hs + enc.g_t[j], inv_t));
  }
  DecoderState s;
  s.overall = {ad::concat(h_mean), ad::concat(c_mean)};
  s.spine = {ad::concat(h_spine), s.overall.c};
  const Var zero = tape.leaf(ad::Tensor(ad::Shape(width_)));
  s.arm = {zero, zero};
  s.leg = {zero, zero};
  return s;
}

Var Decoder::step(std::span<const Var> params, DecoderState& state, Var w_prev) const {
  const std::size_t k = layout_.lie_size();
  if (w_prev.shape() != ad::Shape(3 * k)) {
    throw DimensionMismatch("decoder input has shape " + w_prev.shape().str() + ", expected (" +
                            std::to_string(3 * k) + ")");
  }
  if (kind_ == DecoderKind::plain_lstm) {
    state.overall = lstm_step(params, overall_, w_prev, state.overall);
    state.spine = lstm_step(params, spine_, state.overall.h, state.spine);
    const auto [w, b] = proj_.front();
    return residual(w_prev, ad::matmul(params[w], state.spine.h) + params[b]);
  }

  state.overall = lstm_step(params, overall_, w_prev, state.overall);
  state.spine = lstm_step(params, spine_, state.overall.h, state.spine);
  const Var limb_input = ad::concat({state.overall.h, state.spine.h});
  if (arm_.present) state.arm = lstm_step(params, arm_, limb_input, state.arm);
  if (leg_.present) state.leg = lstm_step(params, leg_, limb_input, state.leg);

  std::vector<Var> parts;
  for (std::size_t c = 0; c < layout_.sizes.size(); ++c) {
    if (layout_.sizes[c] == 0) continue;
    const Var h = layout_.roles[c] == ChainRole::arm   ? state.arm.h
                  : layout_.roles[c] == ChainRole::leg ? state.leg.h
                                                       : state.spine.h;
    const auto [w, b] = proj_[c];
    parts.push_back(ad::matmul(params[w], h) + params[b]);
  }
  return residual(w_prev, parts.size() == 1 ? parts.front() : ad::concat(parts));
}

Var Decoder::residual(Var w_prev, Var delta) const { return wrap_entries(w_prev + delta); }

Var wrap_entries(Var w) {
  const ad::Tensor v = w.value();
  const std::size_t entries = v.size() / 3;
  bool any = false;
  for (std::size_t e = 0; e < entries && !any; ++e) {
    any = std::hypot(v[3 * e], v[3 * e + 1], v[3 * e + 2]) > std::numbers::pi;
  }
  if (!any) return w;

  ad::Tape& tape = *w.tape();
  std::vector<Var> parts;
  for (std::size_t e = 0; e < entries; ++e) {
    const Var entry = ad::slice(w, 3 * e, 3);
    const double angle = std::hypot(v[3 * e], v[3 * e + 1], v[3 * e + 2]);
    if (angle <= std::numbers::pi) {
      parts.push_back(entry);
      continue;
    }
    double wrapped = std::fmod(angle, 2.0 * std::numbers::pi);
    if (wrapped > std::numbers::pi) wrapped -= 2.0 * std::numbers::pi;
    const double turns = std::round((angle - wrapped) / (2.0 * std::numbers::pi));
    // factor = 1 - 2 pi turns / |w|
    const Var factor = tape.leaf(ad::Tensor::scalar(1.0)) -
                       ad::scale(ad::reciprocal(ad::l2norm(entry)), 2.0 * std::numbers::pi * turns);
    parts.push_back(ad::scale_by(entry, factor));
  }
  return ad::concat(parts);
}

}  // namespace sthrn
