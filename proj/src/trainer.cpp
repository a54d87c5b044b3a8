#include "sthrn/trainer.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <ostream>
#include <span>
#include <string>

#include "sthrn/errors.hpp"
#include "text_util.hpp"

namespace sthrn {

void TrainConfig::validate() const {
  if (batch_size == 0) throw ValidationError("batch_size must be positive");
  if (!(learning_rate > 0.0)) throw ValidationError("learning_rate must be positive");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw ValidationError("adam betas must lie in [0, 1)");
  }
  if (!(epsilon > 0.0)) throw ValidationError("epsilon must be positive");
  if (observed < 2) throw ValidationError("observed must be at least 2");
  if (horizon == 0 || long_horizon == 0) throw ValidationError("horizons must be positive");
  if (clip_norm < 0.0) throw ValidationError("clip_norm must be non-negative");
  if (!(init_std >= 0.0)) throw ValidationError("init_std must be non-negative");
  if (model.encoder.hidden == 0 || model.encoder.layers == 0) {
    throw ValidationError("encoder hidden and layers must be positive");
  }
}

Trainer::Trainer(const TrainConfig& config, const ChainLayout& layout, std::vector<double> entry_lengths,
                 std::vector<MotionSequence> data)
    : config_(config),
      entry_lengths_(std::move(entry_lengths)),
      theta_(theta_weights(entry_lengths_)),
      data_(std::move(data)),
      model_(config.model, layout),
      rng_(config.seed) {
  config_.validate();
  const std::size_t k = layout.lie_size();
  if (entry_lengths_.size() != k) {
    throw DimensionMismatch("got " + std::to_string(entry_lengths_.size()) + " entry lengths for K = " +
                            std::to_string(k));
  }
  const std::size_t need = config_.observed + config_.train_horizon();
  for (std::size_t s = 0; s < data_.size(); ++s) {
    const auto& seq = data_[s];
    if (seq.kind != FrameKind::lie) throw ValidationError("training data must be Lie vectors");
    if (seq.width() != k && !seq.frames.empty()) {
      throw DimensionMismatch("sequence has " + std::to_string(seq.width()) + " entries per frame, model expects " +
                              std::to_string(k));
    }
    if (seq.frames.size() >= need) eligible_.push_back(s);
  }
  if (eligible_.empty()) {
    throw SequenceTooShort("no training sequence has the " + std::to_string(need) + " frames a window needs");
  }
  model_.params().init_gaussian(rng_, config_.init_std);
  adam_ = AdamState::zeros_for(model_.params());
}

std::vector<WindowRef> Trainer::draw(Rng& rng, std::size_t count) const {
  const std::size_t need = config_.observed + config_.train_horizon();
  std::vector<WindowRef> out;
  out.reserve(count);
  for (std::size_t b = 0; b < count; ++b) {
    const std::size_t s = eligible_[rng.uniform_int(0, eligible_.size() - 1)];
    const std::size_t offset = rng.uniform_int(0, data_[s].frames.size() - need);
    out.push_back({s, offset});
  }
  return out;
}

std::vector<WindowRef> Trainer::sample(std::size_t count, std::uint64_t seed) const {
  Rng rng(seed);
  return draw(rng, count);
}

double Trainer::window_loss(const WindowRef& w, ad::Tape& tape, std::vector<ad::Tensor>* grads_out) const {
  tape.clear();
  const auto& frames = data_[w.sequence].frames;
  const std::size_t t = config_.observed;
  const std::size_t h = config_.train_horizon();
  const std::span<const LieVector> observed(frames.data() + w.offset, t);
  const std::span<const LieVector> target(frames.data() + w.offset + t, h);
  const auto params = model_.params().bind(tape);
  const auto teacher = config_.teacher_forcing ? target : std::span<const LieVector>{};
  const auto pred = model_.forward(tape, params, observed, h, teacher);
  const ad::Var loss = sthrn::loss(config_.loss, target, pred, theta_);
  if (grads_out != nullptr) {
    tape.backward(loss);
    for (std::size_t i = 0; i < params.size(); ++i) {
      auto dst = (*grads_out)[i].values();
      const auto src = tape.grad(params[i]).values();
      for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += src[k];
    }
  }
  return loss.item();
}

double Trainer::step() {
  const auto batch = draw(rng_, config_.batch_size);
  std::vector<ad::Tensor> grads;
  for (const auto& t : model_.params().tensors()) grads.emplace_back(t.shape());
  ad::Tape tape;
  double total = 0.0;
  for (const auto& w : batch) total += window_loss(w, tape, &grads);
  const double inv = 1.0 / static_cast<double>(batch.size());
  const double loss = total * inv;
  if (!std::isfinite(loss)) throw NumericDivergence(iteration_ + 1, "loss is not finite");
  for (auto& g : grads) {
    for (double& x : g.values()) x *= inv;
  }
  clip_by_global_norm(grads, config_.clip_norm);
  adam_step(model_.params(), grads, adam_, config_.adam());
  ++iteration_;
  return loss;
}

double Trainer::loss_on(const std::vector<WindowRef>& windows) const {
  if (windows.empty()) throw EmptyInput("loss over zero windows");
  ad::Tape tape;
  double total = 0.0;
  for (const auto& w : windows) total += window_loss(w, tape, nullptr);
  return total / static_cast<double>(windows.size());
}

Checkpoint Trainer::checkpoint() const {
  Checkpoint ck = make_checkpoint(model_, entry_lengths_);
  ck.settings = train_settings(config_);
  ck.iteration = iteration_;
  ck.adam = adam_;
  return ck;
}

std::vector<std::pair<std::string, std::string>> train_settings(const TrainConfig& c) {
  return {
      {"batch_size", std::to_string(c.batch_size)},
      {"learning_rate", detail::format_double(c.learning_rate)},
      {"iterations", std::to_string(c.iterations)},
      {"beta1", detail::format_double(c.beta1)},
      {"beta2", detail::format_double(c.beta2)},
      {"epsilon", detail::format_double(c.epsilon)},
      {"observed", std::to_string(c.observed)},
      {"horizon", std::to_string(c.horizon)},
      {"long_horizon", std::to_string(c.long_horizon)},
      {"long_term", c.long_term ? "true" : "false"},
      {"loss", std::string(to_string(c.loss))},
      {"seed", std::to_string(c.seed)},
      {"clip_norm", detail::format_double(c.clip_norm)},
      {"init_std", detail::format_double(c.init_std)},
      {"teacher_forcing", c.teacher_forcing ? "true" : "false"},
  };
}

TrainResult train(const std::vector<MotionSequence>& data, const SkeletonTopology& topo, const TrainConfig& config,
                  const TrainOptions& options) {
  Trainer trainer(config, ChainLayout::from(topo), topo.entry_lengths(), data);
  std::ofstream metrics;
  if (!options.metrics_path.empty()) {
    metrics.open(options.metrics_path);
    if (!metrics) throw Error("cannot open '" + options.metrics_path.string() + "' for writing");
    metrics << "iteration,loss,wallclock_ms\n";
  }
  TrainResult result;
  const auto start = std::chrono::steady_clock::now();
  for (std::size_t it = 0; it < config.iterations; ++it) {
    const double loss = trainer.step();
    result.losses.push_back(loss);
    if (metrics.is_open()) {
      long long ms = 0;
      if (options.wallclock) {
        ms = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start).count();
      }
      metrics << trainer.iteration() << ',' << detail::format_double(loss) << ',' << ms << '\n';
    }
    if (options.log != nullptr && (it + 1) % 50 == 0) {
      *options.log << "iteration " << trainer.iteration() << " loss " << loss << '\n';
    }
    if (config.checkpoint_every > 0 && !options.checkpoint_path.empty() &&
        trainer.iteration() % config.checkpoint_every == 0) {
      save_checkpoint(options.checkpoint_path, trainer.checkpoint());
    }
  }
  result.checkpoint = trainer.checkpoint();
  if (!options.checkpoint_path.empty()) save_checkpoint(options.checkpoint_path, result.checkpoint);
  return result;
}

}  // namespace sthrn
