#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "sthrn/adam.hpp"
#include "sthrn/checkpoint.hpp"
#include "sthrn/losses.hpp"
#include "sthrn/model.hpp"
#include "sthrn/random.hpp"
#include "sthrn/skeleton.hpp"

namespace sthrn {

struct TrainConfig {
  ModelConfig model;
  std::size_t batch_size = 32;
  double learning_rate = 1e-3;
  std::size_t iterations = 1000;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::size_t observed = 50;  // t
  std::size_t horizon = 10;
  std::size_t long_horizon = 100;
  bool long_term = false;  // train on long_horizon instead of horizon
  LossKind loss = LossKind::weighted;
  std::uint64_t seed = 1;
  double clip_norm = 5.0;
  double init_std = 0.1;
  bool teacher_forcing = false;
  std::size_t checkpoint_every = 0;  // 0: only at the end

  std::size_t train_horizon() const { return long_term ? long_horizon : horizon; }
  /// Throws ValidationError on non-positive rates or sizes.
  void validate() const;
  AdamConfig adam() const { return {learning_rate, beta1, beta2, epsilon}; }
};

/// Start offsets of `count` training windows drawn uniformly over every
/// sequence long enough for observed + horizon frames.
struct WindowRef {
  std::size_t sequence = 0;
  std::size_t offset = 0;
};

/// Iterative trainer over csv-lie sequences.
class Trainer {
 public:
  /// Initializes the model from config.seed (Gaussian weights, zero biases).
  Trainer(const TrainConfig& config, const ChainLayout& layout, std::vector<double> entry_lengths,
          std::vector<MotionSequence> data);

  const TrainConfig& config() const { return config_; }
  const Model& model() const { return model_; }
  Model& model() { return model_; }
  const AdamState& adam() const { return adam_; }
  std::size_t iteration() const { return iteration_; }

  /// One optimizer step on a freshly sampled batch. Returns the batch loss
  /// before the update. Throws NumericDivergence on a non-finite loss.
  double step();

  /// `count` windows drawn with `seed`, independent of the training stream.
  std::vector<WindowRef> sample(std::size_t count, std::uint64_t seed) const;
  /// Mean loss over the given windows, with current parameters (no update).
  double loss_on(const std::vector<WindowRef>& windows) const;

  Checkpoint checkpoint() const;

 private:
  double window_loss(const WindowRef& w, ad::Tape& tape, std::vector<ad::Tensor>* grads_out) const;
  std::vector<WindowRef> draw(Rng& rng, std::size_t count) const;

  TrainConfig config_;
  std::vector<double> entry_lengths_;
  std::vector<double> theta_;
  std::vector<MotionSequence> data_;
  std::vector<std::size_t> eligible_;
  Model model_;
  AdamState adam_;
  Rng rng_;
  std::size_t iteration_ = 0;
};

struct TrainOptions {
  std::filesystem::path metrics_path;     // empty: no metrics file
  std::filesystem::path checkpoint_path;  // empty: no checkpoint files
  bool wallclock = true;                  // false writes 0 in the wallclock column
  std::ostream* log = nullptr;
};

struct TrainResult {
  Checkpoint checkpoint;
  std::vector<double> losses;  // one per iteration
};

/// Runs config.iterations steps, writing metrics and checkpoints as requested.
TrainResult train(const std::vector<MotionSequence>& data, const SkeletonTopology& topo, const TrainConfig& config,
                  const TrainOptions& options = {});

/// Training settings recorded in checkpoints.
std::vector<std::pair<std::string, std::string>> train_settings(const TrainConfig& config);

}  // namespace sthrn
