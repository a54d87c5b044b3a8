#include "sthrn/losses.hpp"

#include <string>

#include "sthrn/errors.hpp"
#include "sthrn/model.hpp"

namespace sthrn {

std::string_view to_string(LossKind kind) { return kind == LossKind::weighted ? "weighted" : "l2"; }

LossKind parse_loss_kind(std::string_view text) {
  if (text == "weighted") return LossKind::weighted;
  if (text == "l2") return LossKind::l2;
  throw ValidationError("unknown loss '" + std::string(text) + "' (expected weighted or l2)");
}

std::vector<double> theta_weights(std::span<const double> entry_lengths) {
  const std::size_t k = entry_lengths.size();
  std::vector<double> theta(k, 0.0);
  double acc = 0.0;
  for (std::size_t z = k; z-- > 0;) {
    acc += static_cast<double>(k - z) * entry_lengths[z];
    theta[z] = acc;
  }
  return theta;
}

namespace {

void check_frames(std::size_t target, std::size_t pred) {
  if (target != pred) {
    throw DimensionMismatch("loss over " + std::to_string(pred) + " predicted vs " + std::to_string(target) +
                            " target frames");
  }
  if (target == 0) throw EmptyInput("loss over zero frames");
}

void check_width(std::size_t expected, std::size_t got) {
  if (expected != got) {
    throw DimensionMismatch("frame has " + std::to_string(got) + " entries, expected " + std::to_string(expected));
  }
}

}  // namespace

double weighted_loss(std::span<const LieVector> target, std::span<const LieVector> pred,
                     std::span<const double> entry_lengths) {
  check_frames(target.size(), pred.size());
  const auto theta = theta_weights(entry_lengths);
  double total = 0.0;
  for (std::size_t f = 0; f < target.size(); ++f) {
    check_width(theta.size(), target[f].size());
    check_width(theta.size(), pred[f].size());
    for (std::size_t z = 0; z < theta.size(); ++z) total += theta[z] * (pred[f][z] - target[f][z]).norm();
  }
  return total / static_cast<double>(target.size());
}

double l2_loss(std::span<const LieVector> target, std::span<const LieVector> pred) {
  check_frames(target.size(), pred.size());
  double total = 0.0;
  for (std::size_t f = 0; f < target.size(); ++f) {
    check_width(target[f].size(), pred[f].size());
    for (std::size_t z = 0; z < target[f].size(); ++z) total += (pred[f][z] - target[f][z]).squaredNorm();
  }
  return total / static_cast<double>(target.size());
}

ad::Var weighted_loss(std::span<const LieVector> target, std::span<const ad::Var> pred,
                      std::span<const double> theta) {
  check_frames(target.size(), pred.size());
  ad::Tape& tape = *pred.front().tape();
  ad::Var total;
  for (std::size_t f = 0; f < target.size(); ++f) {
    check_width(theta.size(), target[f].size());
    check_width(3 * theta.size(), pred[f].value().size());
    const ad::Var diff = pred[f] - tape.leaf(flatten(target[f]));
    for (std::size_t z = 0; z < theta.size(); ++z) {
      const ad::Var term = ad::scale(ad::l2norm(ad::slice(diff, 3 * z, 3)), theta[z]);
      total = total.valid() ? total + term : term;
    }
  }
  return ad::scale(total, 1.0 / static_cast<double>(target.size()));
}

ad::Var l2_loss(std::span<const LieVector> target, std::span<const ad::Var> pred) {
  check_frames(target.size(), pred.size());
  ad::Tape& tape = *pred.front().tape();
  ad::Var total;
  for (std::size_t f = 0; f < target.size(); ++f) {
    check_width(3 * target[f].size(), pred[f].value().size());
    const ad::Var diff = pred[f] - tape.leaf(flatten(target[f]));
    const ad::Var term = ad::sum(ad::hadamard(diff, diff));
    total = total.valid() ? total + term : term;
  }
  return ad::scale(total, 1.0 / static_cast<double>(target.size()));
}

ad::Var loss(LossKind kind, std::span<const LieVector> target, std::span<const ad::Var> pred,
             std::span<const double> theta) {
  return kind == LossKind::weighted ? weighted_loss(target, pred, theta) : l2_loss(target, pred);
}

}  // namespace sthrn
