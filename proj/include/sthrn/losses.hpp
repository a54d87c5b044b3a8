#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "sthrn/autodiff.hpp"
#include "sthrn/skeleton.hpp"

namespace sthrn {

enum class LossKind { weighted, l2 };

std::string_view to_string(LossKind kind);
LossKind parse_loss_kind(std::string_view text);

/// Accumulated bone weights: theta[z] = sum_{j >= z} (K - j) * lengths[j]
/// with 0-based z and j, so the last entry gets its own length.
std::vector<double> theta_weights(std::span<const double> entry_lengths);

/// Mean over frames of sum_z theta[z] * |pred_z - target_z|.
double weighted_loss(std::span<const LieVector> target, std::span<const LieVector> pred,
                     std::span<const double> entry_lengths);
/// Mean over frames of sum_z |pred_z - target_z|^2.
double l2_loss(std::span<const LieVector> target, std::span<const LieVector> pred);

/// Differentiable versions; `pred` holds flat (3K) vectors on one tape.
ad::Var weighted_loss(std::span<const LieVector> target, std::span<const ad::Var> pred,
                      std::span<const double> theta);
ad::Var l2_loss(std::span<const LieVector> target, std::span<const ad::Var> pred);

/// Dispatches on `kind`; `theta` is ignored for the L2 loss.
ad::Var loss(LossKind kind, std::span<const LieVector> target, std::span<const ad::Var> pred,
             std::span<const double> theta);

}  // namespace sthrn
