#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "sthrn/autodiff.hpp"

namespace sthrn::ad {

/// Scalar function of a list of input tensors, evaluated on a tape.
using ScalarFn = std::function<Var(Tape&, std::span<const Var>)>;

struct GradComponent {
  std::size_t input = 0;
  std::size_t index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  double rel_error = 0.0;
};

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t checked = 0;
  GradComponent worst;
  /// Components skipped because the function has a kink there.
  std::vector<GradComponent> flagged;
  bool nondifferentiable_point = false;
};

/// Relative error |a - b| / max(|a|, |b|, 1e-8).
double relative_error(double a, double b);

/// Compares backward() against central differences for every input element.
///
/// When the tape reports a non-differentiable op at `point`, components whose
/// one-sided slopes disagree are flagged and left out of max_rel_error.
GradCheckResult grad_check(const ScalarFn& f, std::vector<Tensor> point, double step = 1e-5);

}  // namespace sthrn::ad
