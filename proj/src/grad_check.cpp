#include "sthrn/grad_check.hpp"

#include <algorithm>
#include <cmath>

namespace sthrn::ad {

namespace {

double evaluate(const ScalarFn& f, Tape& tape, const std::vector<Tensor>& point) {
  tape.clear();
  std::vector<Var> inputs;
  inputs.reserve(point.size());
  for (const auto& t : point) inputs.push_back(tape.leaf(t));
  return f(tape, inputs).item();
}

}  // namespace

double relative_error(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-8});
}

GradCheckResult grad_check(const ScalarFn& f, std::vector<Tensor> point, double step) {
  GradCheckResult result;
  Tape tape;

  std::vector<Tensor> analytic;
  double base = 0.0;
  {
    std::vector<Var> inputs;
    for (const auto& t : point) inputs.push_back(tape.leaf(t));
    const Var out = f(tape, inputs);
    base = out.item();
    tape.backward(out);
    for (const Var& v : inputs) analytic.push_back(tape.grad(v));
    result.nondifferentiable_point = tape.hit_nondifferentiable();
  }

  for (std::size_t k = 0; k < point.size(); ++k) {
    for (std::size_t i = 0; i < point[k].size(); ++i) {
      const double x = point[k][i];
      point[k][i] = x + step;
      const double up = evaluate(f, tape, point);
      point[k][i] = x - step;
      const double down = evaluate(f, tape, point);
      point[k][i] = x;

      GradComponent c;
      c.input = k;
      c.index = i;
      c.analytic = analytic[k][i];
      c.numeric = (up - down) / (2.0 * step);
      c.rel_error = relative_error(c.analytic, c.numeric);

      if (result.nondifferentiable_point) {
        const double right = (up - base) / step;
        const double left = (base - down) / step;
        if (std::abs(right - left) > 1e-3 * std::max({1.0, std::abs(right), std::abs(left)})) {
          result.flagged.push_back(c);
          continue;
        }
      }
      ++result.checked;
      if (c.rel_error >= result.max_rel_error) {
        result.max_rel_error = c.rel_error;
        result.worst = c;
      }
    }
  }
  return result;
}

}  // namespace sthrn::ad
