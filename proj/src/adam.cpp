#include "sthrn/adam.hpp"

#include <cmath>

#include "sthrn/errors.hpp"

namespace sthrn {

AdamState AdamState::zeros_for(const ParamStore& params) {
  AdamState s;
  for (const auto& t : params.tensors()) {
    s.m.emplace_back(t.shape());
    s.v.emplace_back(t.shape());
  }
  return s;
}

double global_norm(const std::vector<ad::Tensor>& grads) {
  double sq = 0.0;
  for (const auto& g : grads) {
    for (double x : g.values()) sq += x * x;
  }
  return std::sqrt(sq);
}

double clip_by_global_norm(std::vector<ad::Tensor>& grads, double max_norm) {
  const double norm = global_norm(grads);
  if (max_norm > 0.0 && norm > max_norm) {
    const double s = max_norm / norm;
    for (auto& g : grads) {
      for (double& x : g.values()) x *= s;
    }
  }
  return norm;
}

void adam_step(ParamStore& params, const std::vector<ad::Tensor>& grads, AdamState& state, const AdamConfig& config) {
  if (grads.size() != params.size() || state.m.size() != params.size() || state.v.size() != params.size()) {
    throw ShapeMismatch("adam: parameter, gradient and moment counts differ");
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(config.beta1, t);
  const double c2 = 1.0 - std::pow(config.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto p = params[i].values();
    const auto g = grads[i].values();
    auto m = state.m[i].values();
    auto v = state.v[i].values();
    if (g.size() != p.size() || m.size() != p.size()) throw ShapeMismatch("adam: shape mismatch for " + params.name(i));
    for (std::size_t k = 0; k < p.size(); ++k) {
      m[k] = config.beta1 * m[k] + (1.0 - config.beta1) * g[k];
      v[k] = config.beta2 * v[k] + (1.0 - config.beta2) * g[k] * g[k];
      const double m_hat = m[k] / c1;
      const double v_hat = v[k] / c2;
      p[k] -= config.learning_rate * m_hat / (std::sqrt(v_hat) + config.epsilon);
    }
  }
}

}  // namespace sthrn
