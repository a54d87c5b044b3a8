#include "sthrn/params.hpp"

#include <algorithm>

#include "sthrn/errors.hpp"
#include "sthrn/random.hpp"

namespace sthrn {

std::size_t ParamStore::add(std::string name, ad::Tensor init) {
  if (find(name)) throw ValidationError("duplicate parameter name '" + name + "'");
  names_.push_back(std::move(name));
  tensors_.push_back(std::move(init));
  return tensors_.size() - 1;
}

std::size_t ParamStore::scalar_count() const {
  std::size_t n = 0;
  for (const auto& t : tensors_) n += t.size();
  return n;
}

std::optional<std::size_t> ParamStore::find(std::string_view name) const {
  const auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - names_.begin());
}

std::size_t ParamStore::index(std::string_view name) const {
  if (auto i = find(name)) return *i;
  throw ValidationError("no parameter named '" + std::string(name) + "'");
}

std::vector<ad::Var> ParamStore::bind(ad::Tape& tape) const {
  std::vector<ad::Var> out;
  out.reserve(tensors_.size());
  for (const auto& t : tensors_) out.push_back(tape.leaf(t));
  return out;
}

ParamStore ParamStore::zeros_like() const {
  ParamStore out = *this;
  out.set_zero();
  return out;
}

void ParamStore::set_zero() {
  for (auto& t : tensors_) t.fill(0.0);
}

void ParamStore::init_gaussian(Rng& rng, double std) {
  for (std::size_t i = 0; i < tensors_.size(); ++i) {
    const auto& n = names_[i];
    const bool bias = n.size() >= 2 && n.compare(n.size() - 2, 2, ".b") == 0;
    for (double& x : tensors_[i].values()) x = bias ? 0.0 : std * rng.normal();
  }
}

}  // namespace sthrn
