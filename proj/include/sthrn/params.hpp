#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sthrn/autodiff.hpp"

namespace sthrn {

class Rng;

/// Named parameter tensors in registration order.
class ParamStore {
 public:
  /// Returns the index of the new entry. Names must be unique.
  std::size_t add(std::string name, ad::Tensor init);

  std::size_t size() const { return tensors_.size(); }
  std::size_t scalar_count() const;
  const std::string& name(std::size_t i) const { return names_[i]; }
  ad::Tensor& operator[](std::size_t i) { return tensors_[i]; }
  const ad::Tensor& operator[](std::size_t i) const { return tensors_[i]; }
  std::optional<std::size_t> find(std::string_view name) const;
  std::size_t index(std::string_view name) const;
  const std::vector<ad::Tensor>& tensors() const { return tensors_; }
  std::vector<ad::Tensor>& tensors() { return tensors_; }

  /// One leaf per parameter, aligned with the store's indices.
  std::vector<ad::Var> bind(ad::Tape& tape) const;

  /// Store with the same names and shapes, all zeros.
  ParamStore zeros_like() const;

  void set_zero();
  /// Weights ~ N(0, std^2); tensors whose name ends in ".b" stay zero.
  void init_gaussian(Rng& rng, double std);

  friend bool operator==(const ParamStore& a, const ParamStore& b) {
    return a.names_ == b.names_ && a.tensors_ == b.tensors_;
  }

 private:
  std::vector<std::string> names_;
  std::vector<ad::Tensor> tensors_;
};

}  // namespace sthrn
