#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace sthrn::ad {

/// Dimension list of rank 0 (scalar), 1 (vector) or 2 (matrix).
class Shape {
 public:
  Shape() = default;
  explicit Shape(std::size_t n) : rank_(1), dims_{n, 1} {}
  Shape(std::size_t rows, std::size_t cols) : rank_(2), dims_{rows, cols} {}

  std::size_t rank() const { return rank_; }
  std::size_t operator[](std::size_t axis) const { return dims_[axis]; }
  std::size_t numel() const { return rank_ == 0 ? 1 : dims_[0] * dims_[1]; }
  std::string str() const;

  friend bool operator==(const Shape& a, const Shape& b) {
    return a.rank_ == b.rank_ && (a.rank_ == 0 || a.dims_ == b.dims_);
  }

 private:
  std::size_t rank_ = 0;
  std::array<std::size_t, 2> dims_{1, 1};
};

/// Dense row-major block of doubles.
class Tensor {
 public:
  Tensor() : values_(1, 0.0) {}
  explicit Tensor(Shape shape, double fill = 0.0) : shape_(shape), values_(shape.numel(), fill) {}
  Tensor(Shape shape, std::vector<double> values);

  static Tensor scalar(double v) { return Tensor(Shape{}, v); }
  static Tensor vector(std::vector<double> v);

  const Shape& shape() const { return shape_; }
  std::size_t size() const { return values_.size(); }
  double* data() { return values_.data(); }
  const double* data() const { return values_.data(); }
  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }

  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }
  double& at(std::size_t r, std::size_t c) { return values_[r * shape_[1] + c]; }
  double at(std::size_t r, std::size_t c) const { return values_[r * shape_[1] + c]; }
  /// Value of a single-element tensor.
  double item() const;

  void fill(double v);

  friend bool operator==(const Tensor& a, const Tensor& b) { return a.shape_ == b.shape_ && a.values_ == b.values_; }

 private:
  Shape shape_;
  std::vector<double> values_;
};

enum class Op : std::uint8_t {
  leaf,
  matmul,
  add,
  sub,
  concat,
  slice,
  sigmoid,
  tanh,
  hadamard,
  scale,
  scale_by,
  reciprocal,
  sum,
  mean,
  l2norm,
};

class Tape;

/// Handle to a node on a tape. Cheap to copy; valid while the tape lives.
class Var {
 public:
  Var() = default;

  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
  double item() const { return value().item(); }
  Tape* tape() const { return tape_; }
  std::uint32_t id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }

 private:
  friend class Tape;
  Var(Tape* tape, std::uint32_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::uint32_t id_ = 0;
};

/// Dynamic reverse-mode tape.
///
/// Nodes are appended in evaluation order, so the node list is already a
/// topological order and backward() is one reverse sweep.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Input node (parameter, data, or constant).
  Var leaf(Tensor value);

  const Tensor& value(Var v) const { return nodes_[v.id_].value; }
  /// Gradient from the last backward(); zero for nodes it did not reach.
  const Tensor& grad(Var v) const;

  /// Resets all gradients, then accumulates d(root)/d(node) for every node.
  void backward(Var root);

  /// Drops all nodes. Vars created before are invalidated.
  void clear();

  std::size_t size() const { return nodes_.size(); }
  /// True when an op was evaluated at a point where it has no derivative
  /// (l2norm of a zero vector).
  bool hit_nondifferentiable() const { return kink_; }

  Var record(Op op, Tensor value, std::initializer_list<Var> parents, std::size_t aux = 0, double scalar = 0.0);
  Var record(Op op, Tensor value, std::span<const Var> parents, std::size_t aux = 0, double scalar = 0.0);
  void mark_nondifferentiable() { kink_ = true; }

 private:
  struct Node {
    Op op;
    std::uint32_t first_parent;
    std::uint32_t parent_count;
    std::size_t aux;
    double scalar;
    Tensor value;
  };

  void backprop_node(std::uint32_t id);
  Tensor& grad_slot(std::uint32_t id);

  std::vector<Node> nodes_;
  std::vector<std::uint32_t> parents_;
  std::vector<Tensor> grads_;
  std::vector<bool> touched_;
  bool kink_ = false;
};

inline const Tensor& Var::value() const { return tape_->value(*this); }

/// (m x k) * (k) -> (m), or (m x k) * (k x n) -> (m x n).
Var matmul(Var a, Var b);
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var concat(std::span<const Var> parts);
Var concat(std::initializer_list<Var> parts);
/// Elements [offset, offset + length) of a flattened tensor, as a vector.
Var slice(Var a, std::size_t offset, std::size_t length);
Var sigmoid(Var a);
Var tanh(Var a);
Var hadamard(Var a, Var b);
Var scale(Var a, double s);
/// a times the scalar node s.
Var scale_by(Var a, Var s);
/// 1 / s for a scalar node.
Var reciprocal(Var s);
Var sum(Var a);
Var mean(Var a);
/// Euclidean norm of the flattened tensor. Subgradient 0 at the origin.
Var l2norm(Var a);

inline Var operator+(Var a, Var b) { return add(a, b); }
inline Var operator-(Var a, Var b) { return sub(a, b); }
inline Var operator*(Var a, double s) { return scale(a, s); }

}  // namespace sthrn::ad
