#include "sthrn/autodiff.hpp"

#include <Eigen/Core>
#include <cmath>

#include "sthrn/errors.hpp"

namespace sthrn::ad {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<RowMatrix>;
using ConstMatMap = Eigen::Map<const RowMatrix>;
using VecMap = Eigen::Map<Eigen::VectorXd>;
using ConstVecMap = Eigen::Map<const Eigen::VectorXd>;

ConstMatMap as_matrix(const Tensor& t) {
  return ConstMatMap(t.data(), static_cast<Eigen::Index>(t.shape()[0]), static_cast<Eigen::Index>(t.shape()[1]));
}

MatMap as_matrix(Tensor& t) {
  return MatMap(t.data(), static_cast<Eigen::Index>(t.shape()[0]), static_cast<Eigen::Index>(t.shape()[1]));
}

ConstVecMap as_vector(const Tensor& t) { return ConstVecMap(t.data(), static_cast<Eigen::Index>(t.size())); }
VecMap as_vector(Tensor& t) { return VecMap(t.data(), static_cast<Eigen::Index>(t.size())); }

Tape& tape_of(Var a) {
  if (!a.valid()) throw Error("operation on an unbound Var");
  return *a.tape();
}

Tape& tape_of(Var a, Var b) {
  if (a.tape() != b.tape()) throw Error("operands live on different tapes");
  return tape_of(a);
}

void require_same_shape(Var a, Var b, const char* op) {
  if (!(a.shape() == b.shape())) {
    throw ShapeMismatch(std::string(op) + ": " + a.shape().str() + " vs " + b.shape().str());
  }
}

double stable_sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

std::string Shape::str() const {
  if (rank_ == 0) return "()";
  if (rank_ == 1) return "(" + std::to_string(dims_[0]) + ")";
  return "(" + std::to_string(dims_[0]) + "x" + std::to_string(dims_[1]) + ")";
}

Tensor::Tensor(Shape shape, std::vector<double> values) : shape_(shape), values_(std::move(values)) {
  if (values_.size() != shape_.numel()) {
    throw ShapeMismatch("tensor of shape " + shape_.str() + " given " + std::to_string(values_.size()) + " values");
  }
}

Tensor Tensor::vector(std::vector<double> v) {
  const std::size_t n = v.size();
  return Tensor(Shape(n), std::move(v));
}

double Tensor::item() const {
  if (values_.size() != 1) throw ShapeMismatch("item() on tensor of shape " + shape_.str());
  return values_[0];
}

void Tensor::fill(double v) { std::fill(values_.begin(), values_.end(), v); }

Var Tape::leaf(Tensor value) { return record(Op::leaf, std::move(value), std::initializer_list<Var>{}); }

Var Tape::record(Op op, Tensor value, std::initializer_list<Var> parents, std::size_t aux, double scalar) {
  return record(op, std::move(value), std::span<const Var>(parents.begin(), parents.size()), aux, scalar);
}

Var Tape::record(Op op, Tensor value, std::span<const Var> parents, std::size_t aux, double scalar) {
  const auto first = static_cast<std::uint32_t>(parents_.size());
  for (const Var& p : parents) parents_.push_back(p.id_);
  nodes_.push_back(Node{op, first, static_cast<std::uint32_t>(parents.size()), aux, scalar, std::move(value)});
  return Var(this, static_cast<std::uint32_t>(nodes_.size() - 1));
}

void Tape::clear() {
  nodes_.clear();
  parents_.clear();
  grads_.clear();
  touched_.clear();
  kink_ = false;
}

const Tensor& Tape::grad(Var v) const {
  if (v.id_ >= grads_.size()) throw Error("gradient requested before backward()");
  return grads_[v.id_];
}

Tensor& Tape::grad_slot(std::uint32_t id) {
  touched_[id] = true;
  return grads_[id];
}

void Tape::backward(Var root) {
  if (root.tape_ != this) throw Error("backward root belongs to another tape");
  if (nodes_[root.id_].value.size() != 1) {
    throw NonScalarRoot("backward() needs a scalar root, got shape " + nodes_[root.id_].value.shape().str());
  }
  grads_.resize(nodes_.size());
  for (std::size_t i = 0; i < nodes_.size(); ++i) grads_[i] = Tensor(nodes_[i].value.shape(), 0.0);
  touched_.assign(nodes_.size(), false);
  grad_slot(root.id_)[0] = 1.0;
  for (std::uint32_t id = root.id_ + 1; id-- > 0;) {
    if (touched_[id]) backprop_node(id);
  }
}

void Tape::backprop_node(std::uint32_t id) {
  const Node& node = nodes_[id];
  if (node.op == Op::leaf) return;
  const Tensor& g = grads_[id];
  const std::uint32_t* par = parents_.data() + node.first_parent;

  switch (node.op) {
    case Op::leaf:
      break;
    case Op::matmul: {
      const Tensor& a = nodes_[par[0]].value;
      const Tensor& b = nodes_[par[1]].value;
      Tensor& ga = grad_slot(par[0]);
      Tensor& gb = grad_slot(par[1]);
      if (b.shape().rank() == 1) {
        as_matrix(ga).noalias() += as_vector(g) * as_vector(b).transpose();
        as_vector(gb).noalias() += as_matrix(a).transpose() * as_vector(g);
      } else {
        as_matrix(ga).noalias() += as_matrix(g) * as_matrix(b).transpose();
        as_matrix(gb).noalias() += as_matrix(a).transpose() * as_matrix(g);
      }
      break;
    }
    case Op::add:
      as_vector(grad_slot(par[0])) += as_vector(g);
      as_vector(grad_slot(par[1])) += as_vector(g);
      break;
    case Op::sub:
      as_vector(grad_slot(par[0])) += as_vector(g);
      as_vector(grad_slot(par[1])) -= as_vector(g);
      break;
    case Op::concat: {
      std::size_t offset = 0;
      for (std::uint32_t k = 0; k < node.parent_count; ++k) {
        Tensor& gp = grad_slot(par[k]);
        for (std::size_t i = 0; i < gp.size(); ++i) gp[i] += g[offset + i];
        offset += gp.size();
      }
      break;
    }
    case Op::slice: {
      Tensor& gp = grad_slot(par[0]);
      for (std::size_t i = 0; i < g.size(); ++i) gp[node.aux + i] += g[i];
      break;
    }
    case Op::sigmoid: {
      Tensor& gp = grad_slot(par[0]);
      for (std::size_t i = 0; i < g.size(); ++i) {
        const double y = node.value[i];
        gp[i] += g[i] * y * (1.0 - y);
      }
      break;
    }
    case Op::tanh: {
      Tensor& gp = grad_slot(par[0]);
      for (std::size_t i = 0; i < g.size(); ++i) {
        const double y = node.value[i];
        gp[i] += g[i] * (1.0 - y * y);
      }
      break;
    }
    case Op::hadamard: {
      const Tensor& a = nodes_[par[0]].value;
      const Tensor& b = nodes_[par[1]].value;
      Tensor& ga = grad_slot(par[0]);
      Tensor& gb = grad_slot(par[1]);
      for (std::size_t i = 0; i < g.size(); ++i) {
        ga[i] += g[i] * b[i];
        gb[i] += g[i] * a[i];
      }
      break;
    }
    case Op::scale:
      as_vector(grad_slot(par[0])) += node.scalar * as_vector(g);
      break;
    case Op::scale_by: {
      const Tensor& a = nodes_[par[0]].value;
      const double s = nodes_[par[1]].value[0];
      as_vector(grad_slot(par[0])) += s * as_vector(g);
      grad_slot(par[1])[0] += as_vector(g).dot(as_vector(a));
      break;
    }
    case Op::reciprocal: {
      const double y = node.value[0];
      grad_slot(par[0])[0] += -g[0] * y * y;
      break;
    }
    case Op::sum:
      as_vector(grad_slot(par[0])).array() += g[0];
      break;
    case Op::mean: {
      Tensor& gp = grad_slot(par[0]);
      as_vector(gp).array() += g[0] / static_cast<double>(gp.size());
      break;
    }
    case Op::l2norm: {
      const double norm = node.value[0];
      Tensor& gp = grad_slot(par[0]);
      if (norm > 0.0) {
        as_vector(gp) += (g[0] / norm) * as_vector(nodes_[par[0]].value);
      }
      break;
    }
  }
}

Var matmul(Var a, Var b) {
  Tape& tape = tape_of(a, b);
  const Shape& sa = a.shape();
  const Shape& sb = b.shape();
  if (sa.rank() != 2 || sb.rank() == 0 || sa[1] != sb[0]) {
    throw ShapeMismatch("matmul: " + sa.str() + " x " + sb.str());
  }
  if (sb.rank() == 1) {
    Tensor out{Shape(sa[0])};
    as_vector(out).noalias() = as_matrix(a.value()) * as_vector(b.value());
    return tape.record(Op::matmul, std::move(out), {a, b});
  }
  Tensor out(Shape(sa[0], sb[1]));
  as_matrix(out).noalias() = as_matrix(a.value()) * as_matrix(b.value());
  return tape.record(Op::matmul, std::move(out), {a, b});
}

Var add(Var a, Var b) {
  Tape& tape = tape_of(a, b);
  require_same_shape(a, b, "add");
  Tensor out = a.value();
  as_vector(out) += as_vector(b.value());
  return tape.record(Op::add, std::move(out), {a, b});
}

Var sub(Var a, Var b) {
  Tape& tape = tape_of(a, b);
  require_same_shape(a, b, "sub");
  Tensor out = a.value();
  as_vector(out) -= as_vector(b.value());
  return tape.record(Op::sub, std::move(out), {a, b});
}

Var concat(std::span<const Var> parts) {
  if (parts.empty()) throw ShapeMismatch("concat of nothing");
  Tape& tape = tape_of(parts.front());
  std::size_t n = 0;
  for (const Var& p : parts) {
    tape_of(parts.front(), p);
    if (p.shape().rank() > 1) throw ShapeMismatch("concat expects scalars or vectors, got " + p.shape().str());
    n += p.value().size();
  }
  Tensor out{Shape(n)};
  std::size_t offset = 0;
  for (const Var& p : parts) {
    const Tensor& v = p.value();
    std::copy(v.data(), v.data() + v.size(), out.data() + offset);
    offset += v.size();
  }
  return tape.record(Op::concat, std::move(out), parts);
}

Var concat(std::initializer_list<Var> parts) { return concat(std::span<const Var>(parts.begin(), parts.size())); }

Var slice(Var a, std::size_t offset, std::size_t length) {
  Tape& tape = tape_of(a);
  const Tensor& v = a.value();
  if (offset + length > v.size()) {
    throw ShapeMismatch("slice [" + std::to_string(offset) + ", " + std::to_string(offset + length) + ") of " +
                        v.shape().str());
  }
  Tensor out{Shape(length)};
  std::copy(v.data() + offset, v.data() + offset + length, out.data());
  return tape.record(Op::slice, std::move(out), {a}, offset);
}

Var sigmoid(Var a) {
  Tape& tape = tape_of(a);
  Tensor out = a.value();
  for (double& x : out.values()) x = stable_sigmoid(x);
  return tape.record(Op::sigmoid, std::move(out), {a});
}

Var tanh(Var a) {
  Tape& tape = tape_of(a);
  Tensor out = a.value();
  for (double& x : out.values()) x = std::tanh(x);
  return tape.record(Op::tanh, std::move(out), {a});
}

Var hadamard(Var a, Var b) {
  Tape& tape = tape_of(a, b);
  require_same_shape(a, b, "hadamard");
  Tensor out = a.value();
  as_vector(out).array() *= as_vector(b.value()).array();
  return tape.record(Op::hadamard, std::move(out), {a, b});
}

Var scale(Var a, double s) {
  Tape& tape = tape_of(a);
  Tensor out = a.value();
  as_vector(out) *= s;
  return tape.record(Op::scale, std::move(out), {a}, 0, s);
}

Var scale_by(Var a, Var s) {
  Tape& tape = tape_of(a, s);
  if (s.value().size() != 1) throw ShapeMismatch("scale_by expects a scalar factor, got " + s.shape().str());
  Tensor out = a.value();
  as_vector(out) *= s.value()[0];
  return tape.record(Op::scale_by, std::move(out), {a, s});
}

Var reciprocal(Var s) {
  Tape& tape = tape_of(s);
  if (s.value().size() != 1) throw ShapeMismatch("reciprocal expects a scalar, got " + s.shape().str());
  return tape.record(Op::reciprocal, Tensor::scalar(1.0 / s.value()[0]), {s});
}

Var sum(Var a) {
  Tape& tape = tape_of(a);
  return tape.record(Op::sum, Tensor::scalar(as_vector(a.value()).sum()), {a});
}

Var mean(Var a) {
  Tape& tape = tape_of(a);
  const Tensor& v = a.value();
  return tape.record(Op::mean, Tensor::scalar(as_vector(v).sum() / static_cast<double>(v.size())), {a});
}

Var l2norm(Var a) {
  Tape& tape = tape_of(a);
  const double norm = as_vector(a.value()).norm();
  if (norm == 0.0) tape.mark_nondifferentiable();
  return tape.record(Op::l2norm, Tensor::scalar(norm), {a});
}

}  // namespace sthrn::ad
