#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <span>
#include <vector>

#include "rad/nn/tensor.hpp"

namespace rad::nn {

class Tape;

// Handle to a value recorded on a Tape. Cheap to copy; valid until the tape
// is cleared.
class Var {
 public:
  Var() = default;
  Var(Tape* tape, std::uint32_t id) : tape_(tape), id_(id) {}

  Tape& tape() const { return *tape_; }
  std::uint32_t id() const noexcept { return id_; }
  bool valid() const noexcept { return tape_ != nullptr; }

  std::span<const double> value() const;
  const Shape& shape() const;
  std::size_t size() const { return value().size(); }
  // Value of a single-element Var.
  double item() const;

 private:
  Tape* tape_ = nullptr;
  std::uint32_t id_ = 0;
};

// Append-only record of operations for reverse-mode differentiation. Node
// creation order is a topological order, so backward() walks it in reverse
// and runs each node's backward function at most once. Confined to one
// thread; clear() recycles node storage between samples.
class Tape {
 public:
  // Called with the node's own id; reads grad(self) and accumulates into the
  // gradients of its inputs (tape nodes or Parameters).
  using BackwardFn = std::function<void(Tape&, std::uint32_t)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(const Tensor& t);
  Var constant(Shape shape, std::span<const double> values);
  // Snapshot of a parameter's value; gradients accumulate into param.grad.
  Var leaf(Parameter& param);

  // Records a node. Values must be finite (NumericError otherwise).
  Var record(Shape shape, std::span<const double> values, BackwardFn backward);

  std::span<const double> value(std::uint32_t id) const { return nodes_[id].value; }
  const Shape& shape(std::uint32_t id) const { return nodes_[id].shape; }
  // Gradient buffer of a node, zero-initialised on first access.
  std::span<double> grad(std::uint32_t id);
  std::span<double> grad(Var v) { return grad(v.id()); }
  bool has_grad(std::uint32_t id) const { return nodes_[id].has_grad; }

  // Seeds d(output)/d(output) = seed and propagates to every input.
  void backward(Var output, double seed = 1.0);

  void clear() noexcept { size_ = 0; }
  std::size_t size() const noexcept { return size_; }

 private:
  struct Node {
    Shape shape;
    std::vector<double> value;
    std::vector<double> grad;
    BackwardFn backward;
    bool has_grad = false;
  };

  Node& next_node();

  // deque keeps node storage stable while new nodes are appended.
  std::deque<Node> nodes_;
  std::size_t size_ = 0;
};

}  // namespace rad::nn
