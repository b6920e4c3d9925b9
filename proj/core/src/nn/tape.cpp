#include "rad/nn/tape.hpp"

#include <algorithm>
#include <cmath>

#include "rad/error.hpp"

namespace rad::nn {

std::span<const double> Var::value() const { return tape_->value(id_); }

const Shape& Var::shape() const { return tape_->shape(id_); }

double Var::item() const {
  const auto v = value();
  if (v.size() != 1) {
    throw ShapeError("item() on a Var of shape " + shape_string(shape()));
  }
  return v[0];
}

Tape::Node& Tape::next_node() {
  if (size_ == nodes_.size()) nodes_.emplace_back();
  auto& n = nodes_[size_++];
  n.has_grad = false;
  return n;
}

Var Tape::record(Shape shape, std::span<const double> values, BackwardFn backward) {
  if (values.size() != shape_size(shape)) {
    throw ShapeError("node of shape " + shape_string(shape) + " given " +
                     std::to_string(values.size()) + " values");
  }
  for (double x : values) {
    if (!std::isfinite(x)) throw NumericError("non-finite value produced on tape");
  }
  auto& n = next_node();
  n.shape = std::move(shape);
  n.value.assign(values.begin(), values.end());
  n.backward = std::move(backward);
  return Var(this, static_cast<std::uint32_t>(size_ - 1));
}

Var Tape::constant(const Tensor& t) { return record(t.shape, t.data, nullptr); }

Var Tape::constant(Shape shape, std::span<const double> values) {
  return record(std::move(shape), values, nullptr);
}

Var Tape::leaf(Parameter& param) {
  Parameter* p = &param;
  return record(param.value.shape, param.value.data, [p](Tape& t, std::uint32_t self) {
    const auto g = t.grad(self);
    for (std::size_t i = 0; i < g.size(); ++i) p->grad.data[i] += g[i];
  });
}

std::span<double> Tape::grad(std::uint32_t id) {
  auto& n = nodes_[id];
  if (!n.has_grad) {
    n.grad.assign(n.value.size(), 0.0);
    n.has_grad = true;
  }
  return n.grad;
}

void Tape::backward(Var output, double seed) {
  if (&output.tape() != this) throw ShapeError("backward() on a Var from another tape");
  if (output.size() != 1) {
    throw ShapeError("backward() needs a scalar output, got " + shape_string(output.shape()));
  }
  grad(output.id())[0] += seed;
  for (auto id = static_cast<std::int64_t>(output.id()); id >= 0; --id) {
    auto& n = nodes_[static_cast<std::size_t>(id)];
    if (n.has_grad && n.backward) n.backward(*this, static_cast<std::uint32_t>(id));
  }
}

}  // namespace rad::nn
