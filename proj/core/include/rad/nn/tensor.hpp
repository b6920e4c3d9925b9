#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace rad::nn {

using Shape = std::vector<std::size_t>;
using Rng = std::mt19937_64;

std::size_t shape_size(const Shape& shape);
std::string shape_string(const Shape& shape);

// Dense row-major array of doubles.
struct Tensor {
  Shape shape;
  std::vector<double> data;

  Tensor() = default;
  explicit Tensor(Shape s, double fill = 0.0);
  Tensor(Shape s, std::vector<double> values);

  std::size_t size() const noexcept { return data.size(); }
  std::size_t rank() const noexcept { return shape.size(); }
  double& at(std::size_t i, std::size_t j) { return data[i * shape[1] + j]; }
  double at(std::size_t i, std::size_t j) const { return data[i * shape[1] + j]; }
  std::span<double> row(std::size_t i) { return {data.data() + i * shape[1], shape[1]}; }
  std::span<const double> row(std::size_t i) const {
    return {data.data() + i * shape[1], shape[1]};
  }

  bool operator==(const Tensor&) const = default;
};

// A named trainable tensor with its accumulated gradient.
struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;

  Parameter(std::string n, Tensor v);
  void zero_grad();
};

using ParamPtr = std::shared_ptr<Parameter>;
using ParamList = std::vector<ParamPtr>;

// uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)).
ParamPtr make_uniform(std::string name, Shape shape, std::size_t fan_in, Rng& rng);
ParamPtr make_zeros(std::string name, Shape shape);

}  // namespace rad::nn
