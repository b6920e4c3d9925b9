#pragma once

#include <cstdint>
#include <vector>

#include "rad/nn/tensor.hpp"

namespace rad::nn {

struct AdamOptions {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Adam with bias correction. step() applies the update from the accumulated
// gradients and then zeroes them.
class Adam {
 public:
  Adam(ParamList params, AdamOptions options = {});

  void step();
  void zero_grad();
  std::int64_t steps() const noexcept { return t_; }
  const ParamList& params() const noexcept { return params_; }

 private:
  ParamList params_;
  AdamOptions opt_;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
  std::int64_t t_ = 0;
};

}  // namespace rad::nn
