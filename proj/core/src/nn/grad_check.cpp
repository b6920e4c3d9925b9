#include "rad/nn/grad_check.hpp"

#include <algorithm>
#include <cmath>

namespace rad::nn {

double grad_check(const ScalarFn& f, std::span<const ParamPtr> inputs, double h) {
  for (const auto& p : inputs) p->zero_grad();
  Tape tape;
  tape.backward(f(tape));
  std::vector<std::vector<double>> analytic;
  analytic.reserve(inputs.size());
  for (const auto& p : inputs) analytic.push_back(p->grad.data);

  auto evaluate = [&] {
    tape.clear();
    return f(tape).item();
  };

  double worst = 0.0;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    auto& w = inputs[k]->value.data;
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double saved = w[i];
      w[i] = saved + h;
      const double up = evaluate();
      w[i] = saved - h;
      const double down = evaluate();
      w[i] = saved;
      const double numeric = (up - down) / (2.0 * h);
      worst = std::max(worst, std::abs(numeric - analytic[k][i]));
    }
  }
  for (const auto& p : inputs) p->zero_grad();
  return worst;
}

}  // namespace rad::nn
