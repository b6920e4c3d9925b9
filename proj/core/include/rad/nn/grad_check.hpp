#pragma once

#include <functional>
#include <span>

#include "rad/nn/tape.hpp"
#include "rad/nn/tensor.hpp"

namespace rad::nn {

// Builds a scalar on the given tape from the current parameter values.
using ScalarFn = std::function<Var(Tape&)>;

// Max |analytic - numeric| over every element of `inputs`, where numeric is
// the central difference (f(w+h) - f(w-h)) / 2h. Parameter values are
// restored and gradients zeroed on return.
double grad_check(const ScalarFn& f, std::span<const ParamPtr> inputs, double h = 1e-5);

}  // namespace rad::nn
