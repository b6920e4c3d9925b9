#pragma once

// Finite-difference cases for every differentiable op. Each case builds a
// scalar from freshly drawn parameters; its analytic gradient (tape) is
// compared with the test-side central difference.

#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "rad/nn/ops.hpp"
#include "rad/nn/tape.hpp"

namespace rad::gradcheck {

using nn::ParamList;
using nn::Shape;
using nn::Tape;
using nn::Var;

struct Case {
  std::string op;
  std::vector<Shape> shapes;  // one parameter per shape
  std::function<Var(Tape&, const ParamList&)> build;
  // Keep inputs away from kinks (relu) by this margin.
  double min_abs = 0.0;
};

inline Var leaf(Tape& t, const nn::ParamPtr& p) { return t.leaf(*p); }

inline std::vector<Var> rows_of(Tape& t, const ParamList& ps, std::size_t from) {
  std::vector<Var> out;
  for (std::size_t i = from; i < ps.size(); ++i) out.push_back(leaf(t, ps[i]));
  return out;
}

inline std::vector<Case> all_cases() {
  std::vector<Case> cases;
  cases.push_back({"embedding_lookup", {{5, 3}},
                   [](Tape& t, const ParamList& ps) {
                     return nn::add(nn::embedding_lookup(t, *ps[0], 2),
                                    nn::embedding_lookup(t, *ps[0], 4));
                   }});
  cases.push_back({"linear", {{3, 4}, {3}, {4}},
                   [](Tape& t, const ParamList& ps) {
                     return nn::linear(leaf(t, ps[2]), *ps[0], *ps[1]);
                   }});
  cases.push_back({"sigmoid", {{6}},
                   [](Tape& t, const ParamList& ps) { return nn::sigmoid(leaf(t, ps[0])); }});
  cases.push_back({"relu", {{6}},
                   [](Tape& t, const ParamList& ps) { return nn::relu(leaf(t, ps[0])); },
                   1e-3});
  cases.push_back({"add", {{4}, {4}},
                   [](Tape& t, const ParamList& ps) {
                     return nn::add(leaf(t, ps[0]), leaf(t, ps[1]));
                   }});
  cases.push_back({"scale", {{4}},
                   [](Tape& t, const ParamList& ps) { return nn::scale(leaf(t, ps[0]), -1.7); }});
  cases.push_back({"sum", {{5}},
                   [](Tape& t, const ParamList& ps) { return nn::sum(leaf(t, ps[0])); }});
  cases.push_back({"mean", {{4}, {4}, {4}},
                   [](Tape& t, const ParamList& ps) { return nn::mean(rows_of(t, ps, 0)); }});
  cases.push_back({"concat", {{2}, {3}},
                   [](Tape& t, const ParamList& ps) { return nn::concat(rows_of(t, ps, 0)); }});
  cases.push_back({"stack", {{3}, {3}},
                   [](Tape& t, const ParamList& ps) {
                     return nn::sum(nn::stack(rows_of(t, ps, 0)));
                   }});
  cases.push_back({"attention_scores", {{3, 3}, {3}, {3}, {3}},
                   [](Tape& t, const ParamList& ps) {
                     return nn::attention_scores(leaf(t, ps[1]), nn::stack(rows_of(t, ps, 2)),
                                                 *ps[0]);
                   }});
  cases.push_back({"softmax", {{5}},
                   [](Tape& t, const ParamList& ps) { return nn::softmax(leaf(t, ps[0])); }});
  cases.push_back({"weighted_sum", {{3}, {4}, {4}, {4}},
                   [](Tape& t, const ParamList& ps) {
                     return nn::weighted_sum(leaf(t, ps[0]), nn::stack(rows_of(t, ps, 1)));
                   }});
  cases.push_back({"attention_pool", {{4, 4}, {4}, {4}, {4}, {4}},
                   [](Tape& t, const ParamList& ps) {
                     const auto out =
                         nn::attention_pool(leaf(t, ps[1]), nn::stack(rows_of(t, ps, 2)), *ps[0]);
                     const Var both[] = {out.pooled, out.weights};
                     return nn::concat(both);
                   }});
  cases.push_back({"fm_second_order/vector", {{3}, {3}, {3}, {3}},
                   [](Tape& t, const ParamList& ps) {
                     return nn::fm_second_order(nn::stack(rows_of(t, ps, 0)),
                                                nn::FmReduce::kVector);
                   }});
  cases.push_back({"fm_second_order/scalar", {{4}, {4}, {4}},
                   [](Tape& t, const ParamList& ps) {
                     return nn::fm_second_order(nn::stack(rows_of(t, ps, 0)),
                                                nn::FmReduce::kScalar);
                   }});
  cases.push_back({"bce/positive", {{3}},
                   [](Tape& t, const ParamList& ps) {
                     return nn::bce(nn::sigmoid(nn::sum(leaf(t, ps[0]))), 1.0);
                   }});
  cases.push_back({"bce/negative", {{3}},
                   [](Tape& t, const ParamList& ps) {
                     return nn::bce(nn::sigmoid(nn::sum(leaf(t, ps[0]))), 0.0);
                   }});
  cases.push_back({"mse", {{5}, {5}},
                   [](Tape& t, const ParamList& ps) {
                     return nn::mse(leaf(t, ps[0]), leaf(t, ps[1]));
                   }});
  return cases;
}

// Max |analytic - numeric| for one case with parameters drawn from `seed`.
// The op output is reduced to a scalar by a fixed random projection.
inline double run_case(const Case& c, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  ParamList ps;
  for (std::size_t i = 0; i < c.shapes.size(); ++i) {
    nn::Tensor value(c.shapes[i]);
    for (auto& x : value.data) {
      do {
        x = unit(rng);
      } while (std::abs(x) < c.min_abs);
    }
    ps.push_back(std::make_shared<nn::Parameter>("p" + std::to_string(i), value));
  }
  Tape tape;
  // Projection weights, drawn once the output size is known.
  std::vector<double> proj;
  auto scalar = [&]() -> Var {
    tape.clear();
    const auto out = c.build(tape, ps);
    if (proj.empty()) {
      for (std::size_t i = 0; i < out.size(); ++i) proj.push_back(unit(rng));
    }
    // <out, proj> with a hand-written backward, so the reduction does not
    // depend on any op being checked.
    std::vector<double> dot{0.0};
    for (std::size_t i = 0; i < out.size(); ++i) dot[0] += out.value()[i] * proj[i];
    const auto out_id = out.id();
    return tape.record({1}, dot, [out_id, w = proj](Tape& t, std::uint32_t self) {
      const double g = t.grad(self)[0];
      auto dst = t.grad(out_id);
      for (std::size_t i = 0; i < w.size(); ++i) dst[i] += g * w[i];
    });
  };

  for (auto& p : ps) p->zero_grad();
  tape.backward(scalar());
  double worst = 0.0;
  for (auto& p : ps) {
    const auto analytic = p->grad.data;
    const auto numeric =
        oracle::central_difference([&] { return scalar().item(); }, p->value.data);
    for (std::size_t i = 0; i < numeric.size(); ++i) {
      worst = std::max(worst, std::abs(analytic[i] - numeric[i]));
    }
  }
  return worst;
}

}  // namespace rad::gradcheck
