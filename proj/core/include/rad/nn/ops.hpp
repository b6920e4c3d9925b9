#pragma once

#include <cstdint>
#include <span>

#include "rad/nn/tape.hpp"
#include "rad/nn/tensor.hpp"

namespace rad::nn {

// Row `index` of a [V x E] table. Backward touches that row only.
Var embedding_lookup(Tape& tape, Parameter& table, std::uint32_t index);

// weight [m x n] * x [n] + bias [m].
Var linear(Var x, Parameter& weight, Parameter& bias);

Var sigmoid(Var x);
Var relu(Var x);

// Scalar sigmoid with no overflow for any finite input.
double stable_sigmoid(double x) noexcept;

Var add(Var a, Var b);
Var scale(Var x, double factor);
Var sum(Var x);
// Elementwise mean of same-shaped inputs.
Var mean(std::span<const Var> xs);
// Flat concatenation into a vector.
Var concat(std::span<const Var> xs);
// n vectors of length E into an [n x E] matrix.
Var stack(std::span<const Var> rows);

// Bilinear scores s_k = keys[k]^T W query for keys [K x E], query [E].
Var attention_scores(Var query, Var keys, Parameter& weight);
// Max-subtracted softmax over a vector.
Var softmax(Var scores);
// sum_k weights[k] * rows[k] for weights [K], rows [K x E].
Var weighted_sum(Var weights, Var rows);

struct AttentionOutput {
  Var weights;  // [K], softmax over bilinear scores
  Var pooled;   // [E]
};

// alpha = softmax(keys W query), pooled = sum_k alpha_k keys[k].
// Throws EmptyRetrievalError when keys has no rows.
AttentionOutput attention_pool(Var query, Var keys, Parameter& weight);

enum class FmReduce { kVector, kScalar };

// Pairwise interaction sum_{i<j} v_i * v_j over the rows of fields [F' x E],
// via 0.5 * ((sum v)^2 - sum v^2). kVector keeps the E components; kScalar
// sums them into <v_i, v_j>. Throws ArityError for F' < 2.
Var fm_second_order(Var fields, FmReduce reduce = FmReduce::kScalar);

inline constexpr double kProbabilityClamp = 1e-7;

// -(y ln p + (1-y) ln(1-p)) with p clamped to [1e-7, 1-1e-7].
Var bce(Var probability, double label);
double bce_value(double probability, double label) noexcept;
// mean((a - b)^2); ShapeError on mismatch.
Var mse(Var a, Var b);

}  // namespace rad::nn
