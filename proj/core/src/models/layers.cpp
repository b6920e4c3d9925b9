#include "rad/models/layers.hpp"

#include <algorithm>

#include "rad/error.hpp"
#include "rad/nn/ops.hpp"

namespace rad::models {

FieldEmbeddings::FieldEmbeddings(const std::string& prefix,
                                 std::span<const std::uint32_t> cardinalities, std::size_t dim,
                                 Rng& rng)
    : dim_(dim) {
  if (cardinalities.empty()) throw ShapeError("embeddings need at least one field");
  for (std::size_t c = 0; c < cardinalities.size(); ++c) {
    tables_.push_back(nn::make_uniform(prefix + ".emb" + std::to_string(c),
                                       {cardinalities[c], dim}, dim, rng));
  }
}

std::vector<std::uint32_t> FieldEmbeddings::cardinalities() const {
  std::vector<std::uint32_t> out;
  for (const auto& t : tables_) out.push_back(static_cast<std::uint32_t>(t->value.shape[0]));
  return out;
}

std::vector<Var> FieldEmbeddings::lookup(Tape& tape, std::span<const ValueIndex> features) const {
  if (features.size() != tables_.size()) {
    throw ShapeError("expected " + std::to_string(tables_.size()) + " fields, got " +
                     std::to_string(features.size()));
  }
  std::vector<Var> out;
  out.reserve(features.size());
  for (std::size_t c = 0; c < features.size(); ++c) {
    out.push_back(nn::embedding_lookup(tape, *tables_[c], features[c]));
  }
  return out;
}

Var FieldEmbeddings::mean(Tape& tape, std::span<const ValueIndex> features) const {
  const auto fields = lookup(tape, features);
  return nn::mean(fields);
}

Var FieldEmbeddings::concat(Tape& tape, std::span<const ValueIndex> features) const {
  const auto fields = lookup(tape, features);
  return nn::concat(fields);
}

Mlp::Mlp(const std::string& prefix, std::vector<std::size_t> sizes, bool final_relu, Rng& rng)
    : sizes_(std::move(sizes)), final_relu_(final_relu) {
  if (sizes_.size() < 2) throw ShapeError("an MLP needs input and output sizes");
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    const auto in = sizes_[l];
    const auto out = sizes_[l + 1];
    const auto name = prefix + ".l" + std::to_string(l);
    layers_.emplace_back(nn::make_uniform(name + ".w", {out, in}, in, rng),
                         nn::make_uniform(name + ".b", {out}, in, rng));
  }
}

Var Mlp::forward(Var x) const {
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    x = nn::linear(x, *layers_[l].first, *layers_[l].second);
    if (l + 1 < layers_.size() || final_relu_) x = nn::relu(x);
  }
  return x;
}

ParamList Mlp::parameters() const {
  ParamList out;
  for (const auto& [w, b] : layers_) {
    out.push_back(w);
    out.push_back(b);
  }
  return out;
}

void Mlp::zero_layer(std::size_t layer) {
  auto& [w, b] = layers_.at(layer);
  std::ranges::fill(w->value.data, 0.0);
  std::ranges::fill(b->value.data, 0.0);
}

ParamList join_params(std::initializer_list<ParamList> groups) {
  ParamList out;
  for (const auto& g : groups) out.insert(out.end(), g.begin(), g.end());
  return out;
}

}  // namespace rad::models
