#pragma once

#include <span>
#include <string>
#include <vector>

#include "rad/data/dataset.hpp"
#include "rad/nn/tape.hpp"
#include "rad/nn/tensor.hpp"

namespace rad::models {

using data::ValueIndex;
using nn::ParamList;
using nn::ParamPtr;
using nn::Rng;
using nn::Tape;
using nn::Var;

// One [cardinality x dim] table per feature column.
class FieldEmbeddings {
 public:
  FieldEmbeddings(const std::string& prefix, std::span<const std::uint32_t> cardinalities,
                  std::size_t dim, Rng& rng);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t num_fields() const noexcept { return tables_.size(); }
  std::vector<std::uint32_t> cardinalities() const;

  std::vector<Var> lookup(Tape& tape, std::span<const ValueIndex> features) const;
  Var mean(Tape& tape, std::span<const ValueIndex> features) const;
  Var concat(Tape& tape, std::span<const ValueIndex> features) const;

  const ParamList& parameters() const noexcept { return tables_; }

 private:
  std::size_t dim_;
  ParamList tables_;
};

// Stack of dense layers; relu between layers, and after the last one only
// when final_relu is set.
class Mlp {
 public:
  Mlp(const std::string& prefix, std::vector<std::size_t> sizes, bool final_relu, Rng& rng);

  Var forward(Var x) const;
  std::size_t input_dim() const noexcept { return sizes_.front(); }
  std::size_t output_dim() const noexcept { return sizes_.back(); }
  ParamList parameters() const;
  // Sets every weight and bias of the given layer (0-based) to zero.
  void zero_layer(std::size_t layer);

 private:
  std::vector<std::size_t> sizes_;
  bool final_relu_;
  std::vector<std::pair<ParamPtr, ParamPtr>> layers_;
};

ParamList join_params(std::initializer_list<ParamList> groups);

}  // namespace rad::models
