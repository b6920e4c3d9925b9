#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "rad/data/dataset.hpp"
#include "rad/models/layers.hpp"
#include "rad/nn/checkpoint.hpp"
#include "rad/retrieval/inverted_index.hpp"

namespace rad::models {

using data::RowId;
using data::Sample;

struct ModelDims {
  std::vector<std::uint32_t> cardinalities;
  std::size_t embed_dim = 16;
  std::size_t hidden = 64;
  std::size_t k = 10;
};

// Architecture hyperparameters recorded next to a checkpoint of `kind`.
nn::Manifest architecture_manifest(std::string_view kind, const ModelDims& dims);

struct ForwardOptions {
  // Drop the sample's own row from its retrieved set. Required whenever the
  // sample also lives in the search space (pretraining, distillation).
  bool exclude_self = false;
};

// Anything that maps a sample to a probability through a single logit.
class Model {
 public:
  virtual ~Model() = default;

  virtual std::string_view kind() const = 0;
  virtual Var logit(Tape& tape, const Sample& sample, const ForwardOptions& opts) const = 0;
  virtual ParamList parameters() const = 0;
  // Parameters the optimizer may update; frozen sub-networks are excluded.
  virtual ParamList trainable_parameters() const { return parameters(); }

  // sigmoid(logit) clamped into [1e-7, 1 - 1e-7].
  double predict(const Sample& sample, const ForwardOptions& opts = {}) const;
};

// Maps a sample to an E-dimensional logit vector (w_R or w_r).
class VectorModule {
 public:
  virtual ~VectorModule() = default;
  virtual Var forward(Tape& tape, const Sample& sample, const ForwardOptions& opts) const = 0;
  virtual std::size_t output_dim() const = 0;
  virtual ParamList parameters() const = 0;
};

// Embeddings + 2 relu hidden layers -> scalar logit w_o.
class OriginalModel final : public Model {
 public:
  OriginalModel(const ModelDims& dims, Rng& rng, const std::string& prefix = "original");

  std::string_view kind() const override { return "original"; }
  Var logit(Tape& tape, const Sample& sample, const ForwardOptions& opts) const override;
  ParamList parameters() const override;

  const FieldEmbeddings& embeddings() const noexcept { return embeddings_; }
  Mlp& mlp() noexcept { return mlp_; }

 private:
  FieldEmbeddings embeddings_;
  Mlp mlp_;
};

// Retrieval + attention pooling. Retrieved rows are encoded as the mean of
// their field embeddings plus an embedding of their label; the query is the
// mean of its field embeddings. Output w_R = sum_k alpha_k enc(row_k), or the
// zero vector when nothing is retrieved.
class RelevanceNetwork {
 public:
  RelevanceNetwork(const ModelDims& dims, std::shared_ptr<const retrieval::InvertedIndex> index,
                   Rng& rng, const std::string& prefix = "relevance");

  Var encode_query(Tape& tape, std::span<const ValueIndex> features) const;
  Var encode_row(Tape& tape, const Sample& row) const;
  Var forward(Tape& tape, std::span<const ValueIndex> query,
              std::span<const RowId> exclude = {}) const;

  std::size_t dim() const noexcept { return embeddings_.dim(); }
  std::size_t k() const noexcept { return k_; }
  void set_k(std::size_t k) noexcept { k_ = k; }

  // The search space may be swapped (e.g. to the fixed shifting partition)
  // without touching parameters. A null index behaves as an empty one.
  void set_search_space(std::shared_ptr<const retrieval::InvertedIndex> index);
  const std::shared_ptr<const retrieval::InvertedIndex>& search_space() const noexcept {
    return index_;
  }

  const FieldEmbeddings& embeddings() const noexcept { return embeddings_; }
  nn::Parameter& attention() const noexcept { return *attention_; }
  ParamList parameters() const;

 private:
  FieldEmbeddings embeddings_;
  ParamPtr label_embedding_;  // [2 x E]
  ParamPtr attention_;        // [E x E]
  std::size_t k_;
  std::shared_ptr<const retrieval::InvertedIndex> index_;
};

// R(x): the relevance network optionally followed by two relu layers of
// width E. This is the unit transferred into the frameworks and distilled.
class RelevanceEncoder final : public VectorModule {
 public:
  RelevanceEncoder(std::shared_ptr<RelevanceNetwork> network, bool post_layers, Rng& rng,
                   const std::string& prefix);

  Var forward(Tape& tape, const Sample& sample, const ForwardOptions& opts) const override;
  std::size_t output_dim() const override { return network_->dim(); }
  ParamList parameters() const override;

  RelevanceNetwork& network() const noexcept { return *network_; }
  bool has_post_layers() const noexcept { return post_.has_value(); }
  // Zeroes both post-attention layers (no-op without them).
  void zero_post_layers();

 private:
  std::shared_ptr<RelevanceNetwork> network_;
  std::optional<Mlp> post_;
};

// Teacher for the retrieval framework: FM over the query's field embeddings
// plus w_R as an extra field, then a linear head over
// [fm_vector ; w_R ; mean query embedding].
class TeacherRetrieval final : public Model {
 public:
  TeacherRetrieval(const ModelDims& dims, std::shared_ptr<const retrieval::InvertedIndex> index,
                   Rng& rng, const std::string& prefix = "teacher_retrieval");

  std::string_view kind() const override { return "teacher_retrieval"; }
  Var logit(Tape& tape, const Sample& sample, const ForwardOptions& opts) const override;
  ParamList parameters() const override;

  const std::shared_ptr<RelevanceEncoder>& relevance() const noexcept { return relevance_; }
  void zero_head();

 private:
  std::shared_ptr<RelevanceEncoder> relevance_;
  ParamPtr head_w_;
  ParamPtr head_b_;
};

// Teacher for distillation: no cross (FM) layer; two relu layers after the
// attention pooling produce R(x), followed by a linear head over
// [R(x) ; mean query embedding].
class TeacherDistill final : public Model {
 public:
  TeacherDistill(const ModelDims& dims, std::shared_ptr<const retrieval::InvertedIndex> index,
                 Rng& rng, const std::string& prefix = "teacher_distill");

  std::string_view kind() const override { return "teacher_distill"; }
  Var logit(Tape& tape, const Sample& sample, const ForwardOptions& opts) const override;
  ParamList parameters() const override;

  const std::shared_ptr<RelevanceEncoder>& relevance() const noexcept { return relevance_; }
  void zero_head();

 private:
  std::shared_ptr<RelevanceEncoder> relevance_;
  ParamPtr head_w_;
  ParamPtr head_b_;
};

// The query -> retrieval -> attention -> two-layer sub-network of a distill
// teacher. Shares parameters with the teacher (no copy).
std::shared_ptr<RelevanceEncoder> extract_relevance(const TeacherDistill& teacher);

// r(x): own embeddings + MLP (2 relu hidden layers) -> E-dim logit vector.
class SearchDistillModule final : public VectorModule {
 public:
  SearchDistillModule(const ModelDims& dims, Rng& rng, const std::string& prefix = "student");

  Var forward(Tape& tape, const Sample& sample, const ForwardOptions& opts) const override;
  std::size_t output_dim() const override { return mlp_.output_dim(); }
  ParamList parameters() const override;

  const FieldEmbeddings& embeddings() const noexcept { return embeddings_; }

 private:
  FieldEmbeddings embeddings_;
  Mlp mlp_;
};

// Shared aggregation: MLP over [w_o ; mean query embedding (original's
// tables) ; side vector] with one relu hidden layer, plus a learned scalar
// skip of w_o (initialised to 1) so the original logit reaches the output.
class FrameworkBase : public Model {
 public:
  Var logit(Tape& tape, const Sample& sample, const ForwardOptions& opts) const override;
  ParamList parameters() const override;
  ParamList trainable_parameters() const override;

  OriginalModel& original() const noexcept { return *original_; }
  const std::shared_ptr<VectorModule>& side() const noexcept { return side_; }

  bool side_frozen() const noexcept { return freeze_side_; }
  void set_side_frozen(bool frozen) noexcept { freeze_side_ = frozen; }
  // Ablation: replace the side vector by zeros.
  void set_side_disabled(bool disabled) noexcept { side_disabled_ = disabled; }
  // Sets the aggregation output layer and the skip to zero.
  void zero_head();

 protected:
  FrameworkBase(const ModelDims& dims, std::shared_ptr<OriginalModel> original,
                std::shared_ptr<VectorModule> side, Rng& rng, const std::string& prefix);

 private:
  std::shared_ptr<OriginalModel> original_;
  std::shared_ptr<VectorModule> side_;
  ParamList head_parameters() const;

  Mlp aggregate_;
  ParamPtr skip_w_;
  ParamPtr skip_b_;
  bool freeze_side_ = false;
  bool side_disabled_ = false;
};

class RetrievalFramework final : public FrameworkBase {
 public:
  RetrievalFramework(const ModelDims& dims, std::shared_ptr<OriginalModel> original,
                     std::shared_ptr<RelevanceEncoder> relevance, Rng& rng,
                     const std::string& prefix = "retrieval_framework");
  std::string_view kind() const override { return "retrieval_framework"; }
  RelevanceEncoder& relevance() const;
};

class DistillFramework final : public FrameworkBase {
 public:
  DistillFramework(const ModelDims& dims, std::shared_ptr<OriginalModel> original,
                   std::shared_ptr<SearchDistillModule> student, Rng& rng,
                   const std::string& prefix = "distill_framework");
  std::string_view kind() const override { return "distill_framework"; }
};

}  // namespace rad::models
