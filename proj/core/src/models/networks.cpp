#include "rad/models/networks.hpp"

#include <algorithm>

#include "rad/error.hpp"
#include "rad/nn/ops.hpp"

namespace rad::models {

nn::Manifest architecture_manifest(std::string_view kind, const ModelDims& dims) {
  std::string cards;
  for (auto c : dims.cardinalities) {
    if (!cards.empty()) cards += ',';
    cards += std::to_string(c);
  }
  return {{"kind", std::string(kind)},
          {"cardinalities", cards},
          {"embed_dim", std::to_string(dims.embed_dim)},
          {"hidden", std::to_string(dims.hidden)},
          {"k", std::to_string(dims.k)}};
}

double Model::predict(const Sample& sample, const ForwardOptions& opts) const {
  thread_local Tape tape;
  tape.clear();
  const double p = nn::stable_sigmoid(logit(tape, sample, opts).item());
  return std::clamp(p, nn::kProbabilityClamp, 1.0 - nn::kProbabilityClamp);
}

// --- OriginalModel ----------------------------------------------------------

OriginalModel::OriginalModel(const ModelDims& dims, Rng& rng, const std::string& prefix)
    : embeddings_(prefix, dims.cardinalities, dims.embed_dim, rng),
      mlp_(prefix + ".mlp",
           {dims.cardinalities.size() * dims.embed_dim, dims.hidden, dims.hidden, 1}, false, rng) {}

Var OriginalModel::logit(Tape& tape, const Sample& sample, const ForwardOptions&) const {
  return mlp_.forward(embeddings_.concat(tape, sample.features));
}

ParamList OriginalModel::parameters() const {
  return join_params({embeddings_.parameters(), mlp_.parameters()});
}

// --- RelevanceNetwork -------------------------------------------------------

RelevanceNetwork::RelevanceNetwork(const ModelDims& dims,
                                   std::shared_ptr<const retrieval::InvertedIndex> index,
                                   Rng& rng, const std::string& prefix)
    : embeddings_(prefix, dims.cardinalities, dims.embed_dim, rng),
      label_embedding_(nn::make_uniform(prefix + ".label", {2, dims.embed_dim}, dims.embed_dim, rng)),
      attention_(nn::make_uniform(prefix + ".attention", {dims.embed_dim, dims.embed_dim},
                                  dims.embed_dim, rng)),
      k_(dims.k),
      index_(std::move(index)) {}

Var RelevanceNetwork::encode_query(Tape& tape, std::span<const ValueIndex> features) const {
  return embeddings_.mean(tape, features);
}

Var RelevanceNetwork::encode_row(Tape& tape, const Sample& row) const {
  return nn::add(embeddings_.mean(tape, row.features),
                 nn::embedding_lookup(tape, *label_embedding_, row.label));
}

Var RelevanceNetwork::forward(Tape& tape, std::span<const ValueIndex> query,
                              std::span<const RowId> exclude) const {
  retrieval::RetrievedSet hits;
  if (index_ && k_ > 0) hits = index_->retrieve_topk(query, k_, exclude);
  if (hits.empty()) {
    const std::vector<double> zeros(dim(), 0.0);
    return tape.constant({dim()}, zeros);
  }
  std::vector<Var> keys;
  keys.reserve(hits.size());
  for (const auto& h : hits) keys.push_back(encode_row(tape, index_->row(h.row_id)));
  const auto q = encode_query(tape, query);
  return nn::attention_pool(q, nn::stack(keys), *attention_).pooled;
}

void RelevanceNetwork::set_search_space(std::shared_ptr<const retrieval::InvertedIndex> index) {
  index_ = std::move(index);
}

ParamList RelevanceNetwork::parameters() const {
  return join_params({embeddings_.parameters(), {label_embedding_, attention_}});
}

// --- RelevanceEncoder -------------------------------------------------------

RelevanceEncoder::RelevanceEncoder(std::shared_ptr<RelevanceNetwork> network, bool post_layers,
                                   Rng& rng, const std::string& prefix)
    : network_(std::move(network)) {
  if (post_layers) {
    const auto e = network_->dim();
    post_.emplace(prefix + ".post", std::vector<std::size_t>{e, e, e}, true, rng);
  }
}

Var RelevanceEncoder::forward(Tape& tape, const Sample& sample, const ForwardOptions& opts) const {
  const RowId self = sample.row_id;
  const auto exclude = opts.exclude_self ? std::span<const RowId>(&self, 1)
                                         : std::span<const RowId>();
  auto pooled = network_->forward(tape, sample.features, exclude);
  return post_ ? post_->forward(pooled) : pooled;
}

ParamList RelevanceEncoder::parameters() const {
  auto out = network_->parameters();
  if (post_) {
    const auto extra = post_->parameters();
    out.insert(out.end(), extra.begin(), extra.end());
  }
  return out;
}

void RelevanceEncoder::zero_post_layers() {
  if (!post_) return;
  post_->zero_layer(0);
  post_->zero_layer(1);
}

// --- Teachers ---------------------------------------------------------------

TeacherRetrieval::TeacherRetrieval(const ModelDims& dims,
                                   std::shared_ptr<const retrieval::InvertedIndex> index,
                                   Rng& rng, const std::string& prefix)
    : relevance_(std::make_shared<RelevanceEncoder>(
          std::make_shared<RelevanceNetwork>(dims, std::move(index), rng, prefix + ".relevance"),
          false, rng, prefix + ".relevance")),
      head_w_(nn::make_uniform(prefix + ".head.w", {1, 3 * dims.embed_dim}, 3 * dims.embed_dim, rng)),
      head_b_(nn::make_zeros(prefix + ".head.b", {1})) {}

Var TeacherRetrieval::logit(Tape& tape, const Sample& sample, const ForwardOptions& opts) const {
  const auto& net = relevance_->network();
  auto fields = net.embeddings().lookup(tape, sample.features);
  const auto query_mean = nn::mean(fields);
  const auto w_r = relevance_->forward(tape, sample, opts);
  fields.push_back(w_r);
  const auto cross = nn::fm_second_order(nn::stack(fields), nn::FmReduce::kVector);
  const Var parts[] = {cross, w_r, query_mean};
  return nn::linear(nn::concat(parts), *head_w_, *head_b_);
}

ParamList TeacherRetrieval::parameters() const {
  return join_params({relevance_->parameters(), {head_w_, head_b_}});
}

void TeacherRetrieval::zero_head() {
  std::ranges::fill(head_w_->value.data, 0.0);
  std::ranges::fill(head_b_->value.data, 0.0);
}

TeacherDistill::TeacherDistill(const ModelDims& dims,
                               std::shared_ptr<const retrieval::InvertedIndex> index, Rng& rng,
                               const std::string& prefix)
    : relevance_(std::make_shared<RelevanceEncoder>(
          std::make_shared<RelevanceNetwork>(dims, std::move(index), rng, prefix + ".relevance"),
          true, rng, prefix + ".relevance")),
      head_w_(nn::make_uniform(prefix + ".head.w", {1, 2 * dims.embed_dim}, 2 * dims.embed_dim, rng)),
      head_b_(nn::make_zeros(prefix + ".head.b", {1})) {}

Var TeacherDistill::logit(Tape& tape, const Sample& sample, const ForwardOptions& opts) const {
  const auto relevance = relevance_->forward(tape, sample, opts);
  const auto query_mean = relevance_->network().encode_query(tape, sample.features);
  const Var parts[] = {relevance, query_mean};
  return nn::linear(nn::concat(parts), *head_w_, *head_b_);
}

ParamList TeacherDistill::parameters() const {
  return join_params({relevance_->parameters(), {head_w_, head_b_}});
}

void TeacherDistill::zero_head() {
  std::ranges::fill(head_w_->value.data, 0.0);
  std::ranges::fill(head_b_->value.data, 0.0);
}

std::shared_ptr<RelevanceEncoder> extract_relevance(const TeacherDistill& teacher) {
  return teacher.relevance();
}

// --- SearchDistillModule ----------------------------------------------------

SearchDistillModule::SearchDistillModule(const ModelDims& dims, Rng& rng,
                                         const std::string& prefix)
    : embeddings_(prefix, dims.cardinalities, dims.embed_dim, rng),
      mlp_(prefix + ".mlp",
           {dims.cardinalities.size() * dims.embed_dim, dims.hidden, dims.hidden, dims.embed_dim},
           false, rng) {}

Var SearchDistillModule::forward(Tape& tape, const Sample& sample, const ForwardOptions&) const {
  return mlp_.forward(embeddings_.concat(tape, sample.features));
}

ParamList SearchDistillModule::parameters() const {
  return join_params({embeddings_.parameters(), mlp_.parameters()});
}

// --- Frameworks -------------------------------------------------------------

FrameworkBase::FrameworkBase(const ModelDims& dims, std::shared_ptr<OriginalModel> original,
                             std::shared_ptr<VectorModule> side, Rng& rng,
                             const std::string& prefix)
    : original_(std::move(original)),
      side_(std::move(side)),
      aggregate_(prefix + ".aggregate",
                 {1 + dims.embed_dim + side_->output_dim(), dims.hidden, 1}, false, rng),
      skip_w_(std::make_shared<nn::Parameter>(prefix + ".skip.w", nn::Tensor({1, 1}, 1.0))),
      skip_b_(nn::make_zeros(prefix + ".skip.b", {1})) {
  if (side_->output_dim() != dims.embed_dim) {
    throw ShapeError("side module outputs " + std::to_string(side_->output_dim()) +
                     " values, expected " + std::to_string(dims.embed_dim));
  }
}

Var FrameworkBase::logit(Tape& tape, const Sample& sample, const ForwardOptions& opts) const {
  const auto w_o = original_->logit(tape, sample, opts);
  const auto query_mean = original_->embeddings().mean(tape, sample.features);
  Var side;
  if (side_disabled_) {
    const std::vector<double> zeros(side_->output_dim(), 0.0);
    side = tape.constant({side_->output_dim()}, zeros);
  } else {
    side = side_->forward(tape, sample, opts);
  }
  const Var parts[] = {w_o, query_mean, side};
  return nn::add(aggregate_.forward(nn::concat(parts)), nn::linear(w_o, *skip_w_, *skip_b_));
}

ParamList FrameworkBase::head_parameters() const {
  return join_params({aggregate_.parameters(), {skip_w_, skip_b_}});
}

ParamList FrameworkBase::parameters() const {
  return join_params({original_->parameters(), side_->parameters(), head_parameters()});
}

ParamList FrameworkBase::trainable_parameters() const {
  if (freeze_side_) return join_params({original_->parameters(), head_parameters()});
  return parameters();
}

void FrameworkBase::zero_head() {
  aggregate_.zero_layer(1);
  std::ranges::fill(skip_w_->value.data, 0.0);
  std::ranges::fill(skip_b_->value.data, 0.0);
}

RetrievalFramework::RetrievalFramework(const ModelDims& dims,
                                       std::shared_ptr<OriginalModel> original,
                                       std::shared_ptr<RelevanceEncoder> relevance, Rng& rng,
                                       const std::string& prefix)
    : FrameworkBase(dims, std::move(original), std::move(relevance), rng, prefix) {}

RelevanceEncoder& RetrievalFramework::relevance() const {
  return static_cast<RelevanceEncoder&>(*side());
}

DistillFramework::DistillFramework(const ModelDims& dims, std::shared_ptr<OriginalModel> original,
                                   std::shared_ptr<SearchDistillModule> student, Rng& rng,
                                   const std::string& prefix)
    : FrameworkBase(dims, std::move(original), std::move(student), rng, prefix) {}

}  // namespace rad::models
