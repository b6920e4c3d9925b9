#include "rad/retrieval/inverted_index.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "../binary_io.hpp"
#include "rad/error.hpp"

namespace rad::retrieval {

namespace {

constexpr std::uint8_t kIndexVersion = 1;

std::atomic<std::uint64_t> g_total_queries{0};

// Per-thread accumulator reused across queries. Slots are valid only when
// their stamp equals the current epoch, so nothing is cleared between calls.
struct Scratch {
  std::vector<double> score;
  std::vector<std::uint32_t> stamp;
  std::vector<std::uint32_t> touched;
  std::uint32_t epoch = 0;

  void begin(std::size_t n) {
    if (score.size() < n) {
      score.resize(n, 0.0);
      stamp.resize(n, 0);
    }
    touched.clear();
    if (++epoch == 0) {
      std::ranges::fill(stamp, 0u);
      epoch = 1;
    }
  }
};

thread_local Scratch scratch;

}  // namespace

std::uint64_t total_query_count() noexcept {
  return g_total_queries.load(std::memory_order_relaxed);
}

InvertedIndex::InvertedIndex(std::shared_ptr<const data::Dataset> source)
    : source_(std::move(source)) {
  if (!source_) throw LookupError("index requires a source dataset");
  const auto& ds = *source_;
  const auto n = ds.size();

  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0u);
  std::ranges::sort(order, {}, [&](std::uint32_t p) { return ds[p].row_id; });
  row_ids_.reserve(n);
  for (auto p : order) row_ids_.push_back(ds[p].row_id);
  positions_ = std::move(order);

  const auto f = ds.schema().num_features();
  postings_.resize(f);
  for (std::size_t c = 0; c < f; ++c) postings_[c].resize(ds.schema().cardinality(c));
  for (std::uint32_t ord = 0; ord < n; ++ord) {
    const auto& s = ds[positions_[ord]];
    for (std::size_t c = 0; c < f; ++c) postings_[c][s.features[c]].ordinals.push_back(ord);
  }
}

const InvertedIndex::Postings* InvertedIndex::find(std::size_t column, ValueIndex value) const {
  if (column >= postings_.size()) {
    throw LookupError("column " + std::to_string(column) + " not indexed");
  }
  const auto& col = postings_[column];
  if (value >= col.size()) return nullptr;
  return &col[value];
}

std::size_t InvertedIndex::value_count(std::size_t column, ValueIndex value) const {
  const auto* p = find(column, value);
  return p ? p->ordinals.size() : 0;
}

std::vector<RowId> InvertedIndex::postings(std::size_t column, ValueIndex value) const {
  std::vector<RowId> out;
  if (const auto* p = find(column, value)) {
    out.reserve(p->ordinals.size());
    for (auto ord : p->ordinals) out.push_back(row_ids_[ord]);
  }
  return out;
}

double InvertedIndex::idf(std::size_t column, ValueIndex value) const {
  if (doc_count() == 0) throw IndexEmptyError("idf is undefined on an empty index");
  const auto big_n = static_cast<double>(doc_count());
  const auto n_a = static_cast<double>(value_count(column, value));
  return std::log((big_n - n_a + 0.5) / (n_a + 0.5));
}

std::size_t InvertedIndex::ordinal_of(RowId id) const {
  auto it = std::ranges::lower_bound(row_ids_, id);
  if (it == row_ids_.end() || *it != id) {
    throw LookupError("row_id " + std::to_string(id) + " is not in the index");
  }
  return static_cast<std::size_t>(it - row_ids_.begin());
}

const data::Sample& InvertedIndex::row(RowId id) const {
  return (*source_)[positions_[ordinal_of(id)]];
}

double InvertedIndex::rank_score(std::span<const ValueIndex> query, RowId doc) const {
  const auto& d = row(doc);
  if (query.size() != num_columns()) {
    throw ShapeError("query has " + std::to_string(query.size()) + " fields, index has " +
                     std::to_string(num_columns()));
  }
  double score = 0.0;
  for (std::size_t c = 0; c < query.size(); ++c) {
    if (query[c] == d.features[c]) score += idf(c, query[c]);
  }
  return score;
}

RetrievedSet InvertedIndex::retrieve_topk(std::span<const ValueIndex> query, std::size_t k,
                                          std::span<const RowId> exclude) const {
  queries_.fetch_add(1, std::memory_order_relaxed);
  g_total_queries.fetch_add(1, std::memory_order_relaxed);
  if (query.size() != num_columns()) {
    throw ShapeError("query has " + std::to_string(query.size()) + " fields, index has " +
                     std::to_string(num_columns()));
  }
  if (k == 0 || doc_count() == 0) return {};

  auto& acc = scratch;
  acc.begin(doc_count());
  for (std::size_t c = 0; c < query.size(); ++c) {
    const auto* p = find(c, query[c]);
    if (p == nullptr || p->ordinals.empty()) continue;
    const double w = idf(c, query[c]);
    for (auto ord : p->ordinals) {
      if (acc.stamp[ord] != acc.epoch) {
        acc.stamp[ord] = acc.epoch;
        acc.score[ord] = 0.0;
        acc.touched.push_back(ord);
      }
      acc.score[ord] += w;
    }
  }

  struct Candidate {
    double score;
    std::uint32_t ord;
  };
  std::vector<Candidate> cands;
  cands.reserve(acc.touched.size());
  for (auto ord : acc.touched) {
    const auto id = row_ids_[ord];
    if (std::ranges::find(exclude, id) != exclude.end()) continue;
    cands.push_back({acc.score[ord], ord});
  }
  const auto better = [](const Candidate& a, const Candidate& b) {
    return a.score != b.score ? a.score > b.score : a.ord < b.ord;
  };
  const auto take = std::min(k, cands.size());
  std::partial_sort(cands.begin(), cands.begin() + static_cast<std::ptrdiff_t>(take), cands.end(),
                    better);

  RetrievedSet out;
  out.reserve(take);
  for (std::size_t i = 0; i < take; ++i) out.push_back({row_ids_[cands[i].ord], cands[i].score});
  return out;
}

void InvertedIndex::save(const std::filesystem::path& path) const {
  io::BinaryWriter w(path);
  w.magic("RADI", kIndexVersion);
  w.pod(static_cast<std::uint64_t>(doc_count()));
  w.pod(static_cast<std::uint32_t>(postings_.size()));
  for (std::size_t c = 0; c < postings_.size(); ++c) {
    w.pod(static_cast<std::uint32_t>(postings_[c].size()));
    for (std::size_t v = 0; v < postings_[c].size(); ++v) {
      const auto ids = postings(c, static_cast<ValueIndex>(v));
      w.pod(static_cast<std::uint64_t>(ids.size()));
      w.array(std::span<const RowId>(ids));
    }
  }
  w.finish();
}

std::unique_ptr<InvertedIndex> InvertedIndex::load(const std::filesystem::path& path,
                                                   std::shared_ptr<const data::Dataset> source) {
  io::BinaryReader r(path);
  if (const auto version = r.magic("RADI"); version != kIndexVersion) {
    throw FormatError("unsupported RADI version " + std::to_string(version));
  }
  auto index = std::make_unique<InvertedIndex>(std::move(source));
  const auto n = r.pod<std::uint64_t>();
  if (n != index->doc_count()) {
    throw FormatError("index file covers " + std::to_string(n) + " rows, dataset has " +
                      std::to_string(index->doc_count()));
  }
  const auto f = r.pod<std::uint32_t>();
  if (f != index->num_columns()) throw FormatError("index file column count mismatch");
  for (std::uint32_t c = 0; c < f; ++c) {
    const auto values = r.pod<std::uint32_t>();
    if (values != index->postings_[c].size()) {
      throw FormatError("index file vocabulary mismatch in column " + std::to_string(c));
    }
    for (std::uint32_t v = 0; v < values; ++v) {
      const auto count = r.pod<std::uint64_t>();
      const auto ids = r.array<RowId>(count);
      if (ids != index->postings(c, v)) {
        throw FormatError("index file postings disagree with dataset at column " +
                          std::to_string(c) + " value " + std::to_string(v));
      }
    }
  }
  return index;
}

}  // namespace rad::retrieval
