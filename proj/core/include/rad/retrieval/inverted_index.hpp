#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <vector>

#include "rad/data/dataset.hpp"

namespace rad::retrieval {

using data::RowId;
using data::ValueIndex;

struct ScoredRow {
  RowId row_id = 0;
  double score = 0.0;

  bool operator==(const ScoredRow&) const = default;
};

// Ordered by (score desc, row_id asc); at most K entries.
using RetrievedSet = std::vector<ScoredRow>;

// Postings over every (column, value) pair of a dataset, scored with the
// IDF-weighted exact-match rank score:
//
//   score(q, d) = sum_j idf(j, q_j) * [q_j == d_j]
//   idf(j, v)   = ln((N - N(j,v) + 0.5) / (N(j,v) + 0.5))
//
// Negative IDF is kept as is. Immutable after construction; retrieve_topk is
// safe to call concurrently.
class InvertedIndex {
 public:
  explicit InvertedIndex(std::shared_ptr<const data::Dataset> source);

  InvertedIndex(const InvertedIndex&) = delete;
  InvertedIndex& operator=(const InvertedIndex&) = delete;

  std::size_t doc_count() const noexcept { return row_ids_.size(); }
  std::size_t num_columns() const noexcept { return postings_.size(); }
  const data::Dataset& source() const noexcept { return *source_; }
  const std::shared_ptr<const data::Dataset>& source_ptr() const noexcept { return source_; }

  // N(a): rows holding `value` in `column` (0 for values never indexed).
  std::size_t value_count(std::size_t column, ValueIndex value) const;
  // Row ids holding `value` in `column`, ascending.
  std::vector<RowId> postings(std::size_t column, ValueIndex value) const;

  // Throws IndexEmptyError when doc_count() == 0.
  double idf(std::size_t column, ValueIndex value) const;

  // Throws LookupError for a row_id not in the indexed dataset.
  double rank_score(std::span<const ValueIndex> query, RowId doc) const;

  // Top-k candidates among rows sharing at least one field value with the
  // query, skipping `exclude`. Increments query_count() once per call.
  RetrievedSet retrieve_topk(std::span<const ValueIndex> query, std::size_t k,
                             std::span<const RowId> exclude = {}) const;

  // Indexed sample for a row id; throws LookupError if absent.
  const data::Sample& row(RowId id) const;

  std::uint64_t query_count() const noexcept { return queries_.load(std::memory_order_relaxed); }
  void reset_query_count() const noexcept { queries_.store(0, std::memory_order_relaxed); }

  // "RADI" file: magic, version byte, doc_count, then per column the
  // postings of every value as row ids.
  void save(const std::filesystem::path& path) const;
  // Restores an index over `source`, which must be the dataset the file was
  // built from (checked against doc_count and postings).
  static std::unique_ptr<InvertedIndex> load(const std::filesystem::path& path,
                                             std::shared_ptr<const data::Dataset> source);

 private:
  struct Postings {
    std::vector<std::uint32_t> ordinals;  // ascending == ascending row_id
  };

  std::size_t ordinal_of(RowId id) const;
  const Postings* find(std::size_t column, ValueIndex value) const;

  std::shared_ptr<const data::Dataset> source_;
  // Ordinal = rank of a row by row_id; postings and scoring use ordinals.
  std::vector<RowId> row_ids_;
  std::vector<std::uint32_t> positions_;  // ordinal -> position in source
  std::vector<std::vector<Postings>> postings_;  // [column][value]
  mutable std::atomic<std::uint64_t> queries_{0};
};

// Queries issued against every index in this process.
std::uint64_t total_query_count() noexcept;

}  // namespace rad::retrieval
