#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace rad::data {

using RowId = std::int64_t;
using ValueIndex = std::uint32_t;

// Column roles plus per-column vocabularies. Observed values are indexed
// contiguously 0..V_c-1 in first-appearance order; index V_c is the reserved
// "unknown" slot, so embedding tables are sized cardinality(c) = V_c + 1.
class Schema {
 public:
  Schema(std::vector<std::string> feature_columns, std::string label_column,
         std::string timestamp_column);

  std::size_t num_features() const noexcept { return columns_.size(); }
  const std::string& feature_name(std::size_t column) const;
  const std::string& label_column() const noexcept { return label_column_; }
  const std::string& timestamp_column() const noexcept { return timestamp_column_; }
  std::optional<std::size_t> column_index(std::string_view name) const;

  std::uint32_t vocab_size(std::size_t column) const;
  std::uint32_t cardinality(std::size_t column) const { return vocab_size(column) + 1; }
  ValueIndex unknown_index(std::size_t column) const { return vocab_size(column); }
  std::vector<std::uint32_t> cardinalities() const;

  // Returns the index of `value`, appending it to the vocabulary if new.
  ValueIndex intern(std::size_t column, std::string_view value);
  std::optional<ValueIndex> find(std::size_t column, std::string_view value) const;
  // Like find(), but unseen values map to unknown_index(column).
  ValueIndex encode(std::size_t column, std::string_view value) const;
  const std::string& decode(std::size_t column, ValueIndex index) const;

  bool operator==(const Schema& other) const;

 private:
  struct Column {
    std::string name;
    std::vector<std::string> values;
    std::unordered_map<std::string, ValueIndex> lookup;
  };
  const Column& column(std::size_t c) const;

  std::vector<Column> columns_;
  std::string label_column_;
  std::string timestamp_column_;
};

struct Sample {
  RowId row_id = 0;
  std::vector<ValueIndex> features;
  std::uint8_t label = 0;
  std::int64_t timestamp = 0;

  bool operator==(const Sample&) const = default;
};

// Immutable ordered collection of samples sharing one schema.
class Dataset {
 public:
  Dataset() = default;
  // Validates every sample against the schema (feature arity, value range,
  // binary label) and row_id uniqueness.
  Dataset(std::shared_ptr<const Schema> schema, std::vector<Sample> samples);

  const Schema& schema() const { return *schema_; }
  const std::shared_ptr<const Schema>& schema_ptr() const noexcept { return schema_; }
  std::span<const Sample> samples() const noexcept { return samples_; }
  const Sample& operator[](std::size_t i) const { return samples_[i]; }
  std::size_t size() const noexcept { return samples_.size(); }
  bool empty() const noexcept { return samples_.empty(); }

  auto begin() const noexcept { return samples_.begin(); }
  auto end() const noexcept { return samples_.end(); }

  // Samples whose index is listed, in the given order, sharing this schema.
  Dataset subset(std::span<const std::size_t> positions) const;

  std::optional<std::int64_t> min_timestamp() const;
  std::optional<std::int64_t> max_timestamp() const;

  bool operator==(const Dataset& other) const;

 private:
  std::shared_ptr<const Schema> schema_;
  std::vector<Sample> samples_;
};

}  // namespace rad::data
