#include "rad/data/dataset.hpp"

#include <algorithm>
#include <unordered_set>

#include "rad/error.hpp"

namespace rad::data {

namespace {
const std::string kUnknownValue = "<unk>";
}  // namespace

Schema::Schema(std::vector<std::string> feature_columns, std::string label_column,
               std::string timestamp_column)
    : label_column_(std::move(label_column)), timestamp_column_(std::move(timestamp_column)) {
  if (feature_columns.empty()) throw SchemaError("schema needs at least one feature column");
  std::unordered_set<std::string> seen;
  for (auto& name : feature_columns) {
    if (name.empty()) throw SchemaError("empty column name");
    if (!seen.insert(name).second) throw SchemaError("duplicate column '" + name + "'");
    if (name == label_column_ || name == timestamp_column_) {
      throw SchemaError("column '" + name + "' cannot be both a feature and the label/timestamp");
    }
    columns_.push_back(Column{std::move(name), {}, {}});
  }
  if (label_column_.empty() || timestamp_column_.empty()) {
    throw SchemaError("label and timestamp columns must be named");
  }
  if (label_column_ == timestamp_column_) {
    throw SchemaError("label and timestamp columns must differ");
  }
}

const Schema::Column& Schema::column(std::size_t c) const {
  if (c >= columns_.size()) {
    throw LookupError("column " + std::to_string(c) + " out of range (F=" +
                      std::to_string(columns_.size()) + ")");
  }
  return columns_[c];
}

const std::string& Schema::feature_name(std::size_t c) const { return column(c).name; }

std::optional<std::size_t> Schema::column_index(std::string_view name) const {
  for (std::size_t c = 0; c < columns_.size(); ++c) {
    if (columns_[c].name == name) return c;
  }
  return std::nullopt;
}

std::uint32_t Schema::vocab_size(std::size_t c) const {
  return static_cast<std::uint32_t>(column(c).values.size());
}

std::vector<std::uint32_t> Schema::cardinalities() const {
  std::vector<std::uint32_t> out;
  out.reserve(columns_.size());
  for (std::size_t c = 0; c < columns_.size(); ++c) out.push_back(cardinality(c));
  return out;
}

ValueIndex Schema::intern(std::size_t c, std::string_view value) {
  if (c >= columns_.size()) column(c);  // throws
  auto& col = columns_[c];
  std::string key(value);
  if (auto it = col.lookup.find(key); it != col.lookup.end()) return it->second;
  const auto idx = static_cast<ValueIndex>(col.values.size());
  col.values.push_back(key);
  col.lookup.emplace(std::move(key), idx);
  return idx;
}

std::optional<ValueIndex> Schema::find(std::size_t c, std::string_view value) const {
  const auto& col = column(c);
  if (auto it = col.lookup.find(std::string(value)); it != col.lookup.end()) return it->second;
  return std::nullopt;
}

ValueIndex Schema::encode(std::size_t c, std::string_view value) const {
  return find(c, value).value_or(unknown_index(c));
}

const std::string& Schema::decode(std::size_t c, ValueIndex index) const {
  const auto& col = column(c);
  if (index == col.values.size()) return kUnknownValue;
  if (index > col.values.size()) {
    throw LookupError("value index " + std::to_string(index) + " out of range for column '" +
                      col.name + "'");
  }
  return col.values[index];
}

bool Schema::operator==(const Schema& other) const {
  if (label_column_ != other.label_column_ || timestamp_column_ != other.timestamp_column_ ||
      columns_.size() != other.columns_.size()) {
    return false;
  }
  for (std::size_t c = 0; c < columns_.size(); ++c) {
    if (columns_[c].name != other.columns_[c].name ||
        columns_[c].values != other.columns_[c].values) {
      return false;
    }
  }
  return true;
}

Dataset::Dataset(std::shared_ptr<const Schema> schema, std::vector<Sample> samples)
    : schema_(std::move(schema)), samples_(std::move(samples)) {
  if (!schema_) throw SchemaError("dataset requires a schema");
  const auto f = schema_->num_features();
  std::unordered_set<RowId> ids;
  ids.reserve(samples_.size());
  for (const auto& s : samples_) {
    if (s.features.size() != f) {
      throw SchemaError("row " + std::to_string(s.row_id) + " has " +
                        std::to_string(s.features.size()) + " features, schema has " +
                        std::to_string(f));
    }
    for (std::size_t c = 0; c < f; ++c) {
      if (s.features[c] >= schema_->cardinality(c)) {
        throw SchemaError("row " + std::to_string(s.row_id) + " column '" +
                          schema_->feature_name(c) + "' value index " +
                          std::to_string(s.features[c]) + " exceeds vocabulary");
      }
    }
    if (s.label > 1) throw SchemaError("row " + std::to_string(s.row_id) + " label not in {0,1}");
    if (!ids.insert(s.row_id).second) {
      throw SchemaError("duplicate row_id " + std::to_string(s.row_id));
    }
  }
}

Dataset Dataset::subset(std::span<const std::size_t> positions) const {
  std::vector<Sample> out;
  out.reserve(positions.size());
  for (auto p : positions) out.push_back(samples_.at(p));
  return Dataset(schema_, std::move(out));
}

std::optional<std::int64_t> Dataset::min_timestamp() const {
  if (samples_.empty()) return std::nullopt;
  return std::ranges::min_element(samples_, {}, &Sample::timestamp)->timestamp;
}

std::optional<std::int64_t> Dataset::max_timestamp() const {
  if (samples_.empty()) return std::nullopt;
  return std::ranges::max_element(samples_, {}, &Sample::timestamp)->timestamp;
}

bool Dataset::operator==(const Dataset& other) const {
  if (samples_ != other.samples_) return false;
  if (schema_ == other.schema_) return true;
  return schema_ && other.schema_ && *schema_ == *other.schema_;
}

}  // namespace rad::data
