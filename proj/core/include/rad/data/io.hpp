#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "rad/data/dataset.hpp"

namespace rad::data {

// Which CSV header names play which role. Roles are always declared, never
// inferred from the file.
struct ColumnRoles {
  std::vector<std::string> features;
  std::string label;
  std::string timestamp;
};

// Reads a header-first, comma-separated file and builds a fresh vocabulary in
// first-appearance order. row_id is the 0-based data-row position. Labels must
// be exactly "0" or "1".
Dataset load_csv(const std::filesystem::path& path, const ColumnRoles& roles);

// Encodes a CSV against an existing schema; values missing from the
// vocabulary map to the column's unknown index.
Dataset load_csv(const std::filesystem::path& path, std::shared_ptr<const Schema> schema);

// Writes feature columns, label and timestamp with the schema's header names.
void write_csv(const Dataset& dataset, const std::filesystem::path& path);

// "RADD" binary cache: magic, version byte, schema block, row block.
void save_dataset(const Dataset& dataset, const std::filesystem::path& path);
Dataset load_dataset(const std::filesystem::path& path);

// Loads either a RADD cache or (by extension .csv) a CSV encoded against
// `schema`.
Dataset load_any(const std::filesystem::path& path, std::shared_ptr<const Schema> schema);

}  // namespace rad::data
