#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "rad/data/dataset.hpp"

namespace rad::test {

// Fresh, empty directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& name) {
    path_ = std::filesystem::temp_directory_path() /
            (name + "-" + std::to_string(std::random_device{}()));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const noexcept { return path_; }
  std::filesystem::path operator/(const std::string& leaf) const { return path_ / leaf; }

 private:
  std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream(path, std::ios::binary) << text;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Random categorical dataset: `columns` features with vocabularies of the
// given size, row ids 0..rows-1, timestamps rising by one per row.
inline data::Dataset random_dataset(std::mt19937_64& rng, std::size_t rows, std::size_t columns,
                                    std::uint32_t vocab) {
  std::vector<std::string> names;
  for (std::size_t c = 0; c < columns; ++c) names.push_back("f" + std::to_string(c));
  auto schema = std::make_shared<data::Schema>(names, "label", "ts");
  for (std::size_t c = 0; c < columns; ++c) {
    for (std::uint32_t v = 0; v < vocab; ++v) schema->intern(c, "v" + std::to_string(v));
  }
  std::uniform_int_distribution<std::uint32_t> value(0, vocab - 1);
  std::bernoulli_distribution label(0.4);
  std::vector<data::Sample> samples;
  for (std::size_t r = 0; r < rows; ++r) {
    data::Sample s;
    s.row_id = static_cast<data::RowId>(r);
    for (std::size_t c = 0; c < columns; ++c) s.features.push_back(value(rng));
    s.label = label(rng) ? 1 : 0;
    s.timestamp = static_cast<std::int64_t>(r);
    samples.push_back(std::move(s));
  }
  return data::Dataset(std::move(schema), std::move(samples));
}

}  // namespace rad::test
