#pragma once

// Little-endian binary helpers shared by the dataset, index and checkpoint
// file formats. Internal to rad_core.

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include "rad/error.hpp"

namespace rad::io {

static_assert(std::endian::native == std::endian::little,
              "binary formats are written in host order and assume little-endian");

class BinaryWriter {
 public:
  explicit BinaryWriter(const std::filesystem::path& path)
      : path_(path), out_(path, std::ios::binary | std::ios::trunc) {
    if (!out_) throw FormatError("cannot open '" + path.string() + "' for writing");
  }

  void magic(std::string_view tag, std::uint8_t version) {
    out_.write(tag.data(), static_cast<std::streamsize>(tag.size()));
    pod(version);
  }

  template <typename T>
    requires std::is_trivially_copyable_v<T>
  void pod(const T& v) {
    out_.write(reinterpret_cast<const char*>(&v), sizeof(T));
  }

  template <typename T>
    requires std::is_trivially_copyable_v<T>
  void array(std::span<const T> values) {
    out_.write(reinterpret_cast<const char*>(values.data()),
               static_cast<std::streamsize>(values.size_bytes()));
  }

  void string(std::string_view s) {
    pod(static_cast<std::uint32_t>(s.size()));
    out_.write(s.data(), static_cast<std::streamsize>(s.size()));
  }

  void finish() {
    out_.flush();
    if (!out_) throw FormatError("write to '" + path_.string() + "' failed");
  }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
};

class BinaryReader {
 public:
  explicit BinaryReader(const std::filesystem::path& path)
      : path_(path), in_(path, std::ios::binary) {
    if (!in_) throw FormatError("cannot open '" + path.string() + "'");
  }

  // Checks the 4-byte tag and returns the version byte.
  std::uint8_t magic(std::string_view tag) {
    std::array<char, 4> buf{};
    in_.read(buf.data(), 4);
    if (!in_ || std::string_view(buf.data(), 4) != tag) {
      throw FormatError("'" + path_.string() + "' is not a " + std::string(tag) + " file");
    }
    return pod<std::uint8_t>();
  }

  template <typename T>
    requires std::is_trivially_copyable_v<T>
  T pod() {
    T v{};
    in_.read(reinterpret_cast<char*>(&v), sizeof(T));
    check();
    return v;
  }

  template <typename T>
    requires std::is_trivially_copyable_v<T>
  std::vector<T> array(std::size_t n) {
    std::vector<T> v(n);
    in_.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(T)));
    check();
    return v;
  }

  std::string string() {
    const auto n = pod<std::uint32_t>();
    std::string s(n, '\0');
    in_.read(s.data(), n);
    check();
    return s;
  }

  bool at_end() { return in_.peek() == std::char_traits<char>::eof(); }

 private:
  void check() {
    if (!in_) throw FormatError("'" + path_.string() + "' is truncated");
  }

  std::filesystem::path path_;
  std::ifstream in_;
};

}  // namespace rad::io
