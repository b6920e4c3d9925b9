#include "rad/nn/checkpoint.hpp"

#include <fstream>
#include <map>
#include <unordered_map>

#include "../binary_io.hpp"
#include "rad/error.hpp"

namespace rad::nn {

namespace {
constexpr std::uint8_t kCheckpointVersion = 1;
}  // namespace

void save_checkpoint(const std::filesystem::path& path, const ParamList& params) {
  io::BinaryWriter w(path);
  w.magic("RADW", kCheckpointVersion);
  w.pod(static_cast<std::uint32_t>(params.size()));
  for (const auto& p : params) {
    w.string(p->name);
    w.pod(static_cast<std::uint32_t>(p->value.shape.size()));
    for (auto d : p->value.shape) w.pod(static_cast<std::uint64_t>(d));
    w.array(std::span<const double>(p->value.data));
  }
  w.finish();
}

void load_checkpoint(const std::filesystem::path& path, const ParamList& params) {
  io::BinaryReader r(path);
  if (const auto version = r.magic("RADW"); version != kCheckpointVersion) {
    throw FormatError("unsupported RADW version " + std::to_string(version));
  }
  std::unordered_map<std::string, Tensor> stored;
  const auto count = r.pod<std::uint32_t>();
  for (std::uint32_t i = 0; i < count; ++i) {
    auto name = r.string();
    const auto rank = r.pod<std::uint32_t>();
    Shape shape;
    for (std::uint32_t d = 0; d < rank; ++d) shape.push_back(r.pod<std::uint64_t>());
    auto values = r.array<double>(shape_size(shape));
    stored.emplace(std::move(name), Tensor(std::move(shape), std::move(values)));
  }
  for (const auto& p : params) {
    auto it = stored.find(p->name);
    if (it == stored.end()) {
      throw FormatError("checkpoint '" + path.string() + "' has no parameter '" + p->name + "'");
    }
    if (it->second.shape != p->value.shape) {
      throw FormatError("parameter '" + p->name + "' has shape " +
                        shape_string(it->second.shape) + " in checkpoint, expected " +
                        shape_string(p->value.shape));
    }
    p->value = it->second;
    p->zero_grad();
  }
}

std::filesystem::path manifest_path(const std::filesystem::path& checkpoint) {
  auto out = checkpoint;
  out += ".manifest";
  return out;
}

void save_checkpoint(const std::filesystem::path& path, const ParamList& params,
                     const Manifest& manifest) {
  save_checkpoint(path, params);
  std::ofstream out(manifest_path(path), std::ios::trunc);
  for (const auto& [key, value] : manifest) out << key << '=' << value << '\n';
  if (!out) throw FormatError("cannot write " + manifest_path(path).string());
}

void load_checkpoint(const std::filesystem::path& path, const ParamList& params,
                     const Manifest& expected) {
  const auto sidecar = manifest_path(path);
  std::ifstream in(sidecar);
  if (!in) throw FormatError("checkpoint manifest '" + sidecar.string() + "' is missing");
  std::map<std::string, std::string> stored;
  for (std::string line; std::getline(in, line);) {
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw FormatError("malformed manifest line '" + line + "' in " + sidecar.string());
    }
    stored[line.substr(0, eq)] = line.substr(eq + 1);
  }
  for (const auto& [key, value] : expected) {
    const auto it = stored.find(key);
    const std::string found = it == stored.end() ? "<missing>" : it->second;
    if (found != value) {
      throw FormatError("checkpoint '" + path.string() + "' was saved with " + key + "=" + found +
                        ", model expects " + value);
    }
  }
  load_checkpoint(path, params);
}

}  // namespace rad::nn
