#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "rad/nn/tensor.hpp"

namespace rad::nn {

// "RADW": magic, version byte, record count, then (name, shape, values)
// records in the given order.
void save_checkpoint(const std::filesystem::path& path, const ParamList& params);

// Restores values by parameter name. Every parameter in `params` must be
// present with an identical shape (FormatError otherwise).
void load_checkpoint(const std::filesystem::path& path, const ParamList& params);

// Architecture hyperparameters stored beside a checkpoint as text, one
// "key=value" line each, in "<checkpoint>.manifest".
using Manifest = std::vector<std::pair<std::string, std::string>>;

std::filesystem::path manifest_path(const std::filesystem::path& checkpoint);

void save_checkpoint(const std::filesystem::path& path, const ParamList& params,
                     const Manifest& manifest);

// Verifies the sidecar manifest equals `expected` before restoring values.
// A missing sidecar or any differing key is a FormatError.
void load_checkpoint(const std::filesystem::path& path, const ParamList& params,
                     const Manifest& expected);

}  // namespace rad::nn
