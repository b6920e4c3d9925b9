#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rad/data/io.hpp"
#include "rad/data/split.hpp"
#include "rad/data/synth.hpp"
#include "rad/models/networks.hpp"

namespace rad::pipeline {

struct TrainConfig {
  int pretrain_epochs = 5;
  int finetune_epochs = 5;
  int kd_epochs = 10;
  // Epochs for the stand-alone original model; < 0 means finetune_epochs.
  int original_epochs = -1;
  int batch_size = 256;
  double lr = 1e-3;
  // Optional per-phase learning rates; <= 0 falls back to lr.
  double pretrain_lr = 0.0;
  double finetune_lr = 0.0;
  double kd_lr = 0.0;
  std::uint64_t seed = 7;
  int k = 10;
  int embed_dim = 16;
  int hidden = 64;
  bool freeze_relevance = false;

  void validate() const;
  int effective_original_epochs() const {
    return original_epochs < 0 ? finetune_epochs : original_epochs;
  }
  double lr_for(double phase_lr) const { return phase_lr > 0.0 ? phase_lr : lr; }
  models::ModelDims dims(std::vector<std::uint32_t> cardinalities) const;
};

// Where the dataset comes from: a RADD cache / CSV file, or the generator.
struct DataSource {
  std::optional<std::filesystem::path> path;
  data::ColumnRoles roles{{"user", "item", "category"}, "label", "timestamp"};
  data::SynthConfig synth;
};

struct ExperimentConfig {
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  // Start days (inclusive) of the shift-curve training windows; empty means
  // an automatic ladder from the newest train day back to day 0.
  std::vector<std::int64_t> shift_windows;
  std::vector<int> timing_ks{1, 10, 50};
  int timing_repeats = 3;
  int timing_rows = 1000;
};

struct PipelineConfig {
  DataSource data;
  data::SplitOptions split{5, 2, 1};
  TrainConfig train;
  ExperimentConfig experiments;
  // Wall-clock milliseconds in run reports. Off by default so that repeated
  // runs produce byte-identical report files.
  bool record_wall_clock = false;

  void validate() const;
};

// Missing keys keep their defaults; unknown keys are rejected (ConfigError).
PipelineConfig parse_config(const nlohmann::json& j);
PipelineConfig load_config(const std::filesystem::path& path);
nlohmann::json to_json(const PipelineConfig& cfg);

// The configured dataset: a CSV (by extension) or RADD cache at data.path,
// resolved against `base` when relative; otherwise the synthetic generator.
data::Dataset load_data(const DataSource& source, const std::filesystem::path& base = {});

}  // namespace rad::pipeline
