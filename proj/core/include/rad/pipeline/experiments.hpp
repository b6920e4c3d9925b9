#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "rad/data/split.hpp"
#include "rad/models/networks.hpp"
#include "rad/pipeline/config.hpp"
#include "rad/pipeline/report.hpp"

namespace rad::pipeline {

// --- Pretraining-source study ------------------------------------------------

struct InvarianceSeed {
  std::uint64_t seed = 0;
  double shifting_auc = 0.0;  // relevance pretrained on D_shifting
  double train_auc = 0.0;     // relevance pretrained on D_train
  // Raw D_shifting-pretrained teacher evaluated on D_test.
  double raw_teacher_auc = 0.0;
};

struct InvarianceResult {
  std::vector<InvarianceSeed> seeds;
  double mean_shifting_auc = 0.0;
  double mean_train_auc = 0.0;
  double mean_raw_teacher_auc = 0.0;
  ExperimentReport report;

  bool shifting_wins() const { return mean_shifting_auc > mean_train_auc; }
};

// Per seed, trains two retrieval frameworks whose relevance networks are
// frozen after pretraining: one pretrained on D_shifting, one on D_train.
// Both search D_shifting and are finetuned on D_train.
InvarianceResult run_invariance_experiment(const data::TemporalSplit& split,
                                           const TrainConfig& cfg,
                                           std::span<const std::uint64_t> seeds,
                                           bool record_wall_clock = false);

// --- Training-window curve ---------------------------------------------------

struct CurvePoint {
  std::int64_t start_day = 0;
  std::int64_t days = 0;  // window length, start_day .. train end
  std::size_t rows = 0;
  double auc = 0.0;       // mean over seeds
  double logloss = 0.0;   // mean over seeds
};

using ModelBuilder =
    std::function<std::unique_ptr<models::Model>(const models::ModelDims&, nn::Rng&)>;

// Window start days from the newest train_days-long window back to the first
// day, doubling the length each step; the full history is always last.
std::vector<std::int64_t> default_windows(const data::Dataset& dataset,
                                          const data::SplitOptions& options);

// For each start day s, trains a fresh model on days [s, train end] and
// evaluates it on the split's D_test. The default builder is OriginalModel.
// Results are averaged over `seeds`. ConfigError for a start day after the
// train end.
std::vector<CurvePoint> run_shift_curve(const data::Dataset& dataset,
                                        const data::SplitOptions& options,
                                        const TrainConfig& cfg,
                                        std::span<const std::int64_t> windows,
                                        std::span<const std::uint64_t> seeds,
                                        const ModelBuilder& builder = {});

// --- Inference timing --------------------------------------------------------

struct TimedModel {
  std::string name;
  const models::Model* model = nullptr;
};

struct TimingEntry {
  std::string name;
  std::size_t k = 0;  // retrieval depth, 0 for retrieval-free models
  double median_ms_per_1k = 0.0;
  std::vector<double> samples_ms_per_1k;
  std::uint64_t retrieval_calls = 0;  // index queries in one pass
};

// Median over `repeats` (>= 3) passes of predicting the first `rows` rows.
TimingEntry time_inference(const TimedModel& model, const data::Dataset& rows, int repeats,
                           std::size_t max_rows);

struct TimingResult {
  std::vector<TimingEntry> models;     // original, retrieval, distill
  std::vector<TimingEntry> k_sweep;    // retrieval framework at each K
  const TimingEntry* find(std::string_view name) const;
  bool distill_retrieval_free() const;
  bool retrieval_queries_index() const;
  // Median time at the largest K exceeds the median at the smallest.
  bool grows_with_k() const;
};

// Times original / retrieval / distill frameworks of `pipeline`-style models
// and sweeps the retrieval depth over `ks` (restoring the original K).
TimingResult timing_report(const models::OriginalModel& original,
                           models::RetrievalFramework& retrieval,
                           const models::DistillFramework& distill, const data::Dataset& test,
                           const ExperimentConfig& experiments);

}  // namespace rad::pipeline
