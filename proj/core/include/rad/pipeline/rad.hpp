#pragma once

#include <array>
#include <filesystem>
#include <memory>
#include <optional>
#include <string_view>
#include <vector>

#include "rad/data/split.hpp"
#include "rad/models/networks.hpp"
#include "rad/pipeline/config.hpp"
#include "rad/pipeline/report.hpp"
#include "rad/pipeline/training.hpp"

namespace rad::pipeline {

// Training phases in execution order.
enum class Phase { kOriginal, kPretrain, kFinetune, kDistill, kDistillFinetune };

inline constexpr std::array kAllPhases{Phase::kOriginal, Phase::kPretrain, Phase::kFinetune,
                                       Phase::kDistill, Phase::kDistillFinetune};

std::string_view phase_name(Phase phase);
std::optional<Phase> parse_phase(std::string_view name);
// Phase whose checkpoints must exist before `phase` may run.
std::optional<Phase> prerequisite(Phase phase);

// All models of one run over a fixed split. Every model is initialised from
// its own (seed, name) generator, so construction order never matters and a
// phase restored from checkpoints continues exactly like an in-process run.
//
//   original          : OriginalModel on D_train
//   pretrain          : TeacherRetrieval and TeacherDistill on D_shifting
//   finetune          : RetrievalFramework (teacher's relevance) on D_train
//   distill           : SearchDistillModule regressed onto TeacherDistill
//   distill-finetune  : DistillFramework (distilled student) on D_train
class RadPipeline {
 public:
  RadPipeline(data::TemporalSplit split, TrainConfig cfg, bool record_wall_clock = false);

  const data::TemporalSplit& split() const noexcept { return split_; }
  const TrainConfig& config() const noexcept { return cfg_; }
  const models::ModelDims& dims() const noexcept { return dims_; }

  // Trains and evaluates one phase. PhaseError when the prerequisite phase
  // has neither run nor been loaded.
  std::vector<PhaseRecord> run(Phase phase);
  // Every phase in order; returns the combined report.
  ExperimentReport run_all();

  bool done(Phase phase) const { return done_[static_cast<std::size_t>(phase)]; }

  // Checkpoint files produced by a phase, relative to a run directory.
  static std::vector<std::filesystem::path> checkpoint_files(Phase phase);
  void save(Phase phase, const std::filesystem::path& dir) const;
  // Restores a phase's checkpoints and marks it done. Returns false (and
  // changes nothing) when any of its files is missing.
  bool load(Phase phase, const std::filesystem::path& dir);

  // Model whose checkpoint file stem is `name` ("original",
  // "teacher_retrieval", ...); nullptr for unknown names.
  models::Model* model_by_name(std::string_view name);

  const std::shared_ptr<const retrieval::InvertedIndex>& index() const noexcept { return index_; }
  models::OriginalModel& original() noexcept { return *original_; }
  models::TeacherRetrieval& teacher_retrieval() noexcept { return *teacher_retrieval_; }
  models::TeacherDistill& teacher_distill() noexcept { return *teacher_distill_; }
  models::RetrievalFramework& retrieval_framework() noexcept { return *retrieval_framework_; }
  models::SearchDistillModule& student() noexcept { return *student_; }
  models::DistillFramework& distill_framework() noexcept { return *distill_framework_; }

  // Per-epoch KD loss of the last distill phase run in-process.
  const FitResult& kd_history() const noexcept { return kd_history_; }

 private:
  struct CheckpointEntry {
    std::filesystem::path file;
    nn::ParamList params;
    nn::Manifest manifest;
  };
  std::vector<CheckpointEntry> checkpoint_entries(Phase phase) const;

  template <typename Fn>
  PhaseRecord measure(std::string name, std::string role, Fn&& body) const;
  PhaseRecord evaluate_on_test(std::string name, const models::Model& model,
                               std::uint64_t calls_before, double ms_before) const;

  data::TemporalSplit split_;
  TrainConfig cfg_;
  bool record_wall_clock_;
  models::ModelDims dims_;
  std::shared_ptr<const retrieval::InvertedIndex> index_;
  std::shared_ptr<models::OriginalModel> original_;
  std::shared_ptr<models::TeacherRetrieval> teacher_retrieval_;
  std::shared_ptr<models::TeacherDistill> teacher_distill_;
  std::shared_ptr<models::RetrievalFramework> retrieval_framework_;
  std::shared_ptr<models::SearchDistillModule> student_;
  std::shared_ptr<models::DistillFramework> distill_framework_;
  std::array<bool, kAllPhases.size()> done_{};
  FitResult kd_history_;
};

// Convenience: one full run over a split.
ExperimentReport run_rad(const data::TemporalSplit& split, const TrainConfig& cfg,
                         bool record_wall_clock = false);

}  // namespace rad::pipeline
