#include "rad/pipeline/rad.hpp"

#include <chrono>

#include "rad/error.hpp"
#include "rad/nn/checkpoint.hpp"

namespace rad::pipeline {

namespace fs = std::filesystem;

namespace {

constexpr std::array<std::string_view, kAllPhases.size()> kPhaseNames{
    "original", "pretrain", "finetune", "distill", "distill-finetune"};

double now_ms() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double, std::milli>(clock::now().time_since_epoch()).count();
}

}  // namespace

std::string_view phase_name(Phase phase) { return kPhaseNames[static_cast<std::size_t>(phase)]; }

std::optional<Phase> parse_phase(std::string_view name) {
  for (auto p : kAllPhases) {
    if (phase_name(p) == name) return p;
  }
  return std::nullopt;
}

std::optional<Phase> prerequisite(Phase phase) {
  switch (phase) {
    case Phase::kFinetune:
    case Phase::kDistill:
      return Phase::kPretrain;
    case Phase::kDistillFinetune:
      return Phase::kDistill;
    default:
      return std::nullopt;
  }
}

RadPipeline::RadPipeline(data::TemporalSplit split, TrainConfig cfg, bool record_wall_clock)
    : split_(std::move(split)), cfg_(std::move(cfg)), record_wall_clock_(record_wall_clock) {
  cfg_.validate();
  dims_ = cfg_.dims(split_.train.schema().cardinalities());
  const auto& dims = dims_;
  index_ = std::make_shared<retrieval::InvertedIndex>(
      std::make_shared<const data::Dataset>(split_.shifting));

  auto rng_for = [&](std::string_view tag) { return make_rng(cfg_.seed, tag); };
  auto new_original = [&] {
    auto rng = rng_for("original");
    return std::make_shared<models::OriginalModel>(dims, rng);
  };
  original_ = new_original();
  {
    auto rng = rng_for("teacher_retrieval");
    teacher_retrieval_ = std::make_shared<models::TeacherRetrieval>(dims, index_, rng);
  }
  {
    auto rng = rng_for("teacher_distill");
    teacher_distill_ = std::make_shared<models::TeacherDistill>(dims, index_, rng);
  }
  {
    auto rng = rng_for("retrieval_framework");
    retrieval_framework_ = std::make_shared<models::RetrievalFramework>(
        dims, new_original(), teacher_retrieval_->relevance(), rng);
  }
  {
    auto rng = rng_for("student");
    student_ = std::make_shared<models::SearchDistillModule>(dims, rng);
  }
  {
    auto rng = rng_for("distill_framework");
    distill_framework_ =
        std::make_shared<models::DistillFramework>(dims, new_original(), student_, rng);
  }
}

template <typename Fn>
PhaseRecord RadPipeline::measure(std::string name, std::string role, Fn&& body) const {
  const auto calls = retrieval::total_query_count();
  const double start = now_ms();
  body();
  PhaseRecord r;
  r.name = std::move(name);
  r.role = std::move(role);
  r.ms = record_wall_clock_ ? now_ms() - start : 0.0;
  r.retrieval_calls = retrieval::total_query_count() - calls;
  return r;
}

PhaseRecord RadPipeline::evaluate_on_test(std::string name, const models::Model& model,
                                          std::uint64_t calls_before, double ms_before) const {
  const auto m = evaluate(model, split_.test);
  PhaseRecord r;
  r.name = std::move(name);
  r.role = "test";
  r.auc = m.auc;
  r.logloss = m.logloss;
  r.ms = record_wall_clock_ ? now_ms() - ms_before : 0.0;
  r.retrieval_calls = retrieval::total_query_count() - calls_before;
  return r;
}

std::vector<PhaseRecord> RadPipeline::run(Phase phase) {
  if (const auto pre = prerequisite(phase); pre && !done(*pre)) {
    throw PhaseError(std::string(phase_name(phase)) + " needs the " +
                     std::string(phase_name(*pre)) + " checkpoints; run that phase first");
  }
  std::vector<PhaseRecord> out;
  auto train_and_eval = [&](std::string name, models::Model& model, auto&& train) {
    const auto calls = retrieval::total_query_count();
    const double start = now_ms();
    train();
    out.push_back(evaluate_on_test(std::move(name), model, calls, start));
  };

  switch (phase) {
    case Phase::kOriginal:
      train_and_eval("original", *original_, [&] { train_original(*original_, split_.train, cfg_); });
      break;
    case Phase::kPretrain:
      train_and_eval("teacher_retrieval", *teacher_retrieval_,
                     [&] { pretrain_teacher(*teacher_retrieval_, split_, cfg_); });
      train_and_eval("teacher_distill", *teacher_distill_,
                     [&] { pretrain_teacher(*teacher_distill_, split_, cfg_); });
      break;
    case Phase::kFinetune:
      train_and_eval("retrieval_framework", *retrieval_framework_,
                     [&] { finetune_retrieval(*retrieval_framework_, split_, cfg_); });
      break;
    case Phase::kDistill:
      out.push_back(measure("distill_kd", "shifting", [&] {
        kd_history_ = distill_kd(*student_, *teacher_distill_, split_.shifting, cfg_);
      }));
      break;
    case Phase::kDistillFinetune:
      train_and_eval("distill_framework", *distill_framework_,
                     [&] { finetune_distill(*distill_framework_, split_.train, cfg_); });
      break;
  }
  done_[static_cast<std::size_t>(phase)] = true;
  return out;
}

ExperimentReport RadPipeline::run_all() {
  ExperimentReport report;
  report.title = "rad";
  for (auto p : kAllPhases) report.append(run(p));
  return report;
}

std::vector<fs::path> RadPipeline::checkpoint_files(Phase phase) {
  switch (phase) {
    case Phase::kOriginal:
      return {"original.radw"};
    case Phase::kPretrain:
      return {"teacher_retrieval.radw", "teacher_distill.radw"};
    case Phase::kFinetune:
      return {"retrieval_framework.radw"};
    case Phase::kDistill:
      return {"student.radw"};
    case Phase::kDistillFinetune:
      return {"distill_framework.radw"};
  }
  return {};
}

models::Model* RadPipeline::model_by_name(std::string_view name) {
  if (name == "original") return original_.get();
  if (name == "teacher_retrieval") return teacher_retrieval_.get();
  if (name == "teacher_distill") return teacher_distill_.get();
  if (name == "retrieval_framework") return retrieval_framework_.get();
  if (name == "distill_framework") return distill_framework_.get();
  return nullptr;
}

std::vector<RadPipeline::CheckpointEntry> RadPipeline::checkpoint_entries(Phase phase) const {
  const auto& d = dims_;
  auto entry = [&](std::string_view stem, nn::ParamList params) {
    return CheckpointEntry{fs::path(std::string(stem) + ".radw"), std::move(params),
                           models::architecture_manifest(stem, d)};
  };
  switch (phase) {
    case Phase::kOriginal:
      return {entry("original", original_->parameters())};
    case Phase::kPretrain:
      return {entry("teacher_retrieval", teacher_retrieval_->parameters()),
              entry("teacher_distill", teacher_distill_->parameters())};
    case Phase::kFinetune:
      return {entry("retrieval_framework", retrieval_framework_->parameters())};
    case Phase::kDistill:
      return {entry("student", student_->parameters())};
    case Phase::kDistillFinetune:
      return {entry("distill_framework", distill_framework_->parameters())};
  }
  return {};
}

void RadPipeline::save(Phase phase, const fs::path& dir) const {
  fs::create_directories(dir);
  for (const auto& e : checkpoint_entries(phase)) {
    nn::save_checkpoint(dir / e.file, e.params, e.manifest);
  }
}

bool RadPipeline::load(Phase phase, const fs::path& dir) {
  const auto entries = checkpoint_entries(phase);
  for (const auto& e : entries) {
    if (!fs::exists(dir / e.file)) return false;
  }
  for (const auto& e : entries) nn::load_checkpoint(dir / e.file, e.params, e.manifest);
  done_[static_cast<std::size_t>(phase)] = true;
  return true;
}

ExperimentReport run_rad(const data::TemporalSplit& split, const TrainConfig& cfg,
                         bool record_wall_clock) {
  RadPipeline p(split, cfg, record_wall_clock);
  return p.run_all();
}

}  // namespace rad::pipeline
