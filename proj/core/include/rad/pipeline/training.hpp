#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "rad/data/split.hpp"
#include "rad/models/networks.hpp"
#include "rad/pipeline/config.hpp"
#include "rad/pipeline/metrics.hpp"

namespace rad::pipeline {

// Generator for one purpose (model init, a phase's shuffling, ...). The same
// (seed, tag) pair always gives the same stream, so a phase run on its own
// matches the same phase inside a full run.
nn::Rng make_rng(std::uint64_t seed, std::string_view tag);

struct FitOptions {
  int epochs = 1;
  int batch_size = 256;
  double lr = 1e-3;
  std::uint64_t seed = 7;  // shuffle order
  std::string_view tag = "fit";
  models::ForwardOptions forward;
};

struct FitResult {
  std::vector<double> epoch_loss;  // mean per-sample loss of each epoch
  std::vector<double> batch_loss;  // mean per-sample loss of each mini-batch
};

// Mini-batch Adam on the binary cross-entropy of sigmoid(logit), reshuffling
// every epoch. Only model.trainable_parameters() are updated.
FitResult fit_binary(models::Model& model, const data::Dataset& data, const FitOptions& opts);

// Teacher on D_shifting with self-exclusion; the teacher's index must cover
// D_shifting. PhaseError when D_shifting is empty.
FitResult pretrain_teacher(models::Model& teacher, const data::TemporalSplit& split,
                           const TrainConfig& cfg);

// Retrieval framework on D_train. The search space stays whatever the
// relevance network already holds (D_shifting); freeze_relevance is applied.
FitResult finetune_retrieval(models::RetrievalFramework& fw, const data::TemporalSplit& split,
                             const TrainConfig& cfg);

// Student regression onto the frozen teacher's R(x) over D_shifting (MSE per
// component, teacher queried with self-exclusion). Teacher outputs are
// computed once up front. Losses are per-epoch mean MSE.
FitResult distill_kd(models::SearchDistillModule& student, const models::TeacherDistill& teacher,
                     const data::Dataset& shifting, const TrainConfig& cfg);

// Mean MSE between student and teacher relevance outputs over `rows`.
double kd_error(const models::SearchDistillModule& student, const models::TeacherDistill& teacher,
                const data::Dataset& rows, const models::ForwardOptions& teacher_opts);

FitResult finetune_distill(models::DistillFramework& fw, const data::Dataset& train,
                           const TrainConfig& cfg);

FitResult train_original(models::OriginalModel& model, const data::Dataset& train,
                         const TrainConfig& cfg);

std::vector<double> predict_all(const models::Model& model, const data::Dataset& data,
                                const models::ForwardOptions& opts = {});

// AUC (when both classes are present) and LogLoss of the model's clamped
// probabilities.
Metrics evaluate(const models::Model& model, const data::Dataset& test,
                 const models::ForwardOptions& opts = {});

}  // namespace rad::pipeline
