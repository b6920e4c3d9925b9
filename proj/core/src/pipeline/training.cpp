#include "rad/pipeline/training.hpp"

#include <algorithm>
#include <numeric>

#include "rad/error.hpp"
#include "rad/nn/ops.hpp"
#include "rad/nn/optim.hpp"

namespace rad::pipeline {

using data::Dataset;
using models::ForwardOptions;
using nn::Tape;
using nn::Var;

nn::Rng make_rng(std::uint64_t seed, std::string_view tag) {
  // FNV-1a over the tag, then seed_seq mixing with the run seed.
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : tag) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32)};
  return nn::Rng(seq);
}

namespace {

// Shared mini-batch loop. `loss_of` records one sample's loss on the tape.
template <typename LossFn>
FitResult run_epochs(const nn::ParamList& params, std::size_t n, const FitOptions& opts,
                     LossFn&& loss_of) {
  FitResult result;
  if (opts.epochs <= 0 || n == 0) return result;
  nn::Adam adam(params, {.lr = opts.lr});
  adam.zero_grad();
  auto rng = make_rng(opts.seed, opts.tag);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto batch = static_cast<std::size_t>(std::max(1, opts.batch_size));

  Tape tape;
  for (int epoch = 0; epoch < opts.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_total = 0.0;
    for (std::size_t start = 0; start < n; start += batch) {
      const auto end = std::min(n, start + batch);
      const double inv = 1.0 / static_cast<double>(end - start);
      double batch_total = 0.0;
      for (std::size_t i = start; i < end; ++i) {
        tape.clear();
        const Var loss = loss_of(tape, order[i]);
        batch_total += loss.item();
        tape.backward(loss, inv);
      }
      adam.step();
      epoch_total += batch_total;
      result.batch_loss.push_back(batch_total * inv);
    }
    result.epoch_loss.push_back(epoch_total / static_cast<double>(n));
  }
  return result;
}

void require_rows(const Dataset& data, const char* phase, const char* part) {
  if (data.empty()) {
    throw PhaseError(std::string(phase) + ": " + part + " is empty");
  }
}

FitOptions options_for(const TrainConfig& cfg, int epochs, double lr, std::string_view tag) {
  return {.epochs = epochs,
          .batch_size = cfg.batch_size,
          .lr = lr,
          .seed = cfg.seed,
          .tag = tag,
          .forward = {}};
}

}  // namespace

FitResult fit_binary(models::Model& model, const Dataset& data, const FitOptions& opts) {
  return run_epochs(model.trainable_parameters(), data.size(), opts,
                    [&](Tape& tape, std::size_t i) {
                      const auto& s = data[i];
                      return nn::bce(nn::sigmoid(model.logit(tape, s, opts.forward)),
                                     static_cast<double>(s.label));
                    });
}

FitResult pretrain_teacher(models::Model& teacher, const data::TemporalSplit& split,
                           const TrainConfig& cfg) {
  require_rows(split.shifting, "pretrain", "D_shifting");
  auto opts = options_for(cfg, cfg.pretrain_epochs, cfg.lr_for(cfg.pretrain_lr),
                          teacher.kind());
  opts.forward.exclude_self = true;
  return fit_binary(teacher, split.shifting, opts);
}

FitResult finetune_retrieval(models::RetrievalFramework& fw, const data::TemporalSplit& split,
                             const TrainConfig& cfg) {
  require_rows(split.train, "finetune", "D_train");
  if (!fw.relevance().network().search_space()) {
    throw PhaseError("finetune: the relevance network has no search space");
  }
  fw.set_side_frozen(cfg.freeze_relevance);
  return fit_binary(fw, split.train,
                    options_for(cfg, cfg.finetune_epochs, cfg.lr_for(cfg.finetune_lr),
                                "finetune_retrieval"));
}

FitResult distill_kd(models::SearchDistillModule& student, const models::TeacherDistill& teacher,
                     const Dataset& shifting, const TrainConfig& cfg) {
  require_rows(shifting, "distill", "D_shifting");
  const auto& relevance = *teacher.relevance();
  if (student.output_dim() != relevance.output_dim()) {
    throw ShapeError("student outputs " + std::to_string(student.output_dim()) +
                     " values, teacher relevance " + std::to_string(relevance.output_dim()));
  }
  const auto dim = relevance.output_dim();

  // The teacher is frozen, so its outputs are fixed targets.
  std::vector<double> targets(shifting.size() * dim);
  {
    Tape tape;
    const ForwardOptions self_excluded{.exclude_self = true};
    for (std::size_t i = 0; i < shifting.size(); ++i) {
      tape.clear();
      const auto out = relevance.forward(tape, shifting[i], self_excluded).value();
      std::ranges::copy(out, targets.begin() + static_cast<std::ptrdiff_t>(i * dim));
    }
  }

  const auto opts = options_for(cfg, cfg.kd_epochs, cfg.lr_for(cfg.kd_lr), "distill_kd");
  return run_epochs(student.parameters(), shifting.size(), opts, [&](Tape& tape, std::size_t i) {
    const auto target =
        tape.constant({dim}, std::span<const double>(targets.data() + i * dim, dim));
    return nn::mse(student.forward(tape, shifting[i], {}), target);
  });
}

double kd_error(const models::SearchDistillModule& student, const models::TeacherDistill& teacher,
                const Dataset& rows, const ForwardOptions& teacher_opts) {
  if (rows.empty()) return 0.0;
  Tape tape;
  double total = 0.0;
  for (const auto& s : rows) {
    tape.clear();
    const auto t = teacher.relevance()->forward(tape, s, teacher_opts);
    total += nn::mse(student.forward(tape, s, {}), t).item();
  }
  return total / static_cast<double>(rows.size());
}

FitResult finetune_distill(models::DistillFramework& fw, const Dataset& train,
                           const TrainConfig& cfg) {
  require_rows(train, "distill-finetune", "D_train");
  return fit_binary(fw, train,
                    options_for(cfg, cfg.finetune_epochs, cfg.lr_for(cfg.finetune_lr),
                                "finetune_distill"));
}

FitResult train_original(models::OriginalModel& model, const Dataset& train,
                         const TrainConfig& cfg) {
  require_rows(train, "original", "training window");
  return fit_binary(model, train,
                    options_for(cfg, cfg.effective_original_epochs(),
                                cfg.lr_for(cfg.finetune_lr), "original"));
}

std::vector<double> predict_all(const models::Model& model, const Dataset& data,
                                const ForwardOptions& opts) {
  std::vector<double> out;
  out.reserve(data.size());
  for (const auto& s : data) out.push_back(model.predict(s, opts));
  return out;
}

Metrics evaluate(const models::Model& model, const Dataset& test, const ForwardOptions& opts) {
  const auto probs = predict_all(model, test, opts);
  std::vector<std::uint8_t> labels;
  labels.reserve(test.size());
  for (const auto& s : test) labels.push_back(s.label);
  return compute_metrics(probs, labels);
}

}  // namespace rad::pipeline
