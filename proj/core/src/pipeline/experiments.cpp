#include "rad/pipeline/experiments.hpp"

#include <algorithm>
#include <chrono>

#include <fmt/format.h>

#include "rad/error.hpp"
#include "rad/pipeline/training.hpp"

namespace rad::pipeline {

using data::Dataset;
using data::TemporalSplit;

namespace {

double mean_of(const std::vector<double>& xs) {
  double total = 0.0;
  for (double x : xs) total += x;
  return xs.empty() ? 0.0 : total / static_cast<double>(xs.size());
}

double median_of(std::vector<double> xs) {
  std::ranges::sort(xs);
  const auto n = xs.size();
  if (n == 0) return 0.0;
  return n % 2 == 1 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

PhaseRecord test_record(std::string name, const Metrics& m) {
  PhaseRecord r;
  r.name = std::move(name);
  r.role = "test";
  r.auc = m.auc;
  r.logloss = m.logloss;
  return r;
}

double require_auc(const std::optional<double>& auc) {
  if (!auc) throw MetricError("D_test holds a single class; AUC is undefined");
  return *auc;
}

}  // namespace

InvarianceResult run_invariance_experiment(const TemporalSplit& split, const TrainConfig& cfg,
                                           std::span<const std::uint64_t> seeds,
                                           bool record_wall_clock) {
  if (split.shifting.empty()) throw PhaseError("invariance: D_shifting is empty");
  if (split.train.empty()) throw PhaseError("invariance: D_train is empty");
  auto index = std::make_shared<const retrieval::InvertedIndex>(
      std::make_shared<const Dataset>(split.shifting));

  InvarianceResult result;
  result.report.title = "invariance";
  std::vector<double> shift_ll, train_ll;
  for (const auto seed : seeds) {
    auto run_cfg = cfg;
    run_cfg.seed = seed;
    run_cfg.freeze_relevance = true;
    const auto dims = run_cfg.dims(split.train.schema().cardinalities());

    // Identical initialisation for both variants; only the pretraining data
    // differs.
    auto variant = [&](bool on_shifting, PhaseRecord* raw) {
      const auto start = std::chrono::steady_clock::now();
      const auto calls = retrieval::total_query_count();
      auto teacher_rng = make_rng(seed, "teacher_retrieval");
      auto teacher = std::make_shared<models::TeacherRetrieval>(dims, index, teacher_rng);
      if (on_shifting) {
        pretrain_teacher(*teacher, split, run_cfg);
        if (raw) *raw = test_record(fmt::format("raw_teacher/seed{}", seed),
                                    evaluate(*teacher, split.test));
      } else {
        FitOptions opts{.epochs = run_cfg.pretrain_epochs,
                        .batch_size = run_cfg.batch_size,
                        .lr = run_cfg.lr_for(run_cfg.pretrain_lr),
                        .seed = seed,
                        .tag = teacher->kind(),
                        .forward = {.exclude_self = true}};
        fit_binary(*teacher, split.train, opts);
      }
      auto original_rng = make_rng(seed, "original");
      auto original = std::make_shared<models::OriginalModel>(dims, original_rng);
      auto fw_rng = make_rng(seed, "retrieval_framework");
      models::RetrievalFramework fw(dims, original, teacher->relevance(), fw_rng);
      finetune_retrieval(fw, split, run_cfg);
      auto record = test_record(
          fmt::format("{}_pretrained/seed{}", on_shifting ? "shifting" : "train", seed),
          evaluate(fw, split.test));
      record.retrieval_calls = retrieval::total_query_count() - calls;
      if (record_wall_clock) {
        record.ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                              start)
                        .count();
      }
      return record;
    };

    PhaseRecord raw;
    const auto a = variant(true, &raw);
    const auto b = variant(false, nullptr);
    result.seeds.push_back({seed, require_auc(a.auc), require_auc(b.auc),
                            require_auc(raw.auc)});
    shift_ll.push_back(*a.logloss);
    train_ll.push_back(*b.logloss);
    result.report.records.insert(result.report.records.end(), {a, b, raw});
  }

  std::vector<double> sa, ta, ra;
  for (const auto& s : result.seeds) {
    sa.push_back(s.shifting_auc);
    ta.push_back(s.train_auc);
    ra.push_back(s.raw_teacher_auc);
  }
  result.mean_shifting_auc = mean_of(sa);
  result.mean_train_auc = mean_of(ta);
  result.mean_raw_teacher_auc = mean_of(ra);

  PhaseRecord ms{"shifting_pretrained/mean", "test", result.mean_shifting_auc, mean_of(shift_ll)};
  PhaseRecord mt{"train_pretrained/mean", "test", result.mean_train_auc, mean_of(train_ll)};
  result.report.records.push_back(ms);
  result.report.records.push_back(mt);
  result.report.notes.emplace_back(
      "winner", result.shifting_wins() ? "shifting_pretrained" : "train_pretrained");
  result.report.notes.emplace_back(
      "auc_gap", fmt::format("{:.4f}", result.mean_shifting_auc - result.mean_train_auc));
  return result;
}

std::vector<std::int64_t> default_windows(const Dataset& dataset,
                                          const data::SplitOptions& options) {
  const auto split = data::split_temporal(dataset, options);
  const auto first = data::day_bucket(dataset.min_timestamp().value_or(0), options.seconds_per_day);
  const auto end = split.train_end_day;
  std::vector<std::int64_t> out;
  for (std::int64_t len = options.train_days; end - len + 1 > first; len *= 2) {
    out.push_back(end - len + 1);
  }
  out.push_back(first);
  return out;
}

std::vector<CurvePoint> run_shift_curve(const Dataset& dataset, const data::SplitOptions& options,
                                        const TrainConfig& cfg,
                                        std::span<const std::int64_t> windows,
                                        std::span<const std::uint64_t> seeds,
                                        const ModelBuilder& builder) {
  if (seeds.empty()) throw ConfigError("shift curve needs at least one seed");
  const auto split = data::split_temporal(dataset, options);
  const auto end = split.train_end_day;
  const auto dims = cfg.dims(dataset.schema().cardinalities());

  std::vector<CurvePoint> curve;
  for (const auto start : windows) {
    if (start > end) {
      throw ConfigError(fmt::format("shift window start {} is after the last train day {}",
                                    start, end));
    }
    const auto window = data::select_days(dataset, start, end, options.seconds_per_day);
    CurvePoint point{start, end - start + 1, window.size(), 0.0, 0.0};
    std::vector<double> aucs, losses;
    for (const auto seed : seeds) {
      auto run_cfg = cfg;
      run_cfg.seed = seed;
      auto rng = make_rng(seed, "original");
      std::unique_ptr<models::Model> model =
          builder ? builder(dims, rng) : std::make_unique<models::OriginalModel>(dims, rng);
      fit_binary(*model, window,
                 {.epochs = run_cfg.effective_original_epochs(),
                  .batch_size = run_cfg.batch_size,
                  .lr = run_cfg.lr_for(run_cfg.finetune_lr),
                  .seed = seed,
                  .tag = "original",
                  .forward = {}});
      const auto m = evaluate(*model, split.test);
      aucs.push_back(require_auc(m.auc));
      losses.push_back(m.logloss);
    }
    point.auc = mean_of(aucs);
    point.logloss = mean_of(losses);
    curve.push_back(point);
  }
  return curve;
}

TimingEntry time_inference(const TimedModel& model, const Dataset& rows, int repeats,
                           std::size_t max_rows) {
  const auto n = std::min(rows.size(), max_rows);
  TimingEntry entry;
  entry.name = model.name;
  if (n == 0) return entry;
  for (int rep = 0; rep < std::max(3, repeats); ++rep) {
    const auto calls = retrieval::total_query_count();
    const auto start = std::chrono::steady_clock::now();
    double sink = 0.0;
    for (std::size_t i = 0; i < n; ++i) sink += model.model->predict(rows[i]);
    const double ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
            .count();
    entry.retrieval_calls = retrieval::total_query_count() - calls;
    // Keeps the predictions observable so the loop is not optimised away.
    volatile double keep = sink;
    (void)keep;
    entry.samples_ms_per_1k.push_back(ms * 1000.0 / static_cast<double>(n));
  }
  entry.median_ms_per_1k = median_of(entry.samples_ms_per_1k);
  return entry;
}

const TimingEntry* TimingResult::find(std::string_view name) const {
  for (const auto& e : models) {
    if (e.name == name) return &e;
  }
  return nullptr;
}

bool TimingResult::distill_retrieval_free() const {
  const auto* d = find("distill_framework");
  return d != nullptr && d->retrieval_calls == 0;
}

bool TimingResult::retrieval_queries_index() const {
  const auto* r = find("retrieval_framework");
  return r != nullptr && r->retrieval_calls > 0;
}

bool TimingResult::grows_with_k() const {
  if (k_sweep.size() < 2) return false;
  const auto lo = std::ranges::min_element(k_sweep, {}, &TimingEntry::k);
  const auto hi = std::ranges::max_element(k_sweep, {}, &TimingEntry::k);
  return hi->median_ms_per_1k > lo->median_ms_per_1k;
}

TimingResult timing_report(const models::OriginalModel& original,
                           models::RetrievalFramework& retrieval,
                           const models::DistillFramework& distill, const Dataset& test,
                           const ExperimentConfig& experiments) {
  const auto rows = static_cast<std::size_t>(experiments.timing_rows);
  const int reps = experiments.timing_repeats;
  auto& network = retrieval.relevance().network();
  const auto k0 = network.k();

  TimingResult result;
  result.models.push_back(time_inference({"original", &original}, test, reps, rows));
  auto r = time_inference({"retrieval_framework", &retrieval}, test, reps, rows);
  r.k = k0;
  result.models.push_back(r);
  result.models.push_back(time_inference({"distill_framework", &distill}, test, reps, rows));

  for (const int k : experiments.timing_ks) {
    network.set_k(static_cast<std::size_t>(k));
    auto e = time_inference({"retrieval_framework", &retrieval}, test, reps, rows);
    e.k = static_cast<std::size_t>(k);
    result.k_sweep.push_back(e);
  }
  network.set_k(k0);
  return result;
}

}  // namespace rad::pipeline
