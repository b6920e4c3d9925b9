// Acceptance gate. Prints one PASS/FAIL line per criterion and exits non-zero
// if any selected criterion fails. With no arguments runs 1..9; otherwise
// only the listed criterion numbers.

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sys/wait.h>

#include <fmt/format.h>

#include "grad_cases.hpp"
#include "oracles.hpp"
#include "rad/data/synth.hpp"
#include "rad/pipeline/config.hpp"
#include "rad/pipeline/experiments.hpp"
#include "rad/pipeline/metrics.hpp"
#include "rad/pipeline/rad.hpp"
#include "rad/retrieval/inverted_index.hpp"
#include "test_util.hpp"

namespace rad {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Verdict {
  bool pass = false;
  std::string detail;
};

double mean(const std::vector<double>& xs) {
  double s = 0;
  for (double x : xs) s += x;
  return xs.empty() ? 0.0 : s / static_cast<double>(xs.size());
}

std::string join(const std::vector<double>& xs) {
  std::string out;
  for (double x : xs) out += fmt::format("{}{:.4f}", out.empty() ? "" : " ", x);
  return out;
}

pipeline::PipelineConfig shipped_config() {
  return pipeline::load_config(RAD_SOURCE_DIR "/configs/synthetic.json");
}

// 1: top-k retrieval equals the brute-force scorer.
Verdict retrieval_oracle() {
  const auto start = Clock::now();
  std::mt19937_64 rng(101);
  std::size_t queries = 0, mismatches = 0;
  for (int d = 0; d < 100; ++d) {
    const std::size_t rows = 1 + rng() % 500;
    const std::size_t cols = 1 + rng() % 6;
    const auto vocab = static_cast<std::uint32_t>(2 + rng() % 30);
    auto dataset =
        std::make_shared<const data::Dataset>(test::random_dataset(rng, rows, cols, vocab));
    const retrieval::InvertedIndex index(dataset);
    for (int q = 0; q < 50; ++q, ++queries) {
      std::vector<data::ValueIndex> query(cols);
      for (auto& v : query) v = static_cast<data::ValueIndex>(rng() % vocab);
      const std::size_t k = 1 + rng() % 20;
      std::set<data::RowId> exclude;
      if (rng() % 2 == 0) exclude.insert(static_cast<data::RowId>(rng() % rows));
      const std::vector<data::RowId> ex(exclude.begin(), exclude.end());
      const auto got = index.retrieve_topk(query, k, ex);
      const auto want = oracle::brute_topk(*dataset, query, k, exclude);
      bool same = got.size() == want.size();
      for (std::size_t i = 0; same && i < got.size(); ++i) {
        same = got[i].row_id == want[i].row_id && std::abs(got[i].score - want[i].score) <= 1e-9;
      }
      mismatches += same ? 0 : 1;
    }
  }
  const double secs = seconds_since(start);
  return {mismatches == 0 && secs < 30.0,
          fmt::format("{} queries over 100 datasets, {} mismatches, {:.1f}s (limit 30s)", queries,
                      mismatches, secs)};
}

// 2: every differentiable op against central differences.
Verdict gradient_suite() {
  const auto start = Clock::now();
  const auto cases = gradcheck::all_cases();
  double worst = 0.0;
  std::string worst_op;
  int runs = 0;
  for (const auto& c : cases) {
    for (std::uint64_t seed = 1; seed <= 6; ++seed, ++runs) {
      const double err = gradcheck::run_case(c, 1000 + seed);
      if (err > worst) worst = err, worst_op = c.op;
    }
  }
  const double secs = seconds_since(start);
  return {runs >= 100 && worst < 1e-6 && secs < 60.0,
          fmt::format("{} cases over {} ops, max abs error {:.2e} ({}), {:.1f}s", runs,
                      cases.size(), worst, worst_op, secs)};
}

// 3: rank AUC equals pair counting.
Verdict auc_oracle() {
  const std::vector<double> hs{0.9, 0.8, 0.4, 0.3};
  const std::vector<std::uint8_t> hy{1, 0, 1, 0};
  const double hand = pipeline::auc(hs, hy);
  std::mt19937_64 rng(303);
  int exact = 0;
  for (int round = 0; round < 50; ++round) {
    const std::size_t n = 2 + rng() % 1999;
    std::vector<double> s(n);
    std::vector<std::uint8_t> y(n);
    const bool coarse = round % 2 == 0;  // every other set is tie-heavy
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = coarse ? static_cast<double>(rng() % 50) / 50.0
                    : std::uniform_real_distribution<double>(0, 1)(rng);
      y[i] = static_cast<std::uint8_t>(rng() % 2);
    }
    y[0] = 1;
    y[1] = 0;
    exact += pipeline::auc(s, y) == oracle::pair_count_auc(s, y) ? 1 : 0;
  }
  return {hand == 0.75 && exact == 50,
          fmt::format("hand case {:.4f}, {}/50 random sets exact", hand, exact)};
}

// Per-seed runs of the full pipeline on the shipped config, shared by 4.
struct Table1 {
  std::vector<double> original, retrieval, distill, teacher;
  double secs = 0.0;
};

const Table1& table1() {
  static std::optional<Table1> cached;
  if (cached) return *cached;
  const auto cfg = shipped_config();
  const auto split = data::split_temporal(pipeline::load_data(cfg.data), cfg.split);
  Table1 t;
  const auto start = Clock::now();
  for (const auto seed : cfg.experiments.seeds) {
    auto train = cfg.train;
    train.seed = seed;
    const auto report = pipeline::run_rad(split, train);
    t.original.push_back(*report.find("original")->auc);
    t.retrieval.push_back(*report.find("retrieval_framework")->auc);
    t.distill.push_back(*report.find("distill_framework")->auc);
    t.teacher.push_back(*report.find("teacher_retrieval")->auc);
    std::cerr << fmt::format("  seed {}: original {:.4f} retrieval {:.4f} distill {:.4f}\n", seed,
                             t.original.back(), t.retrieval.back(), t.distill.back());
  }
  t.secs = seconds_since(start);
  cached = t;
  return *cached;
}

// 4: Original < Distill < Retrieval on the shipped config.
Verdict table1_ordering() {
  const auto& t = table1();
  const double o = mean(t.original), r = mean(t.retrieval), d = mean(t.distill);
  const bool pass = r - o >= 0.02 && d - o >= 0.005 && d <= r + 0.005 && t.secs < 900.0;
  return {pass,
          fmt::format("mean AUC original {:.4f}, distill {:.4f}, retrieval {:.4f}; "
                      "R-O {:+.4f} (>= +0.02), D-O {:+.4f} (>= +0.005), D-R {:+.4f} (<= +0.005), "
                      "{:.0f}s (limit 900s)",
                      o, d, r, r - o, d - o, d - r, t.secs)};
}

struct Invariance {
  pipeline::InvarianceResult drifting, control;
};

const Invariance& invariance() {
  static std::optional<Invariance> cached;
  if (cached) return *cached;
  auto cfg = shipped_config();
  const auto& seeds = cfg.experiments.seeds;
  Invariance inv;
  inv.drifting = pipeline::run_invariance_experiment(
      data::split_temporal(pipeline::load_data(cfg.data), cfg.split), cfg.train, seeds);
  cfg.data.synth.drift_strength = 0.0;
  inv.control = pipeline::run_invariance_experiment(
      data::split_temporal(pipeline::load_data(cfg.data), cfg.split), cfg.train, seeds);
  cached = inv;
  return *cached;
}

// 5: frozen relevance pretrained on D_shifting beats one pretrained on D_train.
Verdict pretraining_source() {
  const auto& inv = invariance();
  const double gap = inv.drifting.mean_shifting_auc - inv.drifting.mean_train_auc;
  const double control_gap = inv.control.mean_shifting_auc - inv.control.mean_train_auc;
  return {gap > 0.0 && std::abs(control_gap) <= 0.02,
          fmt::format("drifting: shifting {:.4f} vs train {:.4f} (gap {:+.4f}, needs > 0); "
                      "zero-drift gap {:+.4f} (needs within 0.02)",
                      inv.drifting.mean_shifting_auc, inv.drifting.mean_train_auc, gap,
                      control_gap)};
}

// 6: training-window curve peaks at the newest window.
Verdict shift_curve() {
  auto cfg = shipped_config();
  auto curve_for = [&](const pipeline::PipelineConfig& c) {
    const auto dataset = pipeline::load_data(c.data);
    const auto windows = c.experiments.shift_windows.empty()
                             ? pipeline::default_windows(dataset, c.split)
                             : c.experiments.shift_windows;
    return pipeline::run_shift_curve(dataset, c.split, c.train, windows, c.experiments.seeds);
  };
  const auto drifting = curve_for(cfg);
  cfg.data.synth.drift_strength = 0.0;
  const auto control = curve_for(cfg);

  // Windows are ordered newest (shortest) first, full history last.
  const auto best = std::ranges::max_element(drifting, {}, &pipeline::CurvePoint::auc);
  const bool newest_best = best == drifting.begin();
  const double drop = drifting.front().auc - drifting.back().auc;
  double worst_dip = 0.0;
  for (std::size_t i = 1; i < control.size(); ++i) {
    worst_dip = std::max(worst_dip, control[i - 1].auc - control[i].auc);
  }
  std::vector<double> da, ca;
  for (const auto& p : drifting) da.push_back(p.auc);
  for (const auto& p : control) ca.push_back(p.auc);
  return {newest_best && drop >= 0.01 && worst_dip <= 0.01,
          fmt::format("drifting AUC by window [{}], best at start day {}, newest minus full "
                      "{:+.4f} (>= 0.01); zero-drift [{}], largest dip {:.4f} (<= 0.01)",
                      join(da), best->start_day, drop, join(ca), worst_dip)};
}

// 7: raw D_shifting teacher on drifted D_test hovers around 0.5, and its
// relevance lifts the framework (criterion 5's comparison).
Verdict raw_teacher() {
  const auto& inv = invariance();
  std::vector<double> raw;
  for (const auto& s : inv.drifting.seeds) raw.push_back(s.raw_teacher_auc);
  const double m = mean(raw);
  const bool lifts = inv.drifting.shifting_wins();
  return {m >= 0.42 && m <= 0.58 && lifts,
          fmt::format("raw teacher AUC per seed [{}], mean {:.4f} (needs [0.42, 0.58]); "
                      "shifting-pretrained relevance wins: {}",
                      join(raw), m, lifts ? "yes" : "no")};
}

// 8: distill framework never queries the index; inference cost stays close
// to the original model.
Verdict retrieval_freedom() {
  auto cfg = shipped_config();
  // Epoch counts do not affect either property; keep the run short.
  cfg.train.pretrain_epochs = 1;
  cfg.train.finetune_epochs = 1;
  cfg.train.kd_epochs = 1;
  pipeline::RadPipeline p(data::split_temporal(pipeline::load_data(cfg.data), cfg.split),
                          cfg.train);
  for (auto phase : {pipeline::Phase::kOriginal, pipeline::Phase::kPretrain,
                     pipeline::Phase::kFinetune, pipeline::Phase::kDistill}) {
    p.run(phase);
  }
  const auto before = retrieval::total_query_count();
  p.run(pipeline::Phase::kDistillFinetune);
  const auto during = retrieval::total_query_count() - before;
  const auto timing = pipeline::timing_report(p.original(), p.retrieval_framework(),
                                              p.distill_framework(), p.split().test,
                                              cfg.experiments);
  const double o = timing.find("original")->median_ms_per_1k;
  const double d = timing.find("distill_framework")->median_ms_per_1k;
  return {during == 0 && timing.distill_retrieval_free() && timing.retrieval_queries_index() &&
              d < 3.0 * o,
          fmt::format("index queries during distill finetune+eval: {}; timing calls distill {} "
                      "retrieval {}; median ms/1k rows original {:.2f}, distill {:.2f} "
                      "(ratio {:.2f}, needs < 3)",
                      during, timing.find("distill_framework")->retrieval_calls,
                      timing.find("retrieval_framework")->retrieval_calls, o, d, d / o)};
}

// 9: two CLI runs with the same config give byte-identical reports.
Verdict determinism() {
  test::TempDir a("rad-accept"), b("rad-accept");
  auto run = [](const test::TempDir& dir) {
    const std::string cmd = std::string(RAD_CLI_PATH) + " --config " RAD_SOURCE_DIR
                            "/configs/small.json --workdir " + dir.path().string() +
                            " run >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  };
  const int ra = run(a), rb = run(b);
  bool same = ra == 0 && rb == 0;
  std::string files;
  for (const char* f : {"report.tsv", "report.json"}) {
    const bool eq = test::read_file(a / f) == test::read_file(b / f) &&
                    !test::read_file(a / f).empty();
    same = same && eq;
    files += fmt::format(" {}={}", f, eq ? "identical" : "different");
  }
  return {same, fmt::format("exit codes {} {};{}", ra, rb, files)};
}

}  // namespace
}  // namespace rad

int main(int argc, char** argv) {
  using namespace rad;
  const std::map<int, std::pair<const char*, Verdict (*)()>> criteria{
      {1, {"retrieval oracle", retrieval_oracle}},
      {2, {"gradient suite", gradient_suite}},
      {3, {"AUC oracle", auc_oracle}},
      {4, {"original < distill < retrieval", table1_ordering}},
      {5, {"shifting-pretrained relevance wins", pretraining_source}},
      {6, {"training-window curve", shift_curve}},
      {7, {"raw teacher near 0.5", raw_teacher}},
      {8, {"distill is retrieval-free", retrieval_freedom}},
      {9, {"determinism", determinism}},
  };
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));
  if (selected.empty()) {
    for (const auto& [n, _] : criteria) selected.push_back(n);
  }
  int failures = 0;
  for (int n : selected) {
    const auto it = criteria.find(n);
    if (it == criteria.end()) {
      std::cout << "criterion " << n << ": FAIL (no such criterion)\n";
      ++failures;
      continue;
    }
    Verdict v;
    try {
      v = it->second.second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    std::cout << fmt::format("criterion {} ({}): {}: {}", n, it->second.first,
                             v.pass ? "PASS" : "FAIL", v.detail)
              << std::endl;
    failures += v.pass ? 0 : 1;
  }
  return failures == 0 ? 0 : 1;
}
