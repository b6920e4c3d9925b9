// rad: synthetic data preparation, phase-by-phase training runs, experiments
// and checkpoint evaluation. Exit codes: 0 ok, 1 internal error, 2 bad config
// or arguments, 3 phase run out of order.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "rad/data/io.hpp"
#include "rad/data/split.hpp"
#include "rad/data/synth.hpp"
#include "rad/error.hpp"
#include "rad/nn/checkpoint.hpp"
#include "rad/pipeline/config.hpp"
#include "rad/pipeline/experiments.hpp"
#include "rad/pipeline/rad.hpp"
#include "rad/pipeline/report.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace rad;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitConfig = 2;
constexpr int kExitPhase = 3;

const std::vector<std::string> kExperiments{"invariance", "shift-curve", "timing"};

struct Options {
  std::string config;
  std::string workdir = ".";
  std::optional<std::uint64_t> seed;
  bool record_wall_clock = false;

  // synth
  std::string out = "data";
  // run
  std::string phase;
  bool freeze_relevance = false;
  // experiment
  std::string experiment;
  // eval
  std::string checkpoint;
  std::string data;
};

fs::path resolve(const fs::path& workdir, const fs::path& p) {
  return p.is_absolute() ? p : workdir / p;
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << text;
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read '" + path.string() + "'");
  return json::parse(in);
}

// Config file (if any), then RAD_SEED, then flags.
pipeline::PipelineConfig resolve_config(const Options& opt) {
  const fs::path workdir = opt.workdir;
  auto cfg = opt.config.empty() ? pipeline::PipelineConfig{}
                                 : pipeline::load_config(resolve(workdir, opt.config));
  if (const char* env = std::getenv("RAD_SEED"); env != nullptr && *env != '\0') {
    try {
      std::size_t used = 0;
      cfg.train.seed = std::stoull(env, &used);
      if (used != std::string(env).size()) throw std::invalid_argument(env);
    } catch (const std::exception&) {
      throw ConfigError(std::string("RAD_SEED is not an unsigned integer: '") + env + "'");
    }
  }
  if (opt.seed) cfg.train.seed = *opt.seed;
  if (opt.freeze_relevance) cfg.train.freeze_relevance = true;
  if (opt.record_wall_clock) cfg.record_wall_clock = true;
  cfg.validate();
  return cfg;
}

data::TemporalSplit load_split(const pipeline::PipelineConfig& cfg, const fs::path& workdir) {
  const auto dataset = pipeline::load_data(cfg.data, workdir);
  return data::split_temporal(dataset, cfg.split);
}

int cmd_synth(const Options& opt) {
  const auto cfg = resolve_config(opt);
  const auto out_dir = resolve(opt.workdir, opt.out);
  fs::create_directories(out_dir);
  const auto dataset = data::generate_synthetic_shift(cfg.data.synth);
  data::save_dataset(dataset, out_dir / "synthetic.radd");
  data::write_csv(dataset, out_dir / "synthetic.csv");
  std::cout << fmt::format("wrote {} rows to {} and {}\n", dataset.size(),
                           (out_dir / "synthetic.radd").string(),
                           (out_dir / "synthetic.csv").string());
  return kExitOk;
}

fs::path records_path(const fs::path& workdir, pipeline::Phase phase) {
  return workdir / "records" / (std::string(pipeline::phase_name(phase)) + ".json");
}

int cmd_run(const Options& opt) {
  const fs::path workdir = opt.workdir;
  const auto cfg = resolve_config(opt);
  std::optional<pipeline::Phase> only;
  if (!opt.phase.empty()) {
    only = pipeline::parse_phase(opt.phase);
    if (!only) {
      std::string names;
      for (auto p : pipeline::kAllPhases) names += std::string(names.empty() ? "" : ", ") +
                                                   std::string(pipeline::phase_name(p));
      throw ConfigError("unknown phase '" + opt.phase + "'; valid phases: " + names);
    }
  }

  const auto ckpt_dir = workdir / "checkpoints";
  pipeline::RadPipeline rad(load_split(cfg, workdir), cfg.train, cfg.record_wall_clock);
  if (only) {
    if (const auto pre = pipeline::prerequisite(*only); pre && !rad.load(*pre, ckpt_dir)) {
      throw PhaseError(fmt::format("phase '{}' needs the checkpoints of phase '{}' in {}",
                                   pipeline::phase_name(*only), pipeline::phase_name(*pre),
                                   ckpt_dir.string()));
    }
  } else {
    // A full run starts from scratch.
    fs::remove_all(workdir / "records");
  }

  std::vector<pipeline::Phase> phases;
  if (only) {
    phases.push_back(*only);
  } else {
    phases.assign(pipeline::kAllPhases.begin(), pipeline::kAllPhases.end());
  }
  std::vector<std::string> written;
  for (const auto phase : phases) {
    std::cerr << "phase " << pipeline::phase_name(phase) << "\n";
    pipeline::ExperimentReport part;
    part.title = std::string(pipeline::phase_name(phase));
    part.records = rad.run(phase);
    rad.save(phase, ckpt_dir);
    for (const auto& f : pipeline::RadPipeline::checkpoint_files(phase)) {
      written.push_back((fs::path("checkpoints") / f).string());
      written.push_back(nn::manifest_path(fs::path("checkpoints") / f).string());
    }
    write_text(records_path(workdir, phase), pipeline::to_json(part).dump(2) + "\n");
  }
  rad.index()->save(ckpt_dir / "index.radi");
  written.push_back("checkpoints/index.radi");

  // The report gathers every phase recorded so far, in phase order.
  pipeline::ExperimentReport report;
  report.title = "rad run";
  for (const auto phase : pipeline::kAllPhases) {
    const auto p = records_path(workdir, phase);
    if (fs::exists(p)) report.append(pipeline::report_from_json(read_json(p)).records);
  }
  pipeline::write_report(report, workdir / "report");
  write_text(workdir / "resolved_config.json", pipeline::to_json(cfg).dump(2) + "\n");

  json manifest = {
      {"config_file", opt.config},
      {"resolved_config", "resolved_config.json"},
      {"config", pipeline::to_json(cfg)},
      {"freeze_relevance", cfg.train.freeze_relevance},
      {"input", cfg.data.path ? cfg.data.path->string() : std::string("synthetic")},
      {"phases", json::array()},
      {"checkpoints", written},
      {"reports", {"report.tsv", "report.json"}},
  };
  for (const auto phase : phases) manifest["phases"].push_back(pipeline::phase_name(phase));
  write_text(workdir / "manifest.json", manifest.dump(2) + "\n");

  std::cout << pipeline::format_table(report);
  return kExitOk;
}

int cmd_experiment(const Options& opt) {
  if (std::ranges::find(kExperiments, opt.experiment) == kExperiments.end()) {
    std::string names;
    for (const auto& n : kExperiments) names += (names.empty() ? "" : ", ") + n;
    throw ConfigError("unknown experiment '" + opt.experiment + "'; valid names: " + names);
  }
  const fs::path workdir = opt.workdir;
  const auto cfg = resolve_config(opt);
  const auto out = workdir / "experiments" / opt.experiment;
  fs::create_directories(out.parent_path());

  if (opt.experiment == "invariance") {
    const auto split = load_split(cfg, workdir);
    const auto result = pipeline::run_invariance_experiment(split, cfg.train,
                                                            cfg.experiments.seeds,
                                                            cfg.record_wall_clock);
    pipeline::write_report(result.report, out);
    std::string csv = "seed,shifting_pretrained_auc,train_pretrained_auc,raw_teacher_auc\n";
    for (const auto& s : result.seeds) {
      csv += fmt::format("{},{:.4f},{:.4f},{:.4f}\n", s.seed, s.shifting_auc, s.train_auc,
                         s.raw_teacher_auc);
    }
    write_text(out.string() + ".csv", csv);
    std::cout << pipeline::format_table(result.report);
  } else if (opt.experiment == "shift-curve") {
    const auto dataset = pipeline::load_data(cfg.data, workdir);
    auto windows = cfg.experiments.shift_windows;
    if (windows.empty()) windows = pipeline::default_windows(dataset, cfg.split);
    const auto curve = pipeline::run_shift_curve(dataset, cfg.split, cfg.train, windows,
                                                 cfg.experiments.seeds);
    pipeline::ExperimentReport report;
    report.title = "shift-curve";
    std::string csv = "start_day,days,rows,auc,logloss\n";
    for (const auto& p : curve) {
      report.records.push_back({fmt::format("window/start{}", p.start_day), "test", p.auc,
                                p.logloss, 0.0, 0});
      csv += fmt::format("{},{},{},{:.4f},{:.4f}\n", p.start_day, p.days, p.rows, p.auc,
                         p.logloss);
    }
    pipeline::write_report(report, out);
    write_text(out.string() + ".csv", csv);
    std::cout << csv;
  } else {
    pipeline::RadPipeline rad(load_split(cfg, workdir), cfg.train);
    rad.run_all();
    const auto timing = pipeline::timing_report(rad.original(), rad.retrieval_framework(),
                                                rad.distill_framework(), rad.split().test,
                                                cfg.experiments);
    std::string csv = "model,k,median_ms_per_1k,retrieval_calls\n";
    pipeline::ExperimentReport report;
    report.title = "timing";
    auto add = [&](const pipeline::TimingEntry& e, const std::string& name) {
      csv += fmt::format("{},{},{:.3f},{}\n", name, e.k, e.median_ms_per_1k, e.retrieval_calls);
      report.records.push_back({name, "test", std::nullopt, std::nullopt, e.median_ms_per_1k,
                                e.retrieval_calls});
    };
    for (const auto& e : timing.models) add(e, e.name);
    for (const auto& e : timing.k_sweep) add(e, fmt::format("{}/k{}", e.name, e.k));
    report.notes.emplace_back("distill_retrieval_free", timing.distill_retrieval_free() ? "yes" : "no");
    report.notes.emplace_back("retrieval_grows_with_k", timing.grows_with_k() ? "yes" : "no");
    pipeline::write_report(report, out);
    write_text(out.string() + ".csv", csv);
    std::cout << csv;
  }
  return kExitOk;
}

int cmd_eval(const Options& opt) {
  const fs::path workdir = opt.workdir;
  const auto manifest_path = workdir / "manifest.json";
  if (!fs::exists(manifest_path)) {
    throw PhaseError("no run manifest in " + workdir.string() + "; run `rad run` first");
  }
  const auto cfg = pipeline::parse_config(read_json(manifest_path).at("config"));
  const auto ckpt = resolve(workdir, opt.checkpoint);
  if (!fs::exists(ckpt)) throw PhaseError("checkpoint '" + ckpt.string() + "' does not exist");

  pipeline::RadPipeline rad(load_split(cfg, workdir), cfg.train);
  const auto name = ckpt.stem().string();
  auto* model = rad.model_by_name(name);
  if (model == nullptr) {
    throw ConfigError("'" + name + "' is not an evaluable model checkpoint");
  }
  nn::load_checkpoint(ckpt, model->parameters(),
                      models::architecture_manifest(model->kind(), rad.dims()));
  const auto rows = data::load_any(resolve(workdir, opt.data), rad.split().train.schema_ptr());
  const auto m = pipeline::evaluate(*model, rows);
  pipeline::ExperimentReport report;
  report.title = "eval";
  report.records.push_back({name, "data", m.auc, m.logloss, 0.0, 0});
  std::cout << pipeline::format_table(report);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Retrieval-augmented CTR training under temporal shift"};
  app.require_subcommand(1);
  Options opt;
  app.add_option("--config", opt.config, "JSON config file");
  app.add_option("--workdir", opt.workdir, "Base directory for every relative path");
  app.add_option("--seed", opt.seed, "Override train.seed (wins over RAD_SEED)");
  app.add_flag("--record-wall-clock", opt.record_wall_clock,
               "Put wall-clock milliseconds into reports");

  auto* synth = app.add_subcommand("synth", "Generate the synthetic drifting dataset");
  synth->add_option("--out", opt.out, "Output directory");

  auto* run = app.add_subcommand("run", "Train every phase, or one with --phase");
  run->add_option("--phase", opt.phase,
                  "original, pretrain, finetune, distill or distill-finetune");
  run->add_flag("--freeze-relevance", opt.freeze_relevance,
                "Keep the transferred relevance network fixed while finetuning");

  auto* experiment = app.add_subcommand("experiment", "Run invariance, shift-curve or timing");
  experiment->add_option("name", opt.experiment, "Experiment name")->required();

  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint on a dataset");
  eval->add_option("--checkpoint", opt.checkpoint, "Model checkpoint (.radw)")->required();
  eval->add_option("--data", opt.data, "CSV or RADD file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*synth) return cmd_synth(opt);
    if (*run) return cmd_run(opt);
    if (*experiment) return cmd_experiment(opt);
    if (*eval) return cmd_eval(opt);
  } catch (const PhaseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitPhase;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const SchemaError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const SplitError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const EmptyDatasetError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitInternal;
}
