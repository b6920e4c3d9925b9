#include "rad/pipeline/config.hpp"

#include <fstream>
#include <set>

#include "rad/error.hpp"

namespace rad::pipeline {

using nlohmann::json;

namespace {

// Reads known keys of one config section, remembering which were consumed so
// leftovers can be reported.
class Section {
 public:
  Section(const json& j, std::string name) : j_(j), name_(std::move(name)) {
    if (!j_.is_object()) throw ConfigError("'" + name_ + "' must be an object");
  }

  template <typename T>
  void read(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(path(key) + ": " + e.what());
    }
  }

  const json* child(const char* key) {
    seen_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }

  std::string path(const char* key) const { return name_.empty() ? key : name_ + "." + key; }

  void finish() const {
    for (const auto& [key, _] : j_.items()) {
      if (!seen_.contains(key)) throw ConfigError("unknown config key '" + path(key.c_str()) + "'");
    }
  }

 private:
  const json& j_;
  std::string name_;
  std::set<std::string> seen_;
};

void parse_synth(const json& j, data::SynthConfig& s) {
  Section sec(j, "synth");
  sec.read("n_users", s.n_users);
  sec.read("n_items", s.n_items);
  sec.read("n_categories", s.n_categories);
  sec.read("n_clusters", s.n_clusters);
  sec.read("days", s.days);
  sec.read("rows_per_day", s.rows_per_day);
  sec.read("drift_angle_per_day", s.drift_angle_per_day);
  sec.read("association_strength", s.association_strength);
  sec.read("drift_strength", s.drift_strength);
  sec.read("noise_std", s.noise_std);
  sec.read("seed", s.seed);
  sec.finish();
}

void parse_train(const json& j, TrainConfig& t) {
  Section sec(j, "train");
  sec.read("pretrain_epochs", t.pretrain_epochs);
  sec.read("finetune_epochs", t.finetune_epochs);
  sec.read("kd_epochs", t.kd_epochs);
  sec.read("original_epochs", t.original_epochs);
  sec.read("batch_size", t.batch_size);
  sec.read("lr", t.lr);
  sec.read("pretrain_lr", t.pretrain_lr);
  sec.read("finetune_lr", t.finetune_lr);
  sec.read("kd_lr", t.kd_lr);
  sec.read("seed", t.seed);
  sec.read("k", t.k);
  sec.read("embed_dim", t.embed_dim);
  sec.read("hidden", t.hidden);
  sec.read("freeze_relevance", t.freeze_relevance);
  sec.finish();
}

}  // namespace

void TrainConfig::validate() const {
  auto non_negative = [](int v, const char* field) {
    if (v < 0) throw ConfigError(std::string("train.") + field + " must be >= 0");
  };
  auto positive = [](int v, const char* field) {
    if (v <= 0) throw ConfigError(std::string("train.") + field + " must be positive");
  };
  non_negative(pretrain_epochs, "pretrain_epochs");
  non_negative(finetune_epochs, "finetune_epochs");
  non_negative(kd_epochs, "kd_epochs");
  positive(batch_size, "batch_size");
  positive(k, "k");
  positive(embed_dim, "embed_dim");
  positive(hidden, "hidden");
  if (!(lr > 0.0)) throw ConfigError("train.lr must be positive");
  if (pretrain_lr < 0.0 || finetune_lr < 0.0 || kd_lr < 0.0) {
    throw ConfigError("train.*_lr overrides must be >= 0");
  }
}

models::ModelDims TrainConfig::dims(std::vector<std::uint32_t> cardinalities) const {
  return {std::move(cardinalities), static_cast<std::size_t>(embed_dim),
          static_cast<std::size_t>(hidden), static_cast<std::size_t>(k)};
}

void PipelineConfig::validate() const {
  if (!data.path) data.synth.validate();
  train.validate();
  if (split.train_days < 1) throw ConfigError("split.train_days must be >= 1");
  if (split.test_days < 1) throw ConfigError("split.test_days must be >= 1");
  if (split.seconds_per_day < 1) throw ConfigError("split.seconds_per_day must be >= 1");
  if (experiments.seeds.empty()) throw ConfigError("experiments.seeds must not be empty");
  if (experiments.timing_repeats < 3) throw ConfigError("experiments.timing_repeats must be >= 3");
  if (experiments.timing_rows < 1) throw ConfigError("experiments.timing_rows must be >= 1");
  for (int k : experiments.timing_ks) {
    if (k < 1) throw ConfigError("experiments.timing_ks entries must be >= 1");
  }
}

PipelineConfig parse_config(const json& j) {
  PipelineConfig cfg;
  Section root(j, "");
  if (const auto* d = root.child("data")) {
    Section sec(*d, "data");
    std::string path;
    sec.read("path", path);
    if (!path.empty()) cfg.data.path = path;
    sec.read("features", cfg.data.roles.features);
    sec.read("label", cfg.data.roles.label);
    sec.read("timestamp", cfg.data.roles.timestamp);
    sec.finish();
  }
  if (const auto* s = root.child("synth")) parse_synth(*s, cfg.data.synth);
  if (const auto* s = root.child("split")) {
    Section sec(*s, "split");
    sec.read("train_days", cfg.split.train_days);
    sec.read("test_days", cfg.split.test_days);
    sec.read("seconds_per_day", cfg.split.seconds_per_day);
    sec.finish();
  }
  if (const auto* t = root.child("train")) parse_train(*t, cfg.train);
  if (const auto* e = root.child("experiments")) {
    Section sec(*e, "experiments");
    sec.read("seeds", cfg.experiments.seeds);
    sec.read("shift_windows", cfg.experiments.shift_windows);
    sec.read("timing_ks", cfg.experiments.timing_ks);
    sec.read("timing_repeats", cfg.experiments.timing_repeats);
    sec.read("timing_rows", cfg.experiments.timing_rows);
    sec.finish();
  }
  root.read("record_wall_clock", cfg.record_wall_clock);
  root.finish();
  cfg.validate();
  return cfg;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("config '" + path.string() + "' is not valid JSON: " + e.what());
  }
  return parse_config(j);
}

data::Dataset load_data(const DataSource& source, const std::filesystem::path& base) {
  if (!source.path) return data::generate_synthetic_shift(source.synth);
  const auto path = source.path->is_absolute() || base.empty() ? *source.path : base / *source.path;
  if (path.extension() == ".csv") return data::load_csv(path, source.roles);
  return data::load_dataset(path);
}

json to_json(const PipelineConfig& cfg) {
  const auto& s = cfg.data.synth;
  const auto& t = cfg.train;
  json data = {{"features", cfg.data.roles.features},
               {"label", cfg.data.roles.label},
               {"timestamp", cfg.data.roles.timestamp}};
  if (cfg.data.path) data["path"] = cfg.data.path->string();
  return {
      {"data", data},
      {"synth",
       {{"n_users", s.n_users},
        {"n_items", s.n_items},
        {"n_categories", s.n_categories},
        {"n_clusters", s.n_clusters},
        {"days", s.days},
        {"rows_per_day", s.rows_per_day},
        {"drift_angle_per_day", s.drift_angle_per_day},
        {"association_strength", s.association_strength},
        {"drift_strength", s.drift_strength},
        {"noise_std", s.noise_std},
        {"seed", s.seed}}},
      {"split",
       {{"train_days", cfg.split.train_days},
        {"test_days", cfg.split.test_days},
        {"seconds_per_day", cfg.split.seconds_per_day}}},
      {"train",
       {{"pretrain_epochs", t.pretrain_epochs},
        {"finetune_epochs", t.finetune_epochs},
        {"kd_epochs", t.kd_epochs},
        {"original_epochs", t.original_epochs},
        {"batch_size", t.batch_size},
        {"lr", t.lr},
        {"pretrain_lr", t.pretrain_lr},
        {"finetune_lr", t.finetune_lr},
        {"kd_lr", t.kd_lr},
        {"seed", t.seed},
        {"k", t.k},
        {"embed_dim", t.embed_dim},
        {"hidden", t.hidden},
        {"freeze_relevance", t.freeze_relevance}}},
      {"experiments",
       {{"seeds", cfg.experiments.seeds},
        {"shift_windows", cfg.experiments.shift_windows},
        {"timing_ks", cfg.experiments.timing_ks},
        {"timing_repeats", cfg.experiments.timing_repeats},
        {"timing_rows", cfg.experiments.timing_rows}}},
      {"record_wall_clock", cfg.record_wall_clock},
  };
}

}  // namespace rad::pipeline
