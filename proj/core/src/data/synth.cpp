#include "rad/data/synth.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "rad/error.hpp"

namespace rad::data {

void SynthConfig::validate() const {
  auto positive = [](int v, const char* field) {
    if (v <= 0) throw ConfigError(std::string("synth.") + field + " must be positive");
  };
  positive(n_users, "n_users");
  positive(n_items, "n_items");
  positive(n_categories, "n_categories");
  positive(n_clusters, "n_clusters");
  positive(days, "days");
  positive(rows_per_day, "rows_per_day");
  if (!(drift_angle_per_day >= 0.0 && drift_angle_per_day <= std::numbers::pi)) {
    throw ConfigError("synth.drift_angle_per_day must lie in [0, pi]");
  }
  if (!std::isfinite(association_strength)) {
    throw ConfigError("synth.association_strength must be finite");
  }
  if (!std::isfinite(drift_strength)) throw ConfigError("synth.drift_strength must be finite");
  if (!(noise_std >= 0.0) || !std::isfinite(noise_std)) {
    throw ConfigError("synth.noise_std must be a finite non-negative number");
  }
}

Dataset generate_synthetic_shift(const SynthConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);
  std::uniform_int_distribution<int> pick_cluster(0, cfg.n_clusters - 1);
  std::uniform_int_distribution<int> pick_category(0, cfg.n_categories - 1);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  std::vector<int> cluster(static_cast<std::size_t>(cfg.n_users));
  for (auto& g : cluster) g = pick_cluster(rng);
  std::vector<int> category(static_cast<std::size_t>(cfg.n_items));
  for (auto& c : category) c = pick_category(rng);

  std::vector<double> association(static_cast<std::size_t>(cfg.n_clusters * cfg.n_categories));
  for (auto& a : association) a = unit(rng);

  // Projection of the concatenated one-hot (user | item | category) into the
  // drift space. Only the two rotating coordinates ever reach the logit, so
  // only those rows of P are materialised; each entry has variance 1/3 so the
  // projected feature has unit variance.
  const auto width = static_cast<std::size_t>(cfg.n_users + cfg.n_items + cfg.n_categories);
  const double scale = 1.0 / std::sqrt(3.0);
  std::vector<double> proj0(width), proj1(width);
  for (std::size_t j = 0; j < width; ++j) {
    proj0[j] = scale * gauss(rng);
    proj1[j] = scale * gauss(rng);
  }

  auto schema = std::make_shared<Schema>(std::vector<std::string>{"user", "item", "category"},
                                         "label", "timestamp");
  std::uniform_int_distribution<int> pick_user(0, cfg.n_users - 1);
  std::uniform_int_distribution<int> pick_item(0, cfg.n_items - 1);
  std::uniform_real_distribution<double> coin(0.0, 1.0);

  std::vector<Sample> rows;
  rows.reserve(static_cast<std::size_t>(cfg.days) * static_cast<std::size_t>(cfg.rows_per_day));
  for (int day = 0; day < cfg.days; ++day) {
    // theta_day = cos(phi) e0 + sin(phi) e1
    const double phi = cfg.drift_angle_per_day * day;
    const double c0 = std::cos(phi);
    const double c1 = std::sin(phi);
    for (int r = 0; r < cfg.rows_per_day; ++r) {
      const int u = pick_user(rng);
      const int i = pick_item(rng);
      const int c = category[static_cast<std::size_t>(i)];
      const auto ju = static_cast<std::size_t>(u);
      const auto ji = static_cast<std::size_t>(cfg.n_users + i);
      const auto jc = static_cast<std::size_t>(cfg.n_users + cfg.n_items + c);
      const double phi0 = proj0[ju] + proj0[ji] + proj0[jc];
      const double phi1 = proj1[ju] + proj1[ji] + proj1[jc];
      const double assoc =
          association[static_cast<std::size_t>(cluster[ju] * cfg.n_categories + c)];
      const double logit = cfg.association_strength * assoc +
                           cfg.drift_strength * (c0 * phi0 + c1 * phi1) +
                           cfg.noise_std * gauss(rng);
      const double p = 1.0 / (1.0 + std::exp(-logit));

      Sample s;
      s.row_id = static_cast<RowId>(rows.size());
      s.features = {schema->intern(0, "u" + std::to_string(u)),
                    schema->intern(1, "i" + std::to_string(i)),
                    schema->intern(2, "c" + std::to_string(c))};
      s.label = coin(rng) < p ? 1 : 0;
      s.timestamp = day;
      rows.push_back(std::move(s));
    }
  }
  return Dataset(std::move(schema), std::move(rows));
}

}  // namespace rad::data
