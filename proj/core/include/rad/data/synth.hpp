#pragma once

#include <cstdint>

#include "rad/data/dataset.hpp"

namespace rad::data {

// Parameters of the drifting click-log generator.
struct SynthConfig {
  int n_users = 1000;
  int n_items = 500;
  int n_categories = 20;
  int n_clusters = 8;
  int days = 60;
  int rows_per_day = 1000;
  double drift_angle_per_day = 0.0698131700797732;  // pi / 45
  double association_strength = 1.0;
  double drift_strength = 1.0;
  double noise_std = 0.5;
  std::uint64_t seed = 7;

  // Throws ConfigError naming the first offending field.
  void validate() const;
};

// Emits columns (user, item, category), a binary label and timestamp = day
// index. Each label is Bernoulli(sigmoid(s_a * A[cluster(user)][category(item)]
// + s_d * <theta_day, P * onehot(user, item, category)> + eps)), where A is a
// fixed association matrix, theta_day is theta_0 rotated by day * angle in a
// fixed 2-plane, P a fixed Gaussian projection and eps ~ N(0, noise_std).
// Identical configs produce identical datasets.
Dataset generate_synthetic_shift(const SynthConfig& config);

}  // namespace rad::data
