#pragma once

#include <cstdint>
#include <optional>
#include <span>

namespace rad::pipeline {

// Area under the ROC curve via the Mann-Whitney rank statistic; tied scores
// receive half credit. Throws MetricError unless both classes are present.
double auc(std::span<const double> scores, std::span<const std::uint8_t> labels);

// Mean binary cross-entropy with probabilities clamped to [1e-7, 1 - 1e-7].
double logloss(std::span<const double> probabilities, std::span<const std::uint8_t> labels);

struct Metrics {
  std::optional<double> auc;  // empty for single-class sets
  double logloss = 0.0;
};

Metrics compute_metrics(std::span<const double> probabilities,
                        std::span<const std::uint8_t> labels);

}  // namespace rad::pipeline
