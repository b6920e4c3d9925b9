#include "rad/pipeline/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

#include "rad/error.hpp"
#include "rad/nn/ops.hpp"

namespace rad::pipeline {

double auc(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  if (scores.size() != labels.size()) throw MetricError("scores and labels differ in length");
  const auto n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::ranges::sort(order, [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Sum of (1-based, tie-averaged) ranks of the positives. Ranks are
  // multiples of 0.5, so every intermediate value is exact in double.
  double positive_ranks = 0.0;
  std::size_t positives = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t t = i; t < j; ++t) {
      if (labels[order[t]] != 0) {
        positive_ranks += avg_rank;
        ++positives;
      }
    }
    i = j;
  }
  const auto negatives = n - positives;
  if (positives == 0 || negatives == 0) {
    throw MetricError("AUC is undefined for a single-class set");
  }
  const double p = static_cast<double>(positives);
  const double u = positive_ranks - p * (p + 1.0) / 2.0;
  return u / (p * static_cast<double>(negatives));
}

double logloss(std::span<const double> probabilities, std::span<const std::uint8_t> labels) {
  if (probabilities.size() != labels.size()) {
    throw MetricError("probabilities and labels differ in length");
  }
  if (probabilities.empty()) throw MetricError("logloss of an empty set");
  double total = 0.0;
  for (std::size_t i = 0; i < probabilities.size(); ++i) {
    total += nn::bce_value(probabilities[i], labels[i]);
  }
  return total / static_cast<double>(probabilities.size());
}

Metrics compute_metrics(std::span<const double> probabilities,
                        std::span<const std::uint8_t> labels) {
  Metrics m;
  m.logloss = logloss(probabilities, labels);
  const bool has_pos = std::ranges::any_of(labels, [](auto y) { return y != 0; });
  const bool has_neg = std::ranges::any_of(labels, [](auto y) { return y == 0; });
  if (has_pos && has_neg) m.auc = auc(probabilities, labels);
  return m;
}

}  // namespace rad::pipeline
