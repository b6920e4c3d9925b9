#pragma once

#include <cstdint>
#include <optional>

#include "rad/data/dataset.hpp"

namespace rad::data {

// Day buckets are floor(timestamp / seconds_per_day). With day-index
// timestamps use seconds_per_day = 1.
struct SplitOptions {
  int train_days = 1;
  int test_days = 1;
  std::int64_t seconds_per_day = 1;
};

// The three chronological partitions. Boundaries are the last day bucket of
// each part; shift_end is empty when the search space is empty.
struct TemporalSplit {
  Dataset shifting;
  Dataset train;
  Dataset test;
  std::optional<std::int64_t> shift_end_day;
  std::int64_t train_end_day = 0;
  std::int64_t test_end_day = 0;
};

std::int64_t day_bucket(std::int64_t timestamp, std::int64_t seconds_per_day);

// Test = newest test_days distinct day buckets, train = the train_days before
// that, shifting = everything older. Rows keep their original order and ids.
TemporalSplit split_temporal(const Dataset& dataset, const SplitOptions& options);

// Rows whose day bucket lies in [first_day, last_day].
Dataset select_days(const Dataset& dataset, std::int64_t first_day, std::int64_t last_day,
                    std::int64_t seconds_per_day = 1);

}  // namespace rad::data
