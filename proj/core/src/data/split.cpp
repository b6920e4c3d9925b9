#include "rad/data/split.hpp"

#include <algorithm>
#include <set>

#include "rad/error.hpp"

namespace rad::data {

std::int64_t day_bucket(std::int64_t timestamp, std::int64_t seconds_per_day) {
  // Floor division so pre-epoch timestamps bucket consistently.
  auto q = timestamp / seconds_per_day;
  if ((timestamp % seconds_per_day != 0) && ((timestamp < 0) != (seconds_per_day < 0))) --q;
  return q;
}

TemporalSplit split_temporal(const Dataset& dataset, const SplitOptions& options) {
  if (dataset.empty()) throw EmptyDatasetError("cannot split an empty dataset");
  if (options.train_days < 1 || options.test_days < 1) {
    throw SplitError("train_days and test_days must both be >= 1");
  }
  if (options.seconds_per_day < 1) throw SplitError("seconds_per_day must be >= 1");

  std::set<std::int64_t> day_set;
  for (const auto& s : dataset) day_set.insert(day_bucket(s.timestamp, options.seconds_per_day));
  const std::vector<std::int64_t> days(day_set.begin(), day_set.end());
  const auto needed = static_cast<std::size_t>(options.train_days + options.test_days);
  if (days.size() < needed) {
    throw SplitError("split needs " + std::to_string(needed) + " distinct days but only " +
                     std::to_string(days.size()) + " are available");
  }

  const auto n = days.size();
  const auto test_first = days[n - static_cast<std::size_t>(options.test_days)];
  const auto train_first = days[n - needed];

  std::vector<std::size_t> shifting, train, test;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const auto d = day_bucket(dataset[i].timestamp, options.seconds_per_day);
    if (d >= test_first) {
      test.push_back(i);
    } else if (d >= train_first) {
      train.push_back(i);
    } else {
      shifting.push_back(i);
    }
  }

  TemporalSplit split{dataset.subset(shifting), dataset.subset(train), dataset.subset(test),
                      std::nullopt, days[n - static_cast<std::size_t>(options.test_days) - 1],
                      days.back()};
  if (n > needed) split.shift_end_day = days[n - needed - 1];
  return split;
}

Dataset select_days(const Dataset& dataset, std::int64_t first_day, std::int64_t last_day,
                    std::int64_t seconds_per_day) {
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const auto d = day_bucket(dataset[i].timestamp, seconds_per_day);
    if (d >= first_day && d <= last_day) keep.push_back(i);
  }
  return dataset.subset(keep);
}

}  // namespace rad::data
