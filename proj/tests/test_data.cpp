#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <numeric>
#include <set>

#include "rad/data/io.hpp"
#include "rad/data/split.hpp"
#include "rad/data/synth.hpp"
#include "rad/error.hpp"
#include "test_util.hpp"

namespace rad {
namespace {

using data::ColumnRoles;
using test::TempDir;
using test::write_file;

const ColumnRoles kRoles{{"user", "item"}, "label", "ts"};

TEST(Csv, ThreeRowsBuildVocabInFirstAppearanceOrder) {
  TempDir dir("rad-csv");
  write_file(dir / "a.csv", "user,item,label,ts\nu1,i1,1,10\nu2,i1,0,11\nu1,i2,1,12\n");
  const auto d = data::load_csv(dir / "a.csv", kRoles);
  ASSERT_EQ(d.size(), 3u);
  EXPECT_EQ(d.schema().num_features(), 2u);
  EXPECT_EQ(d.schema().vocab_size(0), 2u);
  EXPECT_EQ(d.schema().vocab_size(1), 2u);
  EXPECT_EQ(d.schema().decode(0, 0), "u1");
  EXPECT_EQ(d.schema().decode(0, 1), "u2");
  EXPECT_EQ(d[1].features, (std::vector<data::ValueIndex>{1, 0}));
  EXPECT_EQ(d[2].row_id, 2);
  EXPECT_EQ(d[2].timestamp, 12);
  EXPECT_EQ(d.schema().cardinality(0), 3u);
  EXPECT_EQ(d.schema().unknown_index(0), 2u);
}

TEST(Csv, ColumnOrderInFileDoesNotMatter) {
  TempDir dir("rad-csv");
  write_file(dir / "a.csv", "ts,label,item,extra,user\n5,1,i9,x,u3\n");
  const auto d = data::load_csv(dir / "a.csv", kRoles);
  EXPECT_EQ(d.schema().decode(0, d[0].features[0]), "u3");
  EXPECT_EQ(d.schema().decode(1, d[0].features[1]), "i9");
  EXPECT_EQ(d[0].label, 1);
  EXPECT_EQ(d[0].timestamp, 5);
}

TEST(Csv, LabelTwoIsRowErrorAtThatLine) {
  TempDir dir("rad-csv");
  write_file(dir / "a.csv", "user,item,label,ts\nu1,i1,1,1\nu1,i1,2,2\n");
  try {
    data::load_csv(dir / "a.csv", kRoles);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
}

TEST(Csv, UnparsableTimestampIsRowError) {
  TempDir dir("rad-csv");
  write_file(dir / "a.csv", "user,item,label,ts\nu1,i1,1,abc\n");
  EXPECT_THROW(data::load_csv(dir / "a.csv", kRoles), ParseError);
}

TEST(Csv, MissingColumnIsSchemaError) {
  TempDir dir("rad-csv");
  write_file(dir / "a.csv", "user,label,ts\nu1,1,1\n");
  EXPECT_THROW(data::load_csv(dir / "a.csv", kRoles), SchemaError);
}

TEST(Csv, EmptyFileIsEmptyDatasetError) {
  TempDir dir("rad-csv");
  write_file(dir / "a.csv", "");
  EXPECT_THROW(data::load_csv(dir / "a.csv", kRoles), EmptyDatasetError);
}

TEST(Csv, DistinctCountMatchesIndependentCount) {
  TempDir dir("rad-csv");
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> user(0, 99);
  std::string text = "user,item,label,ts\n";
  std::set<int> seen;
  for (int r = 0; r < 1000; ++r) {
    // Every user appears at least once so the vocab is exactly 100.
    const int u = r < 100 ? r : user(rng);
    seen.insert(u);
    text += "u" + std::to_string(u) + ",i" + std::to_string(r % 7) + "," +
            std::to_string(r % 2) + "," + std::to_string(r) + "\n";
  }
  write_file(dir / "a.csv", text);
  const auto d = data::load_csv(dir / "a.csv", kRoles);
  EXPECT_EQ(d.schema().vocab_size(0), seen.size());
  EXPECT_EQ(d.schema().vocab_size(0), 100u);
}

TEST(Csv, RoundTripThroughWriteAndSchemaEncode) {
  TempDir dir("rad-csv");
  std::mt19937_64 rng(11);
  const auto d = test::random_dataset(rng, 200, 3, 9);
  data::write_csv(d, dir / "a.csv");
  const auto back = data::load_csv(dir / "a.csv", d.schema_ptr());
  ASSERT_EQ(back.size(), d.size());
  for (std::size_t i = 0; i < d.size(); ++i) EXPECT_EQ(back[i], d[i]);
}

TEST(Csv, UnseenValueMapsToUnknownIndex) {
  TempDir dir("rad-csv");
  write_file(dir / "a.csv", "user,item,label,ts\nu1,i1,1,1\n");
  write_file(dir / "b.csv", "user,item,label,ts\nu7,i1,0,2\n");
  const auto a = data::load_csv(dir / "a.csv", kRoles);
  const auto b = data::load_csv(dir / "b.csv", a.schema_ptr());
  EXPECT_EQ(b[0].features[0], a.schema().unknown_index(0));
  EXPECT_EQ(b[0].features[1], 0u);
}

TEST(Radd, RoundTripIsExact) {
  TempDir dir("rad-radd");
  std::mt19937_64 rng(5);
  const auto d = test::random_dataset(rng, 300, 4, 13);
  data::save_dataset(d, dir / "d.radd");
  EXPECT_EQ(test::read_file(dir / "d.radd").substr(0, 4), "RADD");
  const auto back = data::load_dataset(dir / "d.radd");
  EXPECT_EQ(back, d);
  EXPECT_EQ(back.schema(), d.schema());
}

TEST(Radd, WrongMagicIsFormatError) {
  TempDir dir("rad-radd");
  write_file(dir / "d.radd", "NOPE\x01garbage");
  EXPECT_THROW(data::load_dataset(dir / "d.radd"), FormatError);
}

data::Dataset day_dataset(int days, int rows_per_day) {
  auto schema = std::make_shared<data::Schema>(std::vector<std::string>{"f"}, "label", "ts");
  schema->intern(0, "a");
  std::vector<data::Sample> samples;
  data::RowId id = 0;
  for (int d = 1; d <= days; ++d) {
    for (int r = 0; r < rows_per_day; ++r) {
      samples.push_back({id++, {0}, static_cast<std::uint8_t>(r % 2), d});
    }
  }
  return data::Dataset(schema, std::move(samples));
}

std::set<std::int64_t> days_of(const data::Dataset& d) {
  std::set<std::int64_t> out;
  for (const auto& s : d) out.insert(s.timestamp);
  return out;
}

TEST(Split, ThirtyDaysTenTrainTwoTest) {
  const auto d = day_dataset(30, 3);
  const auto s = data::split_temporal(d, {10, 2, 1});
  EXPECT_EQ(*days_of(s.shifting).begin(), 1);
  EXPECT_EQ(*days_of(s.shifting).rbegin(), 18);
  EXPECT_EQ(*days_of(s.train).begin(), 19);
  EXPECT_EQ(*days_of(s.train).rbegin(), 28);
  EXPECT_EQ(days_of(s.test), (std::set<std::int64_t>{29, 30}));
  EXPECT_EQ(s.shift_end_day, 18);
  EXPECT_EQ(s.train_end_day, 28);
  EXPECT_EQ(s.test_end_day, 30);
}

TEST(Split, PartitionsAreDisjointAndComplete) {
  const auto d = day_dataset(12, 5);
  const auto s = data::split_temporal(d, {4, 3, 1});
  EXPECT_EQ(s.shifting.size() + s.train.size() + s.test.size(), d.size());
  std::set<data::RowId> ids;
  for (const auto* part : {&s.shifting, &s.train, &s.test}) {
    for (const auto& r : *part) EXPECT_TRUE(ids.insert(r.row_id).second);
  }
}

TEST(Split, TrainPlusTestEqualToSpanLeavesShiftingEmpty) {
  const auto d = day_dataset(6, 2);
  const auto s = data::split_temporal(d, {4, 2, 1});
  EXPECT_TRUE(s.shifting.empty());
  EXPECT_FALSE(s.shift_end_day.has_value());
}

TEST(Split, SpanTooShortIsSplitError) {
  const auto d = day_dataset(5, 2);
  EXPECT_THROW(data::split_temporal(d, {4, 2, 1}), SplitError);
}

TEST(Split, DaysBucketBySecondsPerDay) {
  EXPECT_EQ(data::day_bucket(86399, 86400), 0);
  EXPECT_EQ(data::day_bucket(86400, 86400), 1);
  EXPECT_EQ(data::day_bucket(-1, 86400), -1);
}

TEST(Synth, RowCountAndDeterminism) {
  data::SynthConfig cfg;
  cfg.days = 6;
  cfg.rows_per_day = 50;
  const auto a = data::generate_synthetic_shift(cfg);
  const auto b = data::generate_synthetic_shift(cfg);
  EXPECT_EQ(a.size(), 300u);
  EXPECT_EQ(a, b);
  TempDir dir("rad-synth");
  data::save_dataset(a, dir / "a.radd");
  data::save_dataset(b, dir / "b.radd");
  EXPECT_EQ(test::read_file(dir / "a.radd"), test::read_file(dir / "b.radd"));
  cfg.seed += 1;
  EXPECT_FALSE(data::generate_synthetic_shift(cfg) == a);
}

TEST(Synth, ItemsKeepOneCategory) {
  data::SynthConfig cfg;
  cfg.days = 4;
  cfg.rows_per_day = 500;
  const auto d = data::generate_synthetic_shift(cfg);
  std::map<data::ValueIndex, data::ValueIndex> category;
  for (const auto& s : d) {
    const auto [it, fresh] = category.emplace(s.features[1], s.features[2]);
    EXPECT_EQ(it->second, s.features[2]);
  }
}

TEST(Synth, InvalidConfigNamesTheField) {
  data::SynthConfig cfg;
  cfg.days = -3;
  try {
    cfg.validate();
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("days"), std::string::npos);
  }
  cfg = {};
  cfg.drift_angle_per_day = 4.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
}

// Spearman rank correlation of two equally long samples (average ranks for
// ties).
double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  auto ranks = [](const std::vector<double>& x) {
    std::vector<std::size_t> order(x.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto i, auto j) { return x[i] < x[j]; });
    std::vector<double> r(x.size());
    for (std::size_t i = 0; i < order.size();) {
      std::size_t j = i;
      while (j + 1 < order.size() && x[order[j + 1]] == x[order[i]]) ++j;
      for (std::size_t k = i; k <= j; ++k) r[order[k]] = 0.5 * static_cast<double>(i + j);
      i = j + 1;
    }
    return r;
  };
  const auto ra = ranks(a), rb = ranks(b);
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
  const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    sab += (ra[i] - ma) * (rb[i] - mb);
    saa += (ra[i] - ma) * (ra[i] - ma);
    sbb += (rb[i] - mb) * (rb[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

std::vector<double> category_ctr(const data::Dataset& d, int first, int last, int n) {
  std::vector<double> clicks(n), shows(n);
  for (const auto& s : d) {
    if (s.timestamp < first || s.timestamp > last) continue;
    clicks[s.features[2]] += s.label;
    shows[s.features[2]] += 1;
  }
  for (int c = 0; c < n; ++c) clicks[c] /= std::max(1.0, shows[c]);
  return clicks;
}

TEST(Synth, FeatureCtrCorrelationDecaysWithSeparation) {
  constexpr int kCategories = 24;
  const std::vector<int> separations{10, 25, 45};
  std::vector<double> mean_corr(separations.size(), 0.0);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    data::SynthConfig cfg;
    cfg.n_categories = kCategories;
    cfg.association_strength = 0.0;
    cfg.seed = seed;
    const auto d = data::generate_synthetic_shift(cfg);
    const auto base = category_ctr(d, 0, 9, kCategories);
    for (std::size_t i = 0; i < separations.size(); ++i) {
      const int s = separations[i];
      mean_corr[i] += spearman(base, category_ctr(d, s, s + 9, kCategories)) / 5.0;
    }
  }
  EXPECT_GT(mean_corr[0], mean_corr[1]);
  EXPECT_GT(mean_corr[1], mean_corr[2]);
}

}  // namespace
}  // namespace rad
