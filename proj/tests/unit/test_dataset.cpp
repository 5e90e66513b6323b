#include "doctest.h"

#include <algorithm>
#include <filesystem>
#include <numeric>

#include "agrifield/damageml/dataset.hpp"
#include "agrifield/errors.hpp"

using namespace agrifield;
using namespace agrifield::damageml;

namespace {

std::vector<DamageRecord> series(std::vector<double> insects) {
  std::vector<DamageRecord> out;
  for (std::size_t i = 0; i < insects.size(); ++i) {
    DamageRecord r;
    r.id = "R" + std::to_string(i);
    for (const auto& col : kFeatureColumns) r.*col.member = 0.0;
    r.estimated_insect_count = insects[i];
    r.crop_damage = 0;
    out.push_back(r);
  }
  return out;
}

std::size_t col_index(const FeatureMatrix& m, const std::string& name) {
  const auto it = std::find(m.names.begin(), m.names.end(), name);
  REQUIRE(it != m.names.end());
  return static_cast<std::size_t>(it - m.names.begin());
}

}  // namespace

TEST_CASE("load_records reads a well-formed table") {
  const auto rows = load_records(AGRIFIELD_FIXTURES "/damage_3rows.csv");
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].id == "F00000001");
  CHECK(rows[0].estimated_insect_count == 188.0);
  CHECK(rows[1].season == 2.0);
  CHECK(rows[2].crop_damage == 1);
}

TEST_CASE("unparseable cells load as absent") {
  const auto rows = load_records(AGRIFIELD_FIXTURES "/damage_missing.csv");
  REQUIRE(rows.size() == 3);
  CHECK_FALSE(rows[0].number_weeks_used.has_value());
  CHECK_FALSE(rows[1].number_weeks_used.has_value());
  CHECK(rows[2].number_weeks_used == 12.0);
  const auto filled = fill_missing(rows, FeatureSpec{});
  CHECK(filled[0].number_weeks_used == -999.0);
  CHECK(filled[1].number_weeks_used == -999.0);
  CHECK(filled[2].number_weeks_used == 12.0);
  CHECK(fill_missing(filled, FeatureSpec{}) == filled);
}

TEST_CASE("missing label column is a schema error unless labels are optional") {
  try {
    load_records(AGRIFIELD_FIXTURES "/damage_nolabel.csv");
    FAIL("expected SchemaError");
  } catch (const SchemaError& e) {
    CHECK(std::string(e.what()).find("Crop_Damage") != std::string::npos);
  }
  LoadOptions opts;
  opts.require_label = false;
  const auto rows = load_records(AGRIFIELD_FIXTURES "/damage_nolabel.csv", opts);
  REQUIRE(rows.size() == 1);
  CHECK_FALSE(rows[0].crop_damage.has_value());
  CHECK_THROWS_AS(load_records(AGRIFIELD_FIXTURES "/nope.csv"), IoError);
}

TEST_CASE("column mapping renames headers") {
  CHECK_THROWS_AS(load_records(AGRIFIELD_FIXTURES "/damage_renamed.csv"), SchemaError);
  LoadOptions opts;
  opts.mapping = load_column_mapping(AGRIFIELD_FIXTURES "/columns_renamed.csv");
  const auto rows = load_records(AGRIFIELD_FIXTURES "/damage_renamed.csv", opts);
  REQUIRE(rows.size() == 2);
  CHECK(rows[1].id == "A2");
  CHECK(rows[1].estimated_insect_count == 300.0);
  CHECK(rows[1].pesticide_use_category == 3.0);
  CHECK_FALSE(rows[1].number_weeks_used.has_value());
  CHECK(rows[1].crop_damage == 2);
}

TEST_CASE("write_records round trips") {
  const auto rows = synth_generate(50, 3);
  const auto path = std::filesystem::temp_directory_path() / "agrifield_roundtrip.csv";
  write_records(path, rows);
  const auto back = load_records(path);
  std::filesystem::remove(path);
  CHECK(back == rows);
}

TEST_CASE("lag means use the trailing window") {
  const auto m = add_lag_features(series({1, 2, 3, 4, 5, 6, 7}), FeatureSpec{});
  CHECK(m.rows == 7);
  CHECK(m.cols == kFeatureColumns.size() + 2);
  const std::size_t l1 = col_index(m, "lagmean_1");
  const std::size_t l2 = col_index(m, "lagmean_2");
  for (std::size_t r = 0; r < 5; ++r) CHECK(m.at(r, l1) == -999.0);
  for (std::size_t r = 0; r < 6; ++r) CHECK(m.at(r, l2) == -999.0);
  CHECK(m.at(5, l1) == doctest::Approx(3.0));
  CHECK(m.at(6, l1) == doctest::Approx(4.0));
  CHECK(m.at(6, l2) == doctest::Approx(3.0));
}

TEST_CASE("constant source gives constant lag means") {
  const auto m = add_lag_features(series(std::vector<double>(40, 250.0)), FeatureSpec{});
  const std::size_t l1 = col_index(m, "lagmean_1");
  for (std::size_t r = 5; r < m.rows; ++r) REQUIRE(m.at(r, l1) == doctest::Approx(250.0));
}

TEST_CASE("lag means match a direct window oracle") {
  const auto rows = fill_missing(synth_generate(300, 9), FeatureSpec{});
  FeatureSpec spec;
  spec.window = 7;
  spec.lags = {1, 3, 10};
  const auto m = add_lag_features(rows, spec);
  for (int lag : spec.lags) {
    const std::size_t c = col_index(m, "lagmean_" + std::to_string(lag));
    for (std::size_t r = 0; r < m.rows; ++r) {
      const long end = static_cast<long>(r) - lag;  // inclusive
      const long start = end - spec.window + 1;
      if (start < 0) {
        REQUIRE(m.at(r, c) == -999.0);
        continue;
      }
      double sum = 0.0;
      for (long i = start; i <= end; ++i) sum += *rows[static_cast<std::size_t>(i)].estimated_insect_count;
      REQUIRE(m.at(r, c) == doctest::Approx(sum / spec.window).epsilon(1e-9));
    }
  }
}

TEST_CASE("feature spec validation") {
  FeatureSpec spec;
  spec.window = 0;
  CHECK_THROWS_AS(spec.validate(), DomainError);
  spec = {};
  spec.lags = {0};
  CHECK_THROWS_AS(spec.validate(), DomainError);
}

TEST_CASE("split sizes, disjointness and determinism") {
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  for (int i = 0; i < 100; ++i) {
    rows.push_back({static_cast<double>(i)});
    labels.push_back(i % 3);
  }
  const auto m = FeatureMatrix::from_rows(rows, labels);
  const auto [train, test] = split(m, 0.75, 42);
  CHECK(train.rows == 75);
  CHECK(test.rows == 25);
  std::vector<double> all;
  for (std::size_t r = 0; r < train.rows; ++r) all.push_back(train.at(r, 0));
  for (std::size_t r = 0; r < test.rows; ++r) all.push_back(test.at(r, 0));
  std::sort(all.begin(), all.end());
  std::vector<double> expected(100);
  std::iota(expected.begin(), expected.end(), 0.0);
  CHECK(all == expected);
  for (std::size_t r = 0; r < train.rows; ++r)
    REQUIRE(train.labels[r] == static_cast<int>(train.at(r, 0)) % 3);

  const auto [train2, test2] = split(m, 0.75, 42);
  CHECK(train2.data == train.data);
  CHECK(test2.data == test.data);
  const auto [train3, test3] = split(m, 0.75, 43);
  CHECK(train3.data != train.data);

  const auto small = FeatureMatrix::from_rows({{1}, {2}, {3}, {4}}, {0, 0, 1, 1});
  const auto [a, b] = split(small, 0.75, 1);
  CHECK(a.rows == 3);
  CHECK(b.rows == 1);
  CHECK_THROWS_AS(split(small, 0.0, 1), DomainError);
  CHECK_THROWS_AS(split(small, 1.0, 1), DomainError);
}

TEST_CASE("synthetic generator is deterministic") {
  const auto a = synth_generate(1000, 5);
  const auto b = synth_generate(1000, 5);
  CHECK(a == b);
  CHECK(synth_generate(1000, 6) != a);
  std::size_t missing = 0;
  for (const auto& r : a) {
    REQUIRE(r.crop_damage.has_value());
    REQUIRE(*r.crop_damage >= 0);
    REQUIRE(*r.crop_damage < kNumClasses);
    REQUIRE(*r.estimated_insect_count >= 150.0);
    REQUIRE(*r.estimated_insect_count <= 4100.0);
    if (!r.number_weeks_used) ++missing;
  }
  CHECK(missing > 50);
  CHECK(missing < 150);
}

TEST_CASE("noise-free synthetic labels follow the percentile rule") {
  SynthOptions opts;
  opts.noise_rate = 0.0;
  const auto rows = synth_generate(2000, 12, opts);
  std::vector<double> insects;
  for (const auto& r : rows) insects.push_back(*r.estimated_insect_count);
  std::sort(insects.begin(), insects.end());
  const auto q = [&](double p) { return insects[static_cast<std::size_t>(p * (insects.size() - 1))]; };
  const double q90 = q(0.9), q60 = q(0.6);
  std::array<int, 3> counts{};
  for (const auto& r : rows) {
    const double x = *r.estimated_insect_count;
    const int expected = (x > q90 && *r.pesticide_use_category == 3.0) ? 2 : (x > q60 ? 1 : 0);
    REQUIRE(*r.crop_damage == expected);
    ++counts[static_cast<std::size_t>(expected)];
  }
  CHECK(counts[0] > counts[1]);
  CHECK(counts[2] > 0);
}

TEST_CASE("label noise flips exactly the requested share") {
  SynthOptions clean;
  clean.noise_rate = 0.0;
  const auto a = synth_generate(1000, 21, clean);
  const auto b = synth_generate(1000, 21);
  std::size_t flipped = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    REQUIRE(*a[i].estimated_insect_count == *b[i].estimated_insect_count);
    if (a[i].crop_damage != b[i].crop_damage) ++flipped;
  }
  CHECK(flipped == 50);
}
