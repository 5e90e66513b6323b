#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace agrifield::damageml {

/// One row of the crop-damage table. Numeric cells that were empty or
/// unparseable are absent until `fill_missing` runs.
struct DamageRecord {
  std::string id;
  std::optional<double> estimated_insect_count;
  std::optional<double> crop_type;
  std::optional<double> soil_type;
  std::optional<double> pesticide_use_category;
  std::optional<double> number_doses_week;
  std::optional<double> number_weeks_used;
  std::optional<double> number_weeks_quit;
  std::optional<double> season;
  std::optional<int> crop_damage;

  friend bool operator==(const DamageRecord&, const DamageRecord&) = default;
};

struct FeatureColumn {
  const char* name;
  std::optional<double> DamageRecord::*member;
  bool categorical;
};

inline constexpr std::array<FeatureColumn, 8> kFeatureColumns{{
    {"Estimated_Insects_Count", &DamageRecord::estimated_insect_count, false},
    {"Crop_Type", &DamageRecord::crop_type, true},
    {"Soil_Type", &DamageRecord::soil_type, true},
    {"Pesticide_Use_Category", &DamageRecord::pesticide_use_category, true},
    {"Number_Doses_Week", &DamageRecord::number_doses_week, false},
    {"Number_Weeks_Used", &DamageRecord::number_weeks_used, false},
    {"Number_Weeks_Quit", &DamageRecord::number_weeks_quit, false},
    {"Season", &DamageRecord::season, true},
}};

inline constexpr const char* kIdColumn = "ID";
inline constexpr const char* kLabelColumn = "Crop_Damage";
inline constexpr int kNumClasses = 3;

/// Canonical column name -> header used in a particular file.
using ColumnMapping = std::map<std::string, std::string>;

/// Two-column `canonical,actual` CSV with a header row.
ColumnMapping load_column_mapping(const std::filesystem::path& path);

struct LoadOptions {
  bool require_label = true;
  ColumnMapping mapping;
};

/// Throws IoError if the file cannot be read and SchemaError naming every
/// required column that is absent.
std::vector<DamageRecord> load_records(const std::filesystem::path& path,
                                       const LoadOptions& options = {});

void write_records(const std::filesystem::path& path, std::span<const DamageRecord> records);

struct FeatureSpec {
  int window = 5;
  std::vector<int> lags{1, 2};
  double fill_value = -999.0;
  std::string source_column = "Estimated_Insects_Count";

  void validate() const;
};

/// Replaces every absent feature cell with `spec.fill_value`. Labels are left alone.
std::vector<DamageRecord> fill_missing(std::vector<DamageRecord> records, const FeatureSpec& spec);

struct FeatureMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;  // row-major
  std::vector<std::string> names;
  std::vector<bool> categorical;
  std::vector<int> labels;  // -1 for unlabeled rows

  double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }

  FeatureMatrix select(std::span<const std::size_t> row_indices) const;

  /// Builds a matrix from row vectors; all rows must have equal length.
  static FeatureMatrix from_rows(const std::vector<std::vector<double>>& rows,
                                 std::vector<int> labels);
};

/// Base feature columns plus one `lagmean_<l>` column per lag: the mean of
/// the `window` source values ending `l` rows before the current row, or the
/// fill value where that window would start before row 0. Row order is the
/// input order.
FeatureMatrix add_lag_features(std::span<const DamageRecord> records, const FeatureSpec& spec);

/// Seeded shuffle, then the first round(fraction * N) rows go to train.
std::pair<FeatureMatrix, FeatureMatrix> split(const FeatureMatrix& m, double fraction,
                                              std::uint64_t seed);

struct SynthOptions {
  double noise_rate = 0.05;
  double missing_rate = 0.10;  // of Number_Weeks_Used cells
};

/// Synthetic stand-in for the crop-damage table. Insect counts follow a
/// slowly drifting series; damage is 2 above the 90th insect percentile with
/// pesticide category 3, 1 above the 60th percentile, else 0. Exactly
/// round(noise_rate * n) labels are then moved to a different class.
std::vector<DamageRecord> synth_generate(std::size_t n, std::uint64_t seed,
                                         const SynthOptions& options = {});

}  // namespace agrifield::damageml
