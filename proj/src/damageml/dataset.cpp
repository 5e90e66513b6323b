#include "agrifield/damageml/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "agrifield/errors.hpp"
#include "agrifield/simcore.hpp"

namespace agrifield::damageml {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\"");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\"");
  return std::string(s.substr(b, e - b + 1));
}

std::string fold(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  bool quoted = false;
  for (char c : line) {
    if (c == '"') {
      quoted = !quoted;
    } else if (c == ',' && !quoted) {
      cells.push_back(trim(cell));
      cell.clear();
    } else {
      cell.push_back(c);
    }
  }
  cells.push_back(trim(cell));
  return cells;
}

std::optional<double> parse_number(const std::string& cell) {
  if (cell.empty()) return std::nullopt;
  double v = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::size_t uniform_index(sim::Rng& rng, std::size_t bound) {
  return static_cast<std::size_t>(rng() % bound);
}

double uniform01(sim::Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::string format_number(double v) {
  char buf[32];
  if (v == std::floor(v) && std::fabs(v) < 1e15)
    std::snprintf(buf, sizeof buf, "%.0f", v);
  else
    std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

ColumnMapping load_column_mapping(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open column mapping " + path.string());
  ColumnMapping mapping;
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != 2) throw SchemaError("column mapping rows need 2 cells: " + line);
    mapping[cells[0]] = cells[1];
  }
  return mapping;
}

std::vector<DamageRecord> load_records(const std::filesystem::path& path,
                                       const LoadOptions& options) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw SchemaError("empty file: " + path.string());

  const auto header = split_csv_line(line);
  auto find_column = [&](const std::string& canonical) -> std::optional<std::size_t> {
    auto it = options.mapping.find(canonical);
    const std::string wanted = fold(it != options.mapping.end() ? it->second : canonical);
    for (std::size_t i = 0; i < header.size(); ++i)
      if (fold(header[i]) == wanted) return i;
    return std::nullopt;
  };

  std::vector<std::string> missing;
  std::array<std::size_t, kFeatureColumns.size()> feature_idx{};
  for (std::size_t f = 0; f < kFeatureColumns.size(); ++f) {
    if (auto idx = find_column(kFeatureColumns[f].name))
      feature_idx[f] = *idx;
    else
      missing.emplace_back(kFeatureColumns[f].name);
  }
  const auto id_idx = find_column(kIdColumn);
  const auto label_idx = find_column(kLabelColumn);
  if (options.require_label && !label_idx) missing.emplace_back(kLabelColumn);
  if (!missing.empty()) {
    std::string names;
    for (const auto& m : missing) names += (names.empty() ? "" : ", ") + m;
    throw SchemaError("missing required columns in " + path.string() + ": " + names);
  }

  std::vector<DamageRecord> records;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split_csv_line(line);
    auto cell = [&](std::size_t i) -> std::string { return i < cells.size() ? cells[i] : ""; };
    DamageRecord r;
    r.id = id_idx ? cell(*id_idx) : std::to_string(line_no - 1);
    for (std::size_t f = 0; f < kFeatureColumns.size(); ++f)
      r.*(kFeatureColumns[f].member) = parse_number(cell(feature_idx[f]));
    if (label_idx) {
      if (auto v = parse_number(cell(*label_idx))) r.crop_damage = static_cast<int>(*v);
    }
    if (options.require_label && !r.crop_damage)
      throw SchemaError(path.string() + ":" + std::to_string(line_no) + ": missing Crop_Damage");
    records.push_back(std::move(r));
  }
  return records;
}

void write_records(const std::filesystem::path& path, std::span<const DamageRecord> records) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << kIdColumn;
  for (const auto& col : kFeatureColumns) out << ',' << col.name;
  out << ',' << kLabelColumn << '\n';
  for (const auto& r : records) {
    out << r.id;
    for (const auto& col : kFeatureColumns) {
      out << ',';
      if (const auto& v = r.*(col.member)) out << format_number(*v);
    }
    out << ',';
    if (r.crop_damage) out << *r.crop_damage;
    out << '\n';
  }
}

void FeatureSpec::validate() const {
  if (window < 1) throw DomainError("window must be >= 1");
  if (lags.empty()) throw DomainError("lags must be non-empty");
  for (int l : lags)
    if (l < 1) throw DomainError("lags must be positive");
  const bool known = std::any_of(kFeatureColumns.begin(), kFeatureColumns.end(),
                                 [&](const FeatureColumn& c) { return source_column == c.name; });
  if (!known) throw DomainError("unknown source column " + source_column);
}

std::vector<DamageRecord> fill_missing(std::vector<DamageRecord> records, const FeatureSpec& spec) {
  for (auto& r : records)
    for (const auto& col : kFeatureColumns)
      if (!(r.*(col.member))) r.*(col.member) = spec.fill_value;
  return records;
}

FeatureMatrix FeatureMatrix::select(std::span<const std::size_t> row_indices) const {
  FeatureMatrix out;
  out.rows = row_indices.size();
  out.cols = cols;
  out.names = names;
  out.categorical = categorical;
  out.data.reserve(out.rows * cols);
  out.labels.reserve(out.rows);
  for (std::size_t r : row_indices) {
    const auto src = row(r);
    out.data.insert(out.data.end(), src.begin(), src.end());
    out.labels.push_back(labels[r]);
  }
  return out;
}

FeatureMatrix FeatureMatrix::from_rows(const std::vector<std::vector<double>>& rows,
                                       std::vector<int> labels) {
  FeatureMatrix m;
  m.rows = rows.size();
  m.cols = rows.empty() ? 0 : rows.front().size();
  for (const auto& r : rows) {
    if (r.size() != m.cols) throw DomainError("ragged feature rows");
    m.data.insert(m.data.end(), r.begin(), r.end());
  }
  if (labels.size() != m.rows) throw DomainError("label count does not match row count");
  m.labels = std::move(labels);
  for (std::size_t c = 0; c < m.cols; ++c) m.names.push_back("x" + std::to_string(c));
  m.categorical.assign(m.cols, false);
  return m;
}

FeatureMatrix add_lag_features(std::span<const DamageRecord> records, const FeatureSpec& spec) {
  spec.validate();
  const auto src_col = std::find_if(kFeatureColumns.begin(), kFeatureColumns.end(),
                                    [&](const FeatureColumn& c) { return spec.source_column == c.name; });

  FeatureMatrix m;
  m.rows = records.size();
  m.cols = kFeatureColumns.size() + spec.lags.size();
  for (const auto& col : kFeatureColumns) {
    m.names.emplace_back(col.name);
    m.categorical.push_back(col.categorical);
  }
  for (int l : spec.lags) {
    m.names.push_back("lagmean_" + std::to_string(l));
    m.categorical.push_back(false);
  }

  std::vector<double> source(records.size());
  for (std::size_t i = 0; i < records.size(); ++i)
    source[i] = (records[i].*(src_col->member)).value_or(spec.fill_value);

  // prefix[i] = sum of source[0..i)
  std::vector<double> prefix(source.size() + 1, 0.0);
  std::partial_sum(source.begin(), source.end(), prefix.begin() + 1);

  m.data.reserve(m.rows * m.cols);
  m.labels.reserve(m.rows);
  const auto w = static_cast<std::size_t>(spec.window);
  for (std::size_t i = 0; i < records.size(); ++i) {
    const DamageRecord& r = records[i];
    for (const auto& col : kFeatureColumns) m.data.push_back((r.*(col.member)).value_or(spec.fill_value));
    for (int lag : spec.lags) {
      const auto l = static_cast<std::size_t>(lag);
      if (i + 1 >= l + w) {
        // window source[i-l-w+1 .. i-l]
        const std::size_t end = i - l + 1;
        m.data.push_back((prefix[end] - prefix[end - w]) / static_cast<double>(w));
      } else {
        m.data.push_back(spec.fill_value);
      }
    }
    m.labels.push_back(r.crop_damage.value_or(-1));
  }
  return m;
}

std::pair<FeatureMatrix, FeatureMatrix> split(const FeatureMatrix& m, double fraction,
                                              std::uint64_t seed) {
  if (m.rows == 0) throw DomainError("cannot split an empty matrix");
  if (!(fraction > 0.0 && fraction < 1.0)) throw DomainError("fraction must lie in (0,1)");
  std::vector<std::size_t> order(m.rows);
  std::iota(order.begin(), order.end(), std::size_t{0});
  sim::Rng rng(seed);
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[uniform_index(rng, i)]);
  const auto n_train = static_cast<std::size_t>(std::lround(fraction * static_cast<double>(m.rows)));
  const std::span<const std::size_t> all(order);
  return {m.select(all.first(n_train)), m.select(all.subspan(n_train))};
}

std::vector<DamageRecord> synth_generate(std::size_t n, std::uint64_t seed,
                                         const SynthOptions& options) {
  if (n < 1) throw DomainError("n must be >= 1");
  sim::Rng rng(seed);
  std::vector<DamageRecord> records(n);

  double drift = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    DamageRecord& r = records[i];
    char id[24];
    std::snprintf(id, sizeof id, "F%08zu", i);
    r.id = id;
    drift = 0.9 * drift + std::sqrt(1.0 - 0.81) * sim::standard_normal(rng);
    const double insects = 1400.0 + 700.0 * drift + 250.0 * sim::standard_normal(rng);
    r.estimated_insect_count = std::round(std::clamp(insects, 150.0, 4100.0));
    r.crop_type = uniform01(rng) < 0.3 ? 1.0 : 0.0;
    r.soil_type = uniform01(rng) < 0.45 ? 1.0 : 0.0;
    const double u = uniform01(rng);
    r.pesticide_use_category = u < 0.1 ? 1.0 : (u < 0.7 ? 2.0 : 3.0);
    r.number_doses_week = 5.0 * static_cast<double>(uniform_index(rng, 20));
    const double weeks_used = static_cast<double>(uniform_index(rng, 67));
    if (uniform01(rng) >= options.missing_rate) r.number_weeks_used = weeks_used;
    r.number_weeks_quit = static_cast<double>(uniform_index(rng, 51));
    r.season = static_cast<double>(1 + uniform_index(rng, 3));
  }

  std::vector<double> sorted(n);
  for (std::size_t i = 0; i < n; ++i) sorted[i] = *records[i].estimated_insect_count;
  std::sort(sorted.begin(), sorted.end());
  auto quantile = [&](double q) {
    return sorted[static_cast<std::size_t>(std::floor(q * static_cast<double>(n - 1)))];
  };
  const double q90 = quantile(0.9);
  const double q60 = quantile(0.6);
  for (auto& r : records) {
    const double insects = *r.estimated_insect_count;
    if (insects > q90 && *r.pesticide_use_category == 3.0)
      r.crop_damage = 2;
    else if (insects > q60)
      r.crop_damage = 1;
    else
      r.crop_damage = 0;
  }

  const auto n_flip = static_cast<std::size_t>(std::lround(options.noise_rate * static_cast<double>(n)));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t i = 0; i < n_flip && i < n; ++i) {
    std::swap(order[i], order[i + uniform_index(rng, n - i)]);
    auto& label = *records[order[i]].crop_damage;
    label = (label + 1 + static_cast<int>(uniform_index(rng, 2))) % kNumClasses;
  }
  return records;
}

}  // namespace agrifield::damageml
