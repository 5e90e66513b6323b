#include "agrifield/agronomy.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "agrifield/errors.hpp"

namespace agrifield::agronomy {
namespace {

std::string fold(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace

NutrientProfile deficit(const NutrientProfile& soil, const NutrientProfile& required) {
  return {std::max(required.n - soil.n, 0.0), std::max(required.p - soil.p, 0.0),
          std::max(required.k - soil.k, 0.0)};
}

DoseRecommendation recommend_doses(const NutrientProfile& def, NitrogenRounding rounding) {
  if (!def.non_negative()) throw DomainError("deficit components must be >= 0");
  DoseRecommendation rec;
  rec.mop_kg_ha = def.k / kMop.fraction_k;
  rec.dap_kg_ha = def.p / kDap.fraction_p;
  const double n_from_dap = kDap.fraction_n * rec.dap_kg_ha;
  double n_remaining = std::max(def.n - n_from_dap, 0.0);
  if (rounding == NitrogenRounding::WholeKg) n_remaining = std::round(n_remaining);
  rec.urea_kg_ha = n_remaining / kUrea.fraction_n;

  // MOP and DAP are sized to the deficit, so P and K are met exactly; with
  // exact sizing N is met by urea unless DAP already oversupplies it.
  const double n_supplied = rounding == NitrogenRounding::Exact
                                ? std::max(def.n, n_from_dap)
                                : n_from_dap + kUrea.fraction_n * rec.urea_kg_ha;
  rec.supplied = {n_supplied, def.p, def.k};
  rec.residual_deficit = deficit(rec.supplied, def);
  return rec;
}

NutrientProfile npk_from_registers(const modbus::RegisterValues& values, double unit_factor) {
  if (values.values.size() != 3)
    throw DomainError("expected 3 NPK registers, got " + std::to_string(values.values.size()));
  if (!(unit_factor >= 0.0)) throw DomainError("unit_factor must be >= 0");
  return {values.values[0] * unit_factor, values.values[1] * unit_factor,
          values.values[2] * unit_factor};
}

CropTable::CropTable(std::vector<CropRequirement> crops) : crops_(std::move(crops)) {
  for (const auto& c : crops_)
    if (!c.required.non_negative())
      throw DomainError("negative requirement for crop " + c.crop_name);
}

CropTable CropTable::builtin() { return CropTable({{"wheat", {100.0, 20.0, 60.0}}}); }

CropTable CropTable::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open crop table " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw SchemaError("crop table is empty: " + path.string());
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(fold(trim(cell)));
  }
  const std::vector<std::string> expected{"crop_name", "n", "p", "k"};
  if (header != expected)
    throw SchemaError("crop table header must be crop_name,n,p,k in " + path.string());

  std::vector<CropRequirement> crops;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::stringstream ss(line);
    std::string name, n, p, k;
    std::getline(ss, name, ',');
    std::getline(ss, n, ',');
    std::getline(ss, p, ',');
    std::getline(ss, k, ',');
    try {
      crops.push_back({trim(name), {std::stod(n), std::stod(p), std::stod(k)}});
    } catch (const std::logic_error&) {
      throw SchemaError(path.string() + ":" + std::to_string(line_no) + ": bad numeric value");
    }
  }
  return CropTable(std::move(crops));
}

void CropTable::merge(const CropTable& other) {
  for (const auto& c : other.crops_) {
    auto it = std::find_if(crops_.begin(), crops_.end(), [&](const CropRequirement& e) {
      return fold(e.crop_name) == fold(c.crop_name);
    });
    if (it != crops_.end())
      *it = c;
    else
      crops_.push_back(c);
  }
}

const CropRequirement& CropTable::lookup(std::string_view name) const {
  const std::string key = fold(trim(name));
  for (const auto& c : crops_)
    if (fold(c.crop_name) == key) return c;
  std::string known;
  for (const auto& c : crops_) known += (known.empty() ? "" : ", ") + c.crop_name;
  throw NotFoundError("unknown crop '" + std::string(name) + "'; available: " + known);
}

std::string format_dose_table(const NutrientProfile& soil, const NutrientProfile& required,
                              const NutrientProfile& def, const DoseRecommendation& rec) {
  char buf[128];
  std::string out;
  auto row = [&](const char* label, const NutrientProfile& v) {
    std::snprintf(buf, sizeof buf, "%-12s %10.2f %10.2f %10.2f\n", label, v.n, v.p, v.k);
    out += buf;
  };
  std::snprintf(buf, sizeof buf, "%-12s %10s %10s %10s\n", "kg/ha", "N", "P", "K");
  out += buf;
  row("soil", soil);
  row("required", required);
  row("deficit", def);
  out += "\n";
  std::snprintf(buf, sizeof buf, "%-12s %10s\n", "product", "kg/ha");
  out += buf;
  std::snprintf(buf, sizeof buf, "%-12s %10.2f\n", "MOP", rec.mop_kg_ha);
  out += buf;
  std::snprintf(buf, sizeof buf, "%-12s %10.2f\n", "DAP", rec.dap_kg_ha);
  out += buf;
  std::snprintf(buf, sizeof buf, "%-12s %10.2f\n", "Urea", rec.urea_kg_ha);
  out += buf;
  return out;
}

}  // namespace agrifield::agronomy
