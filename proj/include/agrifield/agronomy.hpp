#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "agrifield/modbus.hpp"
#include "agrifield/nutrients.hpp"

namespace agrifield::agronomy {

struct CropRequirement {
  std::string crop_name;
  NutrientProfile required;
};

/// Mass fractions of N, P and K delivered per kg of product.
struct FertilizerProduct {
  std::string name;
  double fraction_n = 0.0;
  double fraction_p = 0.0;
  double fraction_k = 0.0;

  NutrientProfile nutrients_in(double kg) const {
    return {kg * fraction_n, kg * fraction_p, kg * fraction_k};
  }
};

inline const FertilizerProduct kMop{"MOP", 0.0, 0.0, 0.60};
inline const FertilizerProduct kUrea{"Urea", 0.46, 0.0, 0.0};
inline const FertilizerProduct kDap{"DAP", 0.18, 0.46, 0.0};

struct DoseRecommendation {
  double mop_kg_ha = 0.0;
  double dap_kg_ha = 0.0;
  double urea_kg_ha = 0.0;
  NutrientProfile supplied;
  NutrientProfile residual_deficit;
};

/// Componentwise max(required - soil, 0).
NutrientProfile deficit(const NutrientProfile& soil, const NutrientProfile& required);

/// How the nitrogen left after DAP is sized before converting it to urea.
/// `WholeKg` rounds it to the nearest kilogram the way the hand-worked dose
/// sheet does (90 - 5.87 -> 84 kg), so urea comes out at 182.61 instead of
/// 182.89 for the wheat example and nitrogen may be short by up to 0.5 kg.
enum class NitrogenRounding { Exact, WholeKg };

/// Greedy K -> P -> N sizing: MOP covers potassium, DAP covers phosphorus and
/// its nitrogen is credited before urea covers the rest. Urea is clamped at 0
/// when DAP alone oversupplies nitrogen.
DoseRecommendation recommend_doses(const NutrientProfile& def,
                                   NitrogenRounding rounding = NitrogenRounding::Exact);

/// Register triple (N, P, K order) scaled to kg/ha.
NutrientProfile npk_from_registers(const modbus::RegisterValues& values, double unit_factor = 1.0);

/// Crop requirement lookup with case-insensitive names.
class CropTable {
 public:
  CropTable() = default;
  explicit CropTable(std::vector<CropRequirement> crops);

  /// Ships wheat only: (100, 20, 60) kg/ha.
  static CropTable builtin();

  /// Reads a `crop_name,n,p,k` CSV with header row. Rows override builtins
  /// when merged with `merge`.
  static CropTable load(const std::filesystem::path& path);

  void merge(const CropTable& other);
  const CropRequirement& lookup(std::string_view name) const;
  const std::vector<CropRequirement>& crops() const noexcept { return crops_; }

 private:
  std::vector<CropRequirement> crops_;
};

/// Per-product dose table with two decimals.
std::string format_dose_table(const NutrientProfile& soil, const NutrientProfile& required,
                              const NutrientProfile& def, const DoseRecommendation& rec);

}  // namespace agrifield::agronomy
