#pragma once

namespace agrifield {

/// Soil or crop macronutrient amounts in kg/ha.
struct NutrientProfile {
  double n = 0.0;
  double p = 0.0;
  double k = 0.0;

  bool non_negative() const { return n >= 0.0 && p >= 0.0 && k >= 0.0; }

  friend bool operator==(const NutrientProfile&, const NutrientProfile&) = default;
};

inline NutrientProfile operator*(double c, const NutrientProfile& v) {
  return {c * v.n, c * v.p, c * v.k};
}

}  // namespace agrifield
