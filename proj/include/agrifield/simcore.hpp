#pragma once

#include <cstdint>
#include <random>

#include "agrifield/nutrients.hpp"

namespace agrifield::sim {

inline constexpr int kAdcMax = 1023;

struct SimConfig {
  double tick_seconds = 1.0;
  double evap_rate = 0.05;   // %/tick, always applied
  double infil_rate = 0.5;   // %/tick, added while the pump runs
  double adc_noise_sd = 0.0; // ADC counts
  std::uint64_t seed = 0;

  /// Throws DomainError when an invariant is violated.
  void validate() const;
};

struct FieldState {
  double moisture_pct = 50.0;
  NutrientProfile npk;
  bool pump_on = false;
  std::uint64_t clock = 0;

  void validate() const;
  friend bool operator==(const FieldState&, const FieldState&) = default;
};

struct AdcSample {
  int counts = 0;
  std::uint64_t tick = 0;
  friend bool operator==(const AdcSample&, const AdcSample&) = default;
};

/// Sensor ADC reading to soil moisture. Higher counts mean drier soil.
double adc_to_moisture(int counts);

/// Inverse of adc_to_moisture, rounded half away from zero.
int moisture_to_adc(double moisture_pct);

/// Advances the soil model by one tick with the given pump state.
FieldState step_field(const FieldState& state, bool pump_on, const SimConfig& cfg);

using Rng = std::mt19937_64;

/// Standard normal draw from `rng`. Box-Muller on 53-bit uniforms so the
/// sequence does not depend on the standard library's distribution code.
double standard_normal(Rng& rng);

AdcSample sample_adc(const FieldState& state, Rng& rng, const SimConfig& cfg);

/// Virtual field: soil state plus the analog moisture probe.
class Field {
 public:
  Field(FieldState initial, SimConfig cfg);

  const FieldState& state() const noexcept { return state_; }
  const SimConfig& config() const noexcept { return cfg_; }

  AdcSample sample();
  const FieldState& step(bool pump_on);

 private:
  FieldState state_;
  SimConfig cfg_;
  Rng rng_;
};

}  // namespace agrifield::sim
