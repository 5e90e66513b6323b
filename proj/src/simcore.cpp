#include "agrifield/simcore.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "agrifield/errors.hpp"

namespace agrifield::sim {

void SimConfig::validate() const {
  if (!(tick_seconds > 0.0)) throw DomainError("tick_seconds must be > 0");
  if (!(evap_rate >= 0.0)) throw DomainError("evap_rate must be >= 0");
  if (!(infil_rate > evap_rate)) throw DomainError("infil_rate must exceed evap_rate");
  if (!(adc_noise_sd >= 0.0)) throw DomainError("adc_noise_sd must be >= 0");
}

void FieldState::validate() const {
  if (!(moisture_pct >= 0.0 && moisture_pct <= 100.0))
    throw DomainError("moisture_pct must lie in [0,100]");
  if (!npk.non_negative()) throw DomainError("npk components must be >= 0");
}

double adc_to_moisture(int counts) {
  if (counts < 0 || counts > kAdcMax)
    throw DomainError("ADC counts out of range [0,1023]: " + std::to_string(counts));
  const double analog = static_cast<double>(counts) / kAdcMax;
  return 100.0 - analog * 100.0;
}

int moisture_to_adc(double moisture_pct) {
  if (!(moisture_pct >= 0.0 && moisture_pct <= 100.0))
    throw DomainError("moisture out of range [0,100]: " + std::to_string(moisture_pct));
  return static_cast<int>(std::lround((100.0 - moisture_pct) / 100.0 * kAdcMax));
}

FieldState step_field(const FieldState& state, bool pump_on, const SimConfig& cfg) {
  FieldState next = state;
  double m = state.moisture_pct - cfg.evap_rate;
  if (pump_on) m += cfg.infil_rate;
  next.moisture_pct = std::clamp(m, 0.0, 100.0);
  next.pump_on = pump_on;
  ++next.clock;
  return next;
}

double standard_normal(Rng& rng) {
  auto uniform = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

AdcSample sample_adc(const FieldState& state, Rng& rng, const SimConfig& cfg) {
  int counts = moisture_to_adc(state.moisture_pct);
  if (cfg.adc_noise_sd > 0.0) {
    const double noise = standard_normal(rng) * cfg.adc_noise_sd;
    counts = std::clamp(counts + static_cast<int>(std::lround(noise)), 0, kAdcMax);
  }
  return {counts, state.clock};
}

Field::Field(FieldState initial, SimConfig cfg)
    : state_(initial), cfg_(cfg), rng_(cfg.seed) {
  cfg_.validate();
  state_.validate();
}

AdcSample Field::sample() { return sample_adc(state_, rng_, cfg_); }

const FieldState& Field::step(bool pump_on) {
  state_ = step_field(state_, pump_on, cfg_);
  return state_;
}

}  // namespace agrifield::sim
