#include "agrifield/telemetry.hpp"

#include <cmath>

#include "agrifield/errors.hpp"

namespace agrifield {

std::string_view to_string(Metric m) {
  switch (m) {
    case Metric::MoisturePct: return "moisture_pct";
    case Metric::PumpOn: return "pump_on";
    case Metric::NpkN: return "npk_n";
    case Metric::NpkP: return "npk_p";
    case Metric::NpkK: return "npk_k";
  }
  return "?";
}

std::optional<Metric> parse_metric(std::string_view name) {
  for (Metric m : kAllMetrics)
    if (to_string(m) == name) return m;
  return std::nullopt;
}

void TelemetryRecord::validate() const {
  if (device_id.empty()) throw ValidationError("device_id", "must be non-empty");
  if (tick < 0) throw ValidationError("tick", "must be non-negative");
  if (!std::isfinite(value)) throw ValidationError("value", "must be finite");
  switch (metric) {
    case Metric::MoisturePct:
      if (value < 0.0 || value > 100.0) throw ValidationError("value", "moisture must lie in [0,100]");
      break;
    case Metric::PumpOn:
      if (value != 0.0 && value != 1.0) throw ValidationError("value", "pump_on must be 0 or 1");
      break;
    default:
      if (value < 0.0) throw ValidationError("value", "nutrient readings must be non-negative");
  }
}

}  // namespace agrifield
