#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace agrifield {

enum class Metric { MoisturePct, PumpOn, NpkN, NpkP, NpkK };

inline constexpr Metric kAllMetrics[] = {Metric::MoisturePct, Metric::PumpOn, Metric::NpkN,
                                         Metric::NpkP, Metric::NpkK};

std::string_view to_string(Metric m);
std::optional<Metric> parse_metric(std::string_view name);

struct TelemetryRecord {
  std::string device_id;
  Metric metric = Metric::MoisturePct;
  double value = 0.0;
  std::int64_t tick = 0;
  std::int64_t received_at_ms = 0;  // wall clock, set by the store on ingest

  /// Throws ValidationError naming the first bad field.
  void validate() const;
  friend bool operator==(const TelemetryRecord&, const TelemetryRecord&) = default;
};

/// Destination for controller telemetry. `publish` may throw; callers treat
/// a throw as a dropped record.
class TelemetrySink {
 public:
  virtual ~TelemetrySink() = default;
  virtual void publish(TelemetryRecord record) = 0;
};

}  // namespace agrifield
