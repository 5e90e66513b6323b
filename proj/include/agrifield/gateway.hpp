#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "agrifield/agronomy.hpp"
#include "agrifield/control.hpp"
#include "agrifield/telemetry.hpp"

namespace agrifield::gateway {

struct MetricValue {
  double value = 0.0;
  std::int64_t tick = 0;
  friend bool operator==(const MetricValue&, const MetricValue&) = default;
};

struct DeviceState {
  std::array<std::optional<MetricValue>, std::size(kAllMetrics)> latest{};
  control::Mode mode = control::Mode::Auto;
  bool manual_on = false;
  std::optional<bool> pump_on;
  std::uint64_t readings = 0;

  const std::optional<MetricValue>& get(Metric m) const { return latest[static_cast<std::size_t>(m)]; }
  friend bool operator==(const DeviceState&, const DeviceState&) = default;
};

struct Recommendation {
  agronomy::CropRequirement crop;
  NutrientProfile soil;
  NutrientProfile deficit;
  agronomy::DoseRecommendation doses;
};

nlohmann::json to_json(const TelemetryRecord& r);
nlohmann::json to_json(const DeviceState& s);
nlohmann::json to_json(const Recommendation& r);

/// Parses a reading body; unknown metrics and missing or mistyped fields
/// throw ValidationError naming the field.
TelemetryRecord record_from_json(const nlohmann::json& j);

/// Telemetry store and command endpoint for one field.
///
/// Every accepted reading and pump command is appended to a line-delimited
/// JSON log before it becomes visible; opening a store on an existing log
/// replays it. Writers are serialized, readers get consistent snapshots.
class Gateway : public TelemetrySink {
 public:
  struct Options {
    std::optional<std::filesystem::path> log_path;
    agronomy::CropTable crops = agronomy::CropTable::builtin();
    agronomy::NitrogenRounding rounding = agronomy::NitrogenRounding::Exact;
    std::function<std::int64_t()> clock;  // ms since epoch; defaults to system_clock
  };

  explicit Gateway(Options options, std::shared_ptr<control::CommandQueue> commands = nullptr);
  Gateway(const Gateway&) = delete;
  Gateway& operator=(const Gateway&) = delete;

  /// Validates, logs and applies one reading; returns its sequence number.
  /// `received_at_ms` is stamped unless already set.
  std::uint64_t ingest(TelemetryRecord record);
  void publish(TelemetryRecord record) override { ingest(std::move(record)); }

  DeviceState get_state() const;

  /// Newest first by tick (later ingests first on equal ticks), at most `limit`.
  std::vector<TelemetryRecord> get_history(Metric metric, std::size_t limit) const;
  /// Same, by metric name; throws NotFoundError for unknown names.
  std::vector<TelemetryRecord> get_history(std::string_view metric, std::size_t limit) const;

  /// Queues a mode change for the controller. Throws ValidationError for an
  /// unknown mode.
  void set_pump(std::string_view mode, bool on);

  /// Doses for `crop` from the latest NPK readings or `soil_override`.
  /// Throws NotFoundError for unknown crops and PreconditionError when no
  /// soil data is available.
  Recommendation recommend(std::string_view crop,
                           const std::optional<NutrientProfile>& soil_override = std::nullopt) const;

  void flush();
  std::size_t skipped_log_lines() const noexcept { return skipped_lines_; }
  const agronomy::CropTable& crops() const noexcept { return options_.crops; }

 private:
  void apply_reading(const TelemetryRecord& r);
  void apply_command(control::Mode mode, bool on);
  void append_log(const nlohmann::json& entry);
  void replay(const std::filesystem::path& path);

  Options options_;
  std::shared_ptr<control::CommandQueue> commands_;
  mutable std::shared_mutex mu_;
  DeviceState state_;
  std::array<std::vector<TelemetryRecord>, std::size(kAllMetrics)> history_;
  std::ofstream log_;
  std::size_t skipped_lines_ = 0;
};

}  // namespace agrifield::gateway
