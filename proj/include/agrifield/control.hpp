#pragma once

#include <cstdint>
#include <deque>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>

#include "agrifield/simcore.hpp"
#include "agrifield/telemetry.hpp"

namespace agrifield::control {

struct ControllerConfig {
  double threshold_pct = 50.0;
  double hysteresis_pct = 0.0;
  int poll_ticks = 1;

  void validate() const;
};

enum class Mode { Auto, Manual };

std::string_view to_string(Mode m);
std::optional<Mode> parse_mode(std::string_view name);

struct ControllerState {
  Mode mode = Mode::Auto;
  bool manual_on = false;
  bool pump_on = false;
  std::optional<double> last_moisture;

  friend bool operator==(const ControllerState&, const ControllerState&) = default;
};

enum class Reason { BelowThreshold, ReachedThreshold, Manual, Hold };

std::string_view to_string(Reason r);

struct PumpCommand {
  bool turn_on = false;
  Reason reason = Reason::Hold;

  friend bool operator==(const PumpCommand&, const PumpCommand&) = default;
};

/// Irrigation decision for one moisture reading.
///
/// Manual mode follows `manual_on`. In auto mode the pump starts below
/// `threshold - hysteresis`, stops once moisture reaches the threshold and
/// otherwise keeps its previous state.
PumpCommand decide(double moisture_pct, const ControllerState& state, const ControllerConfig& cfg);

ControllerState set_mode(ControllerState state, Mode mode, bool manual_on);

struct ModeCommand {
  Mode mode = Mode::Auto;
  bool manual_on = false;
};

/// Multi-producer, single-consumer queue of operator mode changes.
class CommandQueue {
 public:
  void push(ModeCommand cmd);
  std::deque<ModeCommand> drain();

 private:
  std::mutex mu_;
  std::deque<ModeCommand> pending_;
};

struct TickResult {
  std::uint64_t tick = 0;        // field clock at decision time
  double field_moisture = 0.0;   // true soil moisture when sampled
  int adc = 0;
  double sensed_moisture = 0.0;  // adc_to_moisture(adc), the decision input
  bool decided = false;          // false on ticks skipped by poll_ticks
  PumpCommand command;
  bool pump_on = false;
  Mode mode = Mode::Auto;
};

/// Closed-loop irrigation controller driving a simulated field.
class Controller {
 public:
  explicit Controller(ControllerConfig cfg = {}, ControllerState initial = {},
                      std::string device_id = "field-1");

  /// Applies queued mode commands, samples the probe on poll ticks, actuates
  /// the pump, advances the field and publishes telemetry. Telemetry failures
  /// are counted and never block actuation.
  TickResult tick(sim::Field& field, TelemetrySink* sink);

  CommandQueue& commands() noexcept { return commands_; }
  const ControllerState& state() const noexcept { return state_; }
  const ControllerConfig& config() const noexcept { return cfg_; }
  std::uint64_t dropped_telemetry() const noexcept { return dropped_; }

 private:
  void emit(TelemetrySink* sink, Metric metric, double value, std::uint64_t tick);

  ControllerConfig cfg_;
  ControllerState state_;
  std::string device_id_;
  CommandQueue commands_;
  std::uint64_t dropped_ = 0;
};

}  // namespace agrifield::control
