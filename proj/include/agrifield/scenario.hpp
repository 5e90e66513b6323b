#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "agrifield/control.hpp"
#include "agrifield/modbus.hpp"
#include "agrifield/simcore.hpp"

namespace agrifield::scenario {

struct ScheduledCommand {
  std::uint64_t tick = 1;  // applied before this tick runs
  control::Mode mode = control::Mode::Manual;
  bool manual_on = false;
};

/// Closed-loop run description. Loaded from JSON:
///
///   {"initial_moisture": 30, "npk": {"n": 10, "p": 5, "k": 10},
///    "sim": {"tick_seconds": 1, "evap_rate": 0.05, "infil_rate": 0.5,
///            "adc_noise_sd": 0, "seed": 0},
///    "controller": {"threshold_pct": 50, "hysteresis_pct": 0, "poll_ticks": 1},
///    "duration_ticks": 1000,
///    "commands": [{"tick": 200, "mode": "manual", "on": false}]}
///
/// Every key is optional; missing keys keep the defaults below.
struct Scenario {
  double initial_moisture = 30.0;
  NutrientProfile npk{10.0, 5.0, 10.0};
  sim::SimConfig sim;
  control::ControllerConfig controller;
  std::uint64_t duration_ticks = 1000;
  std::vector<ScheduledCommand> commands;
  modbus::NpkRegisterMap npk_map;
  double npk_unit_factor = 1.0;  // kg/ha per register count
  std::string device_id = "field-1";

  void validate() const;
};

/// Throws IoError when unreadable and SchemaError on malformed content.
Scenario load_scenario(const std::filesystem::path& path);
Scenario parse_scenario(const std::string& json_text);

struct TraceRow {
  std::uint64_t tick = 0;  // 1-based
  double moisture_pct = 0.0;  // field moisture at the end of the tick
  int adc = 0;
  double sensed_pct = 0.0;
  bool pump_on = false;
  control::Mode mode = control::Mode::Auto;

  friend bool operator==(const TraceRow&, const TraceRow&) = default;
};

struct ScenarioResult {
  std::vector<TraceRow> trace;
  std::uint64_t ticks_pump_on = 0;
  double final_moisture = 0.0;
  NutrientProfile npk_reading;
  std::uint64_t dropped_telemetry = 0;
};

/// Reads the NPK probe over the simulated Modbus link, then runs the
/// controller for `duration_ticks`. `tap`, when set, sees every frame.
ScenarioResult run_scenario(const Scenario& s, TelemetrySink* sink = nullptr,
                            const modbus::InProcessLink::Tap& tap = {});

/// Reads the probe once and publishes npk_n/p/k readings at `tick`.
NutrientProfile read_and_publish_npk(modbus::InProcessLink& link, const modbus::NpkRegisterMap& map,
                                     double unit_factor, const std::string& device_id,
                                     std::int64_t tick, TelemetrySink* sink);

modbus::NpkRegisters to_registers(const NutrientProfile& npk, double unit_factor);

/// CSV: tick,moisture_pct,adc,sensed_pct,pump_on,mode
void write_trace_csv(std::ostream& out, const ScenarioResult& result);
std::string format_summary(const ScenarioResult& result);

}  // namespace agrifield::scenario
