#include "agrifield/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include "json.hpp"

#include "agrifield/agronomy.hpp"
#include "agrifield/errors.hpp"

namespace agrifield::scenario {

using nlohmann::json;

void Scenario::validate() const {
  if (!(initial_moisture >= 0.0 && initial_moisture <= 100.0))
    throw DomainError("initial_moisture must lie in [0,100]");
  if (!npk.non_negative()) throw DomainError("npk must be non-negative");
  if (!(npk_unit_factor > 0.0)) throw DomainError("npk unit factor must be > 0");
  sim.validate();
  controller.validate();
  npk_map.validate();
}

Scenario parse_scenario(const std::string& json_text) {
  const json j = json::parse(json_text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw SchemaError("scenario is not a JSON object");
  Scenario s;
  try {
    s.initial_moisture = j.value("initial_moisture", s.initial_moisture);
    if (auto it = j.find("npk"); it != j.end()) {
      s.npk.n = it->value("n", s.npk.n);
      s.npk.p = it->value("p", s.npk.p);
      s.npk.k = it->value("k", s.npk.k);
    }
    if (auto it = j.find("sim"); it != j.end()) {
      s.sim.tick_seconds = it->value("tick_seconds", s.sim.tick_seconds);
      s.sim.evap_rate = it->value("evap_rate", s.sim.evap_rate);
      s.sim.infil_rate = it->value("infil_rate", s.sim.infil_rate);
      s.sim.adc_noise_sd = it->value("adc_noise_sd", s.sim.adc_noise_sd);
      s.sim.seed = it->value("seed", s.sim.seed);
    }
    if (auto it = j.find("controller"); it != j.end()) {
      s.controller.threshold_pct = it->value("threshold_pct", s.controller.threshold_pct);
      s.controller.hysteresis_pct = it->value("hysteresis_pct", s.controller.hysteresis_pct);
      s.controller.poll_ticks = it->value("poll_ticks", s.controller.poll_ticks);
    }
    if (auto it = j.find("modbus"); it != j.end()) {
      s.npk_map.slave_address = it->value("slave_address", s.npk_map.slave_address);
      const std::uint16_t base = it->value("n_register", s.npk_map.n_register);
      s.npk_map.n_register = base;
      s.npk_map.p_register = static_cast<std::uint16_t>(base + 1);
      s.npk_map.k_register = static_cast<std::uint16_t>(base + 2);
      s.npk_unit_factor = it->value("unit_factor", s.npk_unit_factor);
    }
    s.duration_ticks = j.value("duration_ticks", s.duration_ticks);
    s.device_id = j.value("device_id", s.device_id);
    if (auto it = j.find("commands"); it != j.end()) {
      for (const auto& c : *it) {
        ScheduledCommand cmd;
        cmd.tick = c.at("tick").get<std::uint64_t>();
        const auto mode = control::parse_mode(c.at("mode").get<std::string>());
        if (!mode) throw SchemaError("command mode must be 'auto' or 'manual'");
        cmd.mode = *mode;
        cmd.manual_on = c.value("on", false);
        s.commands.push_back(cmd);
      }
    }
  } catch (const json::exception& e) {
    throw SchemaError(std::string("bad scenario field: ") + e.what());
  }
  try {
    s.validate();
  } catch (const DomainError& e) {
    throw SchemaError(std::string("invalid scenario: ") + e.what());
  }
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open scenario " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

modbus::NpkRegisters to_registers(const NutrientProfile& npk, double unit_factor) {
  auto reg = [unit_factor](double v) {
    return static_cast<std::uint16_t>(std::clamp(std::lround(v / unit_factor), 0L, 65535L));
  };
  return {reg(npk.n), reg(npk.p), reg(npk.k)};
}

NutrientProfile read_and_publish_npk(modbus::InProcessLink& link, const modbus::NpkRegisterMap& map,
                                     double unit_factor, const std::string& device_id,
                                     std::int64_t tick, TelemetrySink* sink) {
  const NutrientProfile npk = agronomy::npk_from_registers(modbus::read_npk(link, map), unit_factor);
  if (sink) {
    for (auto [metric, value] : {std::pair{Metric::NpkN, npk.n}, std::pair{Metric::NpkP, npk.p},
                                 std::pair{Metric::NpkK, npk.k}}) {
      try {
        sink->publish({device_id, metric, value, tick, 0});
      } catch (...) {
        // store outages never stop the field loop
      }
    }
  }
  return npk;
}

ScenarioResult run_scenario(const Scenario& s, TelemetrySink* sink,
                            const modbus::InProcessLink::Tap& tap) {
  s.validate();
  sim::FieldState initial;
  initial.moisture_pct = s.initial_moisture;
  initial.npk = s.npk;
  sim::Field field(initial, s.sim);
  control::Controller controller(s.controller, {}, s.device_id);

  modbus::NpkSlave probe(s.npk_map, to_registers(s.npk, s.npk_unit_factor));
  modbus::InProcessLink link(probe);
  if (tap) link.set_tap(tap);

  ScenarioResult result;
  result.npk_reading = read_and_publish_npk(link, s.npk_map, s.npk_unit_factor, s.device_id, 0, sink);

  std::vector<ScheduledCommand> pending = s.commands;
  std::stable_sort(pending.begin(), pending.end(),
                   [](const auto& a, const auto& b) { return a.tick < b.tick; });
  auto next_cmd = pending.begin();

  result.trace.reserve(s.duration_ticks);
  for (std::uint64_t t = 1; t <= s.duration_ticks; ++t) {
    for (; next_cmd != pending.end() && next_cmd->tick <= t; ++next_cmd)
      controller.commands().push({next_cmd->mode, next_cmd->manual_on});
    const control::TickResult r = controller.tick(field, sink);
    result.trace.push_back({t, field.state().moisture_pct, r.adc, r.sensed_moisture, r.pump_on, r.mode});
    if (r.pump_on) ++result.ticks_pump_on;
  }
  result.final_moisture = field.state().moisture_pct;
  result.dropped_telemetry = controller.dropped_telemetry();
  return result;
}

void write_trace_csv(std::ostream& out, const ScenarioResult& result) {
  out << "tick,moisture_pct,adc,sensed_pct,pump_on,mode\n";
  char buf[128];
  for (const TraceRow& r : result.trace) {
    std::snprintf(buf, sizeof buf, "%llu,%.4f,%d,%.4f,%d,", static_cast<unsigned long long>(r.tick),
                  r.moisture_pct, r.adc, r.sensed_pct, r.pump_on ? 1 : 0);
    out << buf << control::to_string(r.mode) << '\n';
  }
}

std::string format_summary(const ScenarioResult& result) {
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "ticks: %zu\nticks_pump_on: %llu\nfinal_moisture_pct: %.4f\n"
                "npk_kg_ha: %.2f %.2f %.2f\ndropped_telemetry: %llu\n",
                result.trace.size(), static_cast<unsigned long long>(result.ticks_pump_on),
                result.final_moisture, result.npk_reading.n, result.npk_reading.p,
                result.npk_reading.k, static_cast<unsigned long long>(result.dropped_telemetry));
  return buf;
}

}  // namespace agrifield::scenario
