#include "agrifield/control.hpp"

#include <utility>

#include "agrifield/errors.hpp"

namespace agrifield::control {

void ControllerConfig::validate() const {
  if (!(threshold_pct > 0.0 && threshold_pct < 100.0))
    throw DomainError("threshold_pct must lie in (0,100)");
  if (!(hysteresis_pct >= 0.0)) throw DomainError("hysteresis_pct must be >= 0");
  if (threshold_pct + hysteresis_pct > 100.0)
    throw DomainError("threshold_pct + hysteresis_pct must not exceed 100");
  if (poll_ticks < 1) throw DomainError("poll_ticks must be >= 1");
}

std::string_view to_string(Mode m) { return m == Mode::Auto ? "auto" : "manual"; }

std::optional<Mode> parse_mode(std::string_view name) {
  if (name == "auto") return Mode::Auto;
  if (name == "manual") return Mode::Manual;
  return std::nullopt;
}

std::string_view to_string(Reason r) {
  switch (r) {
    case Reason::BelowThreshold: return "below_threshold";
    case Reason::ReachedThreshold: return "reached_threshold";
    case Reason::Manual: return "manual";
    case Reason::Hold: return "hold";
  }
  return "hold";
}

PumpCommand decide(double moisture_pct, const ControllerState& state, const ControllerConfig& cfg) {
  if (!(moisture_pct >= 0.0 && moisture_pct <= 100.0))
    throw DomainError("moisture out of range [0,100]");
  if (state.mode == Mode::Manual) return {state.manual_on, Reason::Manual};
  if (moisture_pct < cfg.threshold_pct - cfg.hysteresis_pct) return {true, Reason::BelowThreshold};
  if (moisture_pct >= cfg.threshold_pct) return {false, Reason::ReachedThreshold};
  return {state.pump_on, Reason::Hold};
}

ControllerState set_mode(ControllerState state, Mode mode, bool manual_on) {
  state.mode = mode;
  state.manual_on = manual_on;
  return state;
}

void CommandQueue::push(ModeCommand cmd) {
  std::lock_guard lock(mu_);
  pending_.push_back(cmd);
}

std::deque<ModeCommand> CommandQueue::drain() {
  std::lock_guard lock(mu_);
  return std::exchange(pending_, {});
}

Controller::Controller(ControllerConfig cfg, ControllerState initial, std::string device_id)
    : cfg_(cfg), state_(initial), device_id_(std::move(device_id)) {
  cfg_.validate();
}

void Controller::emit(TelemetrySink* sink, Metric metric, double value, std::uint64_t tick) {
  if (!sink) return;
  try {
    sink->publish({device_id_, metric, value, static_cast<std::int64_t>(tick), 0});
  } catch (...) {
    ++dropped_;
  }
}

TickResult Controller::tick(sim::Field& field, TelemetrySink* sink) {
  for (const ModeCommand& cmd : commands_.drain())
    state_ = set_mode(state_, cmd.mode, cmd.manual_on);

  TickResult r;
  r.tick = field.state().clock;
  r.field_moisture = field.state().moisture_pct;

  // Manual mode must hold pump_on == manual_on after every tick, so mode
  // changes take effect even between polls.
  const bool poll = r.tick % static_cast<std::uint64_t>(cfg_.poll_ticks) == 0;
  if (poll) {
    const sim::AdcSample s = field.sample();
    r.adc = s.counts;
    r.sensed_moisture = sim::adc_to_moisture(s.counts);
    r.decided = true;
    r.command = decide(r.sensed_moisture, state_, cfg_);
    state_.last_moisture = r.sensed_moisture;
  } else if (state_.mode == Mode::Manual) {
    r.command = {state_.manual_on, Reason::Manual};
  } else {
    r.command = {state_.pump_on, Reason::Hold};
  }
  state_.pump_on = r.command.turn_on;
  r.pump_on = state_.pump_on;
  r.mode = state_.mode;

  field.step(state_.pump_on);

  if (poll) emit(sink, Metric::MoisturePct, r.sensed_moisture, r.tick);
  emit(sink, Metric::PumpOn, r.pump_on ? 1.0 : 0.0, r.tick);
  return r;
}

}  // namespace agrifield::control
