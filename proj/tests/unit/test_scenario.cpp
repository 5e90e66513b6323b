#include "doctest.h"

#include <sstream>

#include "agrifield/errors.hpp"
#include "agrifield/gateway.hpp"
#include "agrifield/scenario.hpp"

using namespace agrifield;
using namespace agrifield::scenario;

namespace {

std::string trace_csv(const ScenarioResult& r) {
  std::ostringstream out;
  write_trace_csv(out, r);
  return out.str();
}

}  // namespace

TEST_CASE("scenario files parse with defaults for missing keys") {
  const auto s = load_scenario(AGRIFIELD_FIXTURES "/scenario_default.json");
  CHECK(s.initial_moisture == 30.0);
  CHECK(s.npk == NutrientProfile{10, 5, 10});
  CHECK(s.duration_ticks == 1000);
  const auto noisy = load_scenario(AGRIFIELD_FIXTURES "/scenario_noisy_manual.json");
  CHECK(noisy.sim.adc_noise_sd == 3.0);
  CHECK(noisy.sim.evap_rate == 0.05);
  REQUIRE(noisy.commands.size() == 2);
  CHECK(noisy.commands[0].mode == control::Mode::Manual);
  CHECK_FALSE(noisy.commands[1].manual_on);
}

TEST_CASE("bad scenarios are schema errors") {
  CHECK_THROWS_AS(load_scenario(AGRIFIELD_FIXTURES "/scenario_bad.json"), SchemaError);
  CHECK_THROWS_AS(load_scenario(AGRIFIELD_FIXTURES "/absent.json"), IoError);
  CHECK_THROWS_AS(parse_scenario("[1,2]"), SchemaError);
  CHECK_THROWS_AS(parse_scenario(R"({"duration_ticks": "long"})"), SchemaError);
  CHECK_THROWS_AS(parse_scenario(R"({"commands": [{"tick": 1, "mode": "eco"}]})"), SchemaError);
}

TEST_CASE("default scenario irrigates up to the threshold and holds there") {
  const auto s = load_scenario(AGRIFIELD_FIXTURES "/scenario_default.json");
  std::vector<std::string> frames;
  const auto r = run_scenario(s, nullptr, [&](const char* dir, std::span<const std::uint8_t> b) {
    frames.push_back(std::string(dir) + " " + modbus::to_hex(b));
  });
  REQUIRE(r.trace.size() == 1000);
  CHECK(r.npk_reading == NutrientProfile{10, 5, 10});
  REQUIRE(frames.size() == 2);
  CHECK(frames[0] == "tx 01 03 00 1E 00 03 65 CD");

  CHECK(r.trace.front().pump_on);
  CHECK(r.trace.front().moisture_pct == doctest::Approx(30.45));
  bool reached = false;
  for (const auto& row : r.trace) {
    if (row.moisture_pct >= 49.5) reached = true;
    if (reached) {
      REQUIRE(row.moisture_pct >= 49.5);
      REQUIRE(row.moisture_pct <= 50.5);
    }
  }
  CHECK(reached);
  CHECK(r.final_moisture == r.trace.back().moisture_pct);
}

TEST_CASE("scheduled manual override switches the pump off for its window") {
  const auto s = load_scenario(AGRIFIELD_FIXTURES "/scenario_noisy_manual.json");
  const auto r = run_scenario(s);
  for (const auto& row : r.trace) {
    if (row.tick >= 100 && row.tick < 200) {
      REQUIRE_FALSE(row.pump_on);
      REQUIRE(row.mode == control::Mode::Manual);
    } else {
      REQUIRE(row.mode == control::Mode::Auto);
    }
  }
  CHECK(r.trace[198].moisture_pct < r.trace[98].moisture_pct);
}

TEST_CASE("identical scenarios give byte-identical traces") {
  const auto s = load_scenario(AGRIFIELD_FIXTURES "/scenario_noisy_manual.json");
  CHECK(trace_csv(run_scenario(s)) == trace_csv(run_scenario(s)));
  auto other = s;
  other.sim.seed = 12;
  CHECK(trace_csv(run_scenario(other)) != trace_csv(run_scenario(s)));
  const std::string csv = trace_csv(run_scenario(s));
  CHECK(csv.rfind("tick,moisture_pct,adc,sensed_pct,pump_on,mode\n", 0) == 0);
}

TEST_CASE("scenario telemetry lands in the gateway") {
  auto s = load_scenario(AGRIFIELD_FIXTURES "/scenario_default.json");
  s.duration_ticks = 50;
  gateway::Gateway::Options o;
  gateway::Gateway gw(o);
  const auto r = run_scenario(s, &gw);
  const auto state = gw.get_state();
  CHECK(state.readings == 3 + 2 * 50);
  CHECK(state.get(Metric::NpkP)->value == 5.0);
  CHECK(state.get(Metric::MoisturePct)->tick == 49);
  CHECK(r.dropped_telemetry == 0);
  CHECK(gw.recommend("wheat").deficit == NutrientProfile{90, 15, 50});
}

TEST_CASE("register unit factor scales probe values") {
  auto s = load_scenario(AGRIFIELD_FIXTURES "/scenario_default.json");
  s.duration_ticks = 1;
  s.npk = {12.3, 4.5, 6.7};
  s.npk_unit_factor = 0.1;
  const auto r = run_scenario(s);
  CHECK(r.npk_reading.n == doctest::Approx(12.3));
  CHECK(r.npk_reading.k == doctest::Approx(6.7));
}
