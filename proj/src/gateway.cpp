#include "agrifield/gateway.hpp"

#include <algorithm>
#include <chrono>
#include <mutex>

#include "agrifield/errors.hpp"

namespace agrifield::gateway {

using nlohmann::json;

json to_json(const TelemetryRecord& r) {
  return {{"device_id", r.device_id},
          {"metric", to_string(r.metric)},
          {"value", r.value},
          {"tick", r.tick},
          {"received_at", r.received_at_ms}};
}

json to_json(const DeviceState& s) {
  json metrics = json::object();
  for (Metric m : kAllMetrics) {
    const auto& v = s.get(m);
    metrics[std::string(to_string(m))] =
        v ? json{{"value", v->value}, {"tick", v->tick}} : json(nullptr);
  }
  json j{{"metrics", metrics},
         {"mode", control::to_string(s.mode)},
         {"manual_on", s.manual_on},
         {"readings", s.readings}};
  j["pump_on"] = s.pump_on ? json(*s.pump_on) : json(nullptr);
  const auto& moisture = s.get(Metric::MoisturePct);
  j["moisture_pct"] = moisture ? json(moisture->value) : json(nullptr);
  return j;
}

json to_json(const Recommendation& r) {
  auto profile = [](const NutrientProfile& p) { return json{{"n", p.n}, {"p", p.p}, {"k", p.k}}; };
  return {{"crop", r.crop.crop_name},
          {"required", profile(r.crop.required)},
          {"soil", profile(r.soil)},
          {"deficit", profile(r.deficit)},
          {"doses",
           {{"mop_kg_ha", r.doses.mop_kg_ha},
            {"dap_kg_ha", r.doses.dap_kg_ha},
            {"urea_kg_ha", r.doses.urea_kg_ha}}},
          {"supplied", profile(r.doses.supplied)},
          {"residual_deficit", profile(r.doses.residual_deficit)}};
}

TelemetryRecord record_from_json(const json& j) {
  if (!j.is_object()) throw ValidationError("body", "must be an object");
  TelemetryRecord r;
  auto field = [&](const char* name) -> const json& {
    auto it = j.find(name);
    if (it == j.end()) throw ValidationError(name, "is required");
    return *it;
  };
  const json& device = field("device_id");
  if (!device.is_string()) throw ValidationError("device_id", "must be a string");
  r.device_id = device.get<std::string>();

  const json& metric = field("metric");
  if (!metric.is_string()) throw ValidationError("metric", "must be a string");
  const auto m = parse_metric(metric.get<std::string>());
  if (!m) throw ValidationError("metric", "unknown metric '" + metric.get<std::string>() + "'");
  r.metric = *m;

  const json& value = field("value");
  if (value.is_boolean())
    r.value = value.get<bool>() ? 1.0 : 0.0;
  else if (value.is_number())
    r.value = value.get<double>();
  else
    throw ValidationError("value", "must be a number");

  const json& tick = field("tick");
  if (!tick.is_number_integer()) throw ValidationError("tick", "must be an integer");
  r.tick = tick.get<std::int64_t>();

  if (auto it = j.find("received_at"); it != j.end()) {
    if (!it->is_number_integer()) throw ValidationError("received_at", "must be an integer");
    r.received_at_ms = it->get<std::int64_t>();
  }
  r.validate();
  return r;
}

Gateway::Gateway(Options options, std::shared_ptr<control::CommandQueue> commands)
    : options_(std::move(options)), commands_(std::move(commands)) {
  if (!options_.clock) {
    options_.clock = [] {
      return std::chrono::duration_cast<std::chrono::milliseconds>(
                 std::chrono::system_clock::now().time_since_epoch())
          .count();
    };
  }
  if (options_.log_path) {
    if (std::filesystem::exists(*options_.log_path)) replay(*options_.log_path);
    log_.open(*options_.log_path, std::ios::app);
    if (!log_) throw IoError("cannot open telemetry log " + options_.log_path->string());
  }
}

void Gateway::replay(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read telemetry log " + path.string());
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    // A torn final line from a crash is skipped rather than failing startup.
    const json entry = json::parse(line, nullptr, false);
    if (entry.is_discarded() || !entry.is_object()) {
      ++skipped_lines_;
      continue;
    }
    try {
      const std::string kind = entry.value("kind", "");
      if (kind == "reading") {
        apply_reading(record_from_json(entry));
      } else if (kind == "command") {
        const auto mode = control::parse_mode(entry.at("mode").get<std::string>());
        if (!mode) throw ValidationError("mode", "unknown");
        apply_command(*mode, entry.at("on").get<bool>());
      } else {
        ++skipped_lines_;
      }
    } catch (const std::exception&) {
      ++skipped_lines_;
    }
  }
}

void Gateway::append_log(const json& entry) {
  if (!log_.is_open()) return;
  log_ << entry.dump() << '\n';
  log_.flush();
  if (!log_) throw IoError("telemetry log write failed");
}

void Gateway::apply_reading(const TelemetryRecord& r) {
  const auto idx = static_cast<std::size_t>(r.metric);
  auto& latest = state_.latest[idx];
  if (!latest || r.tick >= latest->tick) {
    latest = MetricValue{r.value, r.tick};
    if (r.metric == Metric::PumpOn) state_.pump_on = r.value != 0.0;
  }
  ++state_.readings;
  history_[idx].push_back(r);
}

void Gateway::apply_command(control::Mode mode, bool on) {
  state_.mode = mode;
  state_.manual_on = on;
}

std::uint64_t Gateway::ingest(TelemetryRecord record) {
  record.validate();
  if (record.received_at_ms == 0) record.received_at_ms = options_.clock();
  json entry = to_json(record);
  entry["kind"] = "reading";
  std::unique_lock lock(mu_);
  append_log(entry);
  apply_reading(record);
  return state_.readings;
}

DeviceState Gateway::get_state() const {
  std::shared_lock lock(mu_);
  return state_;
}

std::vector<TelemetryRecord> Gateway::get_history(Metric metric, std::size_t limit) const {
  std::vector<TelemetryRecord> out;
  {
    std::shared_lock lock(mu_);
    const auto& all = history_[static_cast<std::size_t>(metric)];
    out.assign(all.rbegin(), all.rend());
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const TelemetryRecord& a, const TelemetryRecord& b) { return a.tick > b.tick; });
  if (out.size() > limit) out.resize(limit);
  return out;
}

std::vector<TelemetryRecord> Gateway::get_history(std::string_view metric, std::size_t limit) const {
  const auto m = parse_metric(metric);
  if (!m) throw NotFoundError("unknown metric '" + std::string(metric) + "'");
  return get_history(*m, limit);
}

void Gateway::set_pump(std::string_view mode_name, bool on) {
  const auto mode = control::parse_mode(mode_name);
  if (!mode) throw ValidationError("mode", "must be 'auto' or 'manual'");
  const json entry{{"kind", "command"}, {"mode", control::to_string(*mode)}, {"on", on},
                   {"received_at", options_.clock()}};
  {
    std::unique_lock lock(mu_);
    append_log(entry);
    apply_command(*mode, on);
  }
  if (commands_) commands_->push({*mode, on});
}

Recommendation Gateway::recommend(std::string_view crop,
                                  const std::optional<NutrientProfile>& soil_override) const {
  Recommendation rec;
  rec.crop = options_.crops.lookup(crop);
  if (soil_override) {
    if (!soil_override->non_negative()) throw ValidationError("soil", "must be non-negative");
    rec.soil = *soil_override;
  } else {
    std::shared_lock lock(mu_);
    const auto& n = state_.get(Metric::NpkN);
    const auto& p = state_.get(Metric::NpkP);
    const auto& k = state_.get(Metric::NpkK);
    if (!n || !p || !k)
      throw PreconditionError("no NPK telemetry yet; supply soil values explicitly");
    rec.soil = {n->value, p->value, k->value};
  }
  rec.deficit = agronomy::deficit(rec.soil, rec.crop.required);
  rec.doses = agronomy::recommend_doses(rec.deficit, options_.rounding);
  return rec;
}

void Gateway::flush() {
  std::unique_lock lock(mu_);
  if (log_.is_open()) log_.flush();
}

}  // namespace agrifield::gateway
