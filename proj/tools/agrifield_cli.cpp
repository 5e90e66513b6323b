// agrifield: scenario runs, dose recommendations, crop-damage experiments
// and the gateway service from one binary.

#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"

#include "agrifield/agronomy.hpp"
#include "agrifield/damageml/dataset.hpp"
#include "agrifield/damageml/metrics.hpp"
#include "agrifield/damageml/pipeline.hpp"
#include "agrifield/errors.hpp"
#include "agrifield/gateway.hpp"
#include "agrifield/gateway_http.hpp"
#include "agrifield/scenario.hpp"

using namespace agrifield;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitIo = 2;

std::atomic<bool> g_stop{false};

void on_signal(int) { g_stop = true; }

modbus::InProcessLink::Tap hex_tap(bool enabled) {
  if (!enabled) return {};
  return [](const char* dir, std::span<const std::uint8_t> bytes) {
    std::cerr << "modbus " << dir << ": " << modbus::to_hex(bytes) << '\n';
  };
}

scenario::Scenario load_or_default(const std::string& path) {
  if (!path.empty()) return scenario::load_scenario(path);
  if (const char* env = std::getenv("AGRIFIELD_CONFIG"); env && *env)
    return scenario::load_scenario(env);
  return scenario::Scenario{};
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << text;
  if (!out) throw IoError("write failed for " + path);
}

// ---- run ------------------------------------------------------------------

struct RunArgs {
  std::string scenario;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> duration;
  std::string output;
};

int cmd_run(const RunArgs& a, bool dump_hex) {
  scenario::Scenario s = load_or_default(a.scenario);
  if (a.seed) s.sim.seed = *a.seed;
  if (a.duration) s.duration_ticks = *a.duration;
  const auto result = scenario::run_scenario(s, nullptr, hex_tap(dump_hex));
  std::ostringstream csv;
  scenario::write_trace_csv(csv, result);
  if (a.output.empty()) {
    std::cout << csv.str();
    std::cerr << scenario::format_summary(result);
  } else {
    write_text(a.output, csv.str());
    std::cout << scenario::format_summary(result);
  }
  return kExitOk;
}

// ---- recommend --------------------------------------------------------------

struct RecommendArgs {
  std::string crop;
  double n = 0, p = 0, k = 0;
  std::string crops_file;
  std::optional<double> req_n, req_p, req_k;
  bool exact_nitrogen = false;
};

int cmd_recommend(const RecommendArgs& a) {
  NutrientProfile required;
  std::string crop_name = a.crop;
  if (a.req_n || a.req_p || a.req_k) {
    if (!(a.req_n && a.req_p && a.req_k))
      throw ValidationError("requirement", "--req-n, --req-p and --req-k go together");
    required = {*a.req_n, *a.req_p, *a.req_k};
    if (crop_name.empty()) crop_name = "custom";
  } else {
    if (crop_name.empty()) throw ValidationError("crop", "--crop or requirement flags are required");
    auto table = agronomy::CropTable::builtin();
    if (!a.crops_file.empty()) table.merge(agronomy::CropTable::load(a.crops_file));
    const auto& crop = table.lookup(crop_name);
    crop_name = crop.crop_name;
    required = crop.required;
  }
  const NutrientProfile soil{a.n, a.p, a.k};
  const auto def = agronomy::deficit(soil, required);
  const auto rounding =
      a.exact_nitrogen ? agronomy::NitrogenRounding::Exact : agronomy::NitrogenRounding::WholeKg;
  const auto rec = agronomy::recommend_doses(def, rounding);
  std::cout << "crop: " << crop_name << "\n" << agronomy::format_dose_table(soil, required, def, rec);
  return kExitOk;
}

// ---- ml ----------------------------------------------------------------------

struct MlArgs {
  std::string data;
  std::size_t synthetic = 0;
  std::string model = "all";
  std::uint64_t seed = 1;
  std::string columns;
  std::string output;
  int trees = 50;
  int k = 5;
  unsigned threads = 0;
};

int cmd_ml(const MlArgs& a) {
  using namespace agrifield::damageml;
  if (a.data.empty() == (a.synthetic == 0))
    throw ValidationError("data", "give exactly one of --data or --synthetic");

  std::vector<DamageRecord> records;
  if (!a.data.empty()) {
    LoadOptions lo;
    if (!a.columns.empty()) lo.mapping = load_column_mapping(a.columns);
    records = load_records(a.data, lo);
  } else {
    records = synth_generate(a.synthetic, a.seed);
  }

  std::vector<ModelKind> kinds;
  if (a.model == "all") {
    kinds = {ModelKind::DecisionTree, ModelKind::RandomForest, ModelKind::Knn};
  } else {
    const auto kind = parse_model_kind(a.model);
    if (!kind) throw ValidationError("model", "must be dt, rf, knn or all");
    kinds = {*kind};
  }

  PipelineOptions opts;
  opts.seed = a.seed;
  opts.rf.n_trees = a.trees;
  opts.rf.threads = a.threads;
  opts.knn.k = a.k;
  const auto run = run_pipeline(records, kinds, opts);
  std::cout << "rows: " << records.size() << " train: " << run.n_train << " test: " << run.n_test
            << "\n"
            << format_report_table(run.reports);
  if (!a.output.empty()) write_text(a.output, format_report_csv(run.reports));
  return kExitOk;
}

// ---- serve -------------------------------------------------------------------

struct ServeArgs {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string log;
  std::string scenario;
  std::string crops_file;
  int tick_ms = 1000;
  bool exact_nitrogen = false;
};

int cmd_serve(const ServeArgs& a, bool dump_hex) {
  const scenario::Scenario s = load_or_default(a.scenario);
  s.validate();

  auto queue = std::make_shared<control::CommandQueue>();
  gateway::Gateway::Options go;
  if (!a.log.empty()) go.log_path = a.log;
  if (!a.crops_file.empty()) go.crops.merge(agronomy::CropTable::load(a.crops_file));
  go.rounding = a.exact_nitrogen ? agronomy::NitrogenRounding::Exact : agronomy::NitrogenRounding::WholeKg;
  gateway::Gateway gw(go, queue);

  // Resume from the replayed log: keep the operator's mode and continue the
  // tick count so new readings supersede old ones.
  const gateway::DeviceState replayed = gw.get_state();
  sim::FieldState initial;
  initial.moisture_pct = s.initial_moisture;
  initial.npk = s.npk;
  std::int64_t last_tick = -1;
  for (const auto& v : replayed.latest)
    if (v) last_tick = std::max(last_tick, v->tick);
  initial.clock = static_cast<std::uint64_t>(last_tick + 1);
  if (const auto& m = replayed.get(Metric::MoisturePct)) initial.moisture_pct = m->value;
  sim::Field field(initial, s.sim);
  control::Controller controller(s.controller,
                                 control::set_mode({}, replayed.mode, replayed.manual_on), s.device_id);

  gateway::HttpService http(gw);
  const int port = http.start(a.host, a.port);
  std::cout << "serving on http://" << a.host << ":" << port << std::endl;

  modbus::NpkSlave probe(s.npk_map, scenario::to_registers(s.npk, s.npk_unit_factor));
  modbus::InProcessLink link(probe);
  if (dump_hex) link.set_tap(hex_tap(true));
  scenario::read_and_publish_npk(link, s.npk_map, s.npk_unit_factor, s.device_id,
                                 static_cast<std::int64_t>(initial.clock), &gw);

  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  const auto period = std::chrono::milliseconds(a.tick_ms);
  auto next = std::chrono::steady_clock::now();
  while (!g_stop) {
    for (const auto& cmd : queue->drain()) controller.commands().push(cmd);
    controller.tick(field, &gw);
    next += period;
    while (!g_stop && std::chrono::steady_clock::now() < next)
      std::this_thread::sleep_for(std::min<std::chrono::steady_clock::duration>(
          std::chrono::milliseconds(20), next - std::chrono::steady_clock::now()));
  }
  http.stop();
  gw.flush();
  std::cout << "stopped after " << field.state().clock - initial.clock << " ticks" << std::endl;
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Smart irrigation, fertilizer dosing and crop-damage tools"};
  app.require_subcommand(1);
  bool dump_hex = false;
  app.add_flag("--dump-hex", dump_hex, "Print Modbus frames to stderr");

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "Run a closed-loop irrigation scenario");
  run_cmd->add_option("scenario,--scenario", run.scenario,
                      "Scenario JSON (default: $AGRIFIELD_CONFIG, else built-in)");
  run_cmd->add_option("--seed", run.seed, "Override the sensor noise seed");
  run_cmd->add_option("--duration", run.duration, "Override the number of ticks");
  run_cmd->add_option("-o,--output", run.output, "Trace CSV path (default: stdout)");

  RecommendArgs rec;
  auto* rec_cmd = app.add_subcommand("recommend", "Fertilizer doses for a crop and soil reading");
  rec_cmd->add_option("--crop", rec.crop, "Crop name");
  rec_cmd->add_option("--n", rec.n, "Soil nitrogen, kg/ha")->required()->check(CLI::NonNegativeNumber);
  rec_cmd->add_option("--p", rec.p, "Soil phosphorus, kg/ha")->required()->check(CLI::NonNegativeNumber);
  rec_cmd->add_option("--k", rec.k, "Soil potassium, kg/ha")->required()->check(CLI::NonNegativeNumber);
  rec_cmd->add_option("--crops", rec.crops_file, "Extra crop table CSV (crop_name,n,p,k)");
  rec_cmd->add_option("--req-n", rec.req_n, "Required nitrogen, kg/ha")->check(CLI::NonNegativeNumber);
  rec_cmd->add_option("--req-p", rec.req_p, "Required phosphorus, kg/ha")->check(CLI::NonNegativeNumber);
  rec_cmd->add_option("--req-k", rec.req_k, "Required potassium, kg/ha")->check(CLI::NonNegativeNumber);
  rec_cmd->add_flag("--exact-nitrogen", rec.exact_nitrogen,
                    "Size urea from the unrounded nitrogen remainder");

  MlArgs ml;
  auto* ml_cmd = app.add_subcommand("ml", "Train and score crop-damage classifiers");
  ml_cmd->add_option("--data", ml.data, "Crop-damage CSV");
  ml_cmd->add_option("--synthetic", ml.synthetic, "Generate this many synthetic rows instead");
  ml_cmd->add_option("--model", ml.model, "dt, rf, knn or all")->default_val("all");
  ml_cmd->add_option("--seed", ml.seed, "Seed for data, split and forest")->default_val(1);
  ml_cmd->add_option("--columns", ml.columns, "Column mapping CSV (canonical,actual)");
  ml_cmd->add_option("-o,--output", ml.output, "Metrics CSV path");
  ml_cmd->add_option("--trees", ml.trees, "Random forest size")->default_val(50)->check(CLI::PositiveNumber);
  ml_cmd->add_option("--k", ml.k, "Neighbours for KNN")->default_val(5)->check(CLI::PositiveNumber);
  ml_cmd->add_option("--threads", ml.threads, "Forest training threads (0: all cores)");

  ServeArgs serve;
  auto* serve_cmd = app.add_subcommand("serve", "Run the gateway API with a live controller");
  serve_cmd->add_option("--host", serve.host, "Bind address")->default_val("127.0.0.1");
  serve_cmd->add_option("--port", serve.port, "Port (0 picks a free one)")
      ->default_val(8080)
      ->check(CLI::Range(0, 65535));
  serve_cmd->add_option("--log", serve.log, "Telemetry log path (replayed on start)");
  serve_cmd->add_option("--scenario", serve.scenario, "Field and controller settings");
  serve_cmd->add_option("--crops", serve.crops_file, "Extra crop table CSV");
  serve_cmd->add_option("--tick-ms", serve.tick_ms, "Controller period in ms")
      ->default_val(1000)
      ->check(CLI::PositiveNumber);
  serve_cmd->add_flag("--exact-nitrogen", serve.exact_nitrogen,
                      "Size urea from the unrounded nitrogen remainder");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*run_cmd) return cmd_run(run, dump_hex);
    if (*rec_cmd) return cmd_recommend(rec);
    if (*ml_cmd) return cmd_ml(ml);
    if (*serve_cmd) return cmd_serve(serve, dump_hex);
  } catch (const NotFoundError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  }
  return kExitUsage;
}
