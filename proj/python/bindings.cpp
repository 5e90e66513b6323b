#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "agrifield/agronomy.hpp"
#include "agrifield/control.hpp"
#include "agrifield/damageml/dataset.hpp"
#include "agrifield/damageml/metrics.hpp"
#include "agrifield/damageml/models.hpp"
#include "agrifield/damageml/pipeline.hpp"
#include "agrifield/errors.hpp"
#include "agrifield/modbus.hpp"
#include "agrifield/scenario.hpp"
#include "agrifield/simcore.hpp"

namespace py = pybind11;
using namespace agrifield;

namespace {

modbus::Bytes to_bytes(const py::bytes& b) {
  const std::string s = b;
  return modbus::Bytes(s.begin(), s.end());
}

py::bytes from_bytes(const modbus::Bytes& b) {
  return py::bytes(reinterpret_cast<const char*>(b.data()), b.size());
}

py::dict metrics_dict(const damageml::Evaluation& ev) {
  py::list classes;
  for (const auto& c : ev.report.per_class) {
    py::dict d;
    d["precision"] = c.precision;
    d["recall"] = c.recall;
    d["f1"] = c.f1;
    d["support"] = c.support;
    classes.append(d);
  }
  py::dict out;
  out["accuracy"] = ev.report.accuracy;
  out["macro_f1"] = ev.report.macro_f1;
  out["per_class"] = classes;
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Core routines of the agrifield library";

  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<SchemaError>(m, "SchemaError", PyExc_ValueError);
  py::register_exception<ProtocolError>(m, "ProtocolError", PyExc_ValueError);
  py::register_exception<NotFoundError>(m, "NotFoundError", PyExc_KeyError);

  py::class_<NutrientProfile>(m, "NutrientProfile")
      .def(py::init<>())
      .def(py::init([](double n, double p, double k) { return NutrientProfile{n, p, k}; }),
           py::arg("n"), py::arg("p"), py::arg("k"))
      .def_readwrite("n", &NutrientProfile::n)
      .def_readwrite("p", &NutrientProfile::p)
      .def_readwrite("k", &NutrientProfile::k)
      .def("__eq__", [](const NutrientProfile& a, const NutrientProfile& b) { return a == b; })
      .def("__repr__", [](const NutrientProfile& p) {
        std::ostringstream s;
        s << "NutrientProfile(n=" << p.n << ", p=" << p.p << ", k=" << p.k << ")";
        return s.str();
      });

  m.def("adc_to_moisture", &sim::adc_to_moisture, py::arg("counts"));
  m.def("moisture_to_adc", &sim::moisture_to_adc, py::arg("moisture_pct"));

  m.def("crc16", [](const py::bytes& b) { return modbus::crc16(to_bytes(b)); }, py::arg("data"));
  m.def(
      "encode_read_request",
      [](std::uint8_t address, std::uint16_t start, std::uint16_t count) {
        return from_bytes(modbus::encode_read_request(address, {start, count}));
      },
      py::arg("address"), py::arg("start_register"), py::arg("count"));
  m.def(
      "decode_frame",
      [](const py::bytes& wire) {
        const auto f = modbus::decode_frame(to_bytes(wire));
        return py::make_tuple(f.address, f.function, from_bytes(f.payload));
      },
      py::arg("wire"), "Returns (address, function, payload); raises on bad CRC or length.");
  m.def(
      "slave_respond",
      [](const py::bytes& request, std::uint16_t n, std::uint16_t p, std::uint16_t k) -> py::object {
        const auto reply = modbus::slave_respond({}, to_bytes(request), {n, p, k});
        if (!reply) return py::none();
        return from_bytes(*reply);
      },
      py::arg("request"), py::arg("n"), py::arg("p"), py::arg("k"),
      "Reply of an NPK probe at address 1, or None when it stays silent.");

  py::class_<agronomy::DoseRecommendation>(m, "DoseRecommendation")
      .def_readonly("mop_kg_ha", &agronomy::DoseRecommendation::mop_kg_ha)
      .def_readonly("dap_kg_ha", &agronomy::DoseRecommendation::dap_kg_ha)
      .def_readonly("urea_kg_ha", &agronomy::DoseRecommendation::urea_kg_ha)
      .def_readonly("supplied", &agronomy::DoseRecommendation::supplied)
      .def_readonly("residual_deficit", &agronomy::DoseRecommendation::residual_deficit);

  m.def("deficit", &agronomy::deficit, py::arg("soil"), py::arg("required"));
  m.def(
      "recommend_doses",
      [](const NutrientProfile& def, bool round_nitrogen) {
        return agronomy::recommend_doses(
            def, round_nitrogen ? agronomy::NitrogenRounding::WholeKg : agronomy::NitrogenRounding::Exact);
      },
      py::arg("deficit"), py::arg("round_nitrogen") = false);

  py::class_<control::ControllerConfig>(m, "ControllerConfig")
      .def(py::init<>())
      .def_readwrite("threshold_pct", &control::ControllerConfig::threshold_pct)
      .def_readwrite("hysteresis_pct", &control::ControllerConfig::hysteresis_pct)
      .def_readwrite("poll_ticks", &control::ControllerConfig::poll_ticks);

  m.def(
      "decide",
      [](double moisture, bool pump_on, const std::string& mode, bool manual_on,
         const control::ControllerConfig& cfg) {
        const auto parsed = control::parse_mode(mode);
        if (!parsed) throw DomainError("mode must be 'auto' or 'manual'");
        control::ControllerState st = control::set_mode({}, *parsed, manual_on);
        st.pump_on = pump_on;
        const auto cmd = control::decide(moisture, st, cfg);
        return py::make_tuple(cmd.turn_on, std::string(control::to_string(cmd.reason)));
      },
      py::arg("moisture_pct"), py::arg("pump_on") = false, py::arg("mode") = "auto",
      py::arg("manual_on") = false, py::arg("config") = control::ControllerConfig{},
      "Returns (turn_on, reason).");

  m.def(
      "run_scenario",
      [](const std::string& json_text) {
        const auto result = scenario::run_scenario(scenario::parse_scenario(json_text));
        std::ostringstream csv;
        scenario::write_trace_csv(csv, result);
        py::dict out;
        out["csv"] = csv.str();
        out["ticks_pump_on"] = result.ticks_pump_on;
        out["final_moisture"] = result.final_moisture;
        out["npk"] = result.npk_reading;
        return out;
      },
      py::arg("scenario_json"), "Runs a scenario given as JSON text; returns the trace CSV and summary.");

  m.def(
      "synth_generate",
      [](std::size_t n, std::uint64_t seed, double noise_rate, double missing_rate) {
        damageml::SynthOptions opts;
        opts.noise_rate = noise_rate;
        opts.missing_rate = missing_rate;
        py::list rows;
        for (const auto& r : damageml::synth_generate(n, seed, opts)) {
          py::dict d;
          d[damageml::kIdColumn] = r.id;
          for (const auto& col : damageml::kFeatureColumns) {
            const auto& v = r.*col.member;
            d[col.name] = v ? py::cast(*v) : py::none();
          }
          d[damageml::kLabelColumn] = r.crop_damage ? py::cast(*r.crop_damage) : py::none();
          rows.append(d);
        }
        return rows;
      },
      py::arg("n"), py::arg("seed"), py::arg("noise_rate") = 0.05, py::arg("missing_rate") = 0.10);

  m.def(
      "run_pipeline",
      [](std::size_t synthetic_rows, std::uint64_t seed, const std::vector<std::string>& models) {
        std::vector<damageml::ModelKind> kinds;
        for (const auto& name : models) {
          const auto k = damageml::parse_model_kind(name);
          if (!k) throw DomainError("unknown model '" + name + "'");
          kinds.push_back(*k);
        }
        damageml::PipelineOptions opts;
        opts.seed = seed;
        const auto run = damageml::run_pipeline(damageml::synth_generate(synthetic_rows, seed), kinds, opts);
        py::dict out;
        for (const auto& r : run.reports) out[py::str(r.model)] = metrics_dict(r.evaluation);
        return out;
      },
      py::arg("synthetic_rows"), py::arg("seed") = 1,
      py::arg("models") = std::vector<std::string>{"dt", "rf", "knn"},
      "Synthetic crop-damage experiment; returns metrics keyed by model name.");

  m.def(
      "evaluate",
      [](const std::vector<int>& y_true, const std::vector<int>& y_pred) {
        return metrics_dict(damageml::evaluate(y_true, y_pred));
      },
      py::arg("y_true"), py::arg("y_pred"));
  m.def("gini", [](const std::vector<int>& labels) { return damageml::gini(labels); }, py::arg("labels"));
}
