#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "tsnbound/bounds.hpp"
#include "tsnbound/sim/adversarial.hpp"
#include "tsnbound/sim/checks.hpp"
#include "tsnbound/sim/engine.hpp"

#include <nlohmann/json.hpp>

namespace py = pybind11;
using namespace tsnbound;
using model::NetworkSpec;

namespace {

py::tuple rat(const Rational& r) {
    return py::make_tuple(r.num().str(), r.den().str());
}

model::TrafficClass cls_arg(const std::string& s) {
    return model::traffic_class_from_string(s);
}

struct PyTrace {
    NetworkSpec spec;
    sim::SimTrace trace;
};

}  // namespace

PYBIND11_MODULE(_tsnbound, m) {
    m.doc() = "Worst-case latency and backlog bounds for CBS networks with "
              "interleaved regulators, plus the packet-level simulator";

    py::class_<NetworkSpec>(m, "NetworkSpec")
        .def_static("load",
                    [](const std::string& path) {
                        return model::load_spec_file(path).spec;
                    })
        .def_static("from_json",
                    [](const std::string& text) {
                        return model::load_spec(nlohmann::json::parse(text)).spec;
                    })
        .def("to_json", [](const NetworkSpec& s) { return model::to_json(s).dump(2); })
        .def("validate",
             [](const NetworkSpec& s) {
                 std::vector<std::pair<std::string, std::string>> out;
                 for (const auto& d : model::validate(s)) {
                     const char* sev =
                         d.severity == model::Diagnostic::Severity::Fatal
                             ? "fatal"
                             : d.severity == model::Diagnostic::Severity::Warning ? "warning"
                                                                                  : "notice";
                     out.emplace_back(sev, d.message);
                 }
                 return out;
             })
        .def("flows", [](const NetworkSpec& s) {
            std::vector<std::string> out;
            for (const auto& f : s.flows) out.push_back(f.id);
            return out;
        });

    m.def("cbfs_response_bound",
          [](const NetworkSpec& s, const std::string& f, const std::string& i,
             const std::string& j) { return rat(bounds::cbfs_response_bound(s, f, i, j)); });
    m.def("cbfs_waiting_bound",
          [](const NetworkSpec& s, const std::string& f, const std::string& i,
             const std::string& j) { return rat(bounds::cbfs_waiting_bound(s, f, i, j)); });
    m.def("ir_response_bound",
          [](const NetworkSpec& s, const std::string& f, const std::string& i,
             const std::string& j, const std::string& k) {
              return rat(bounds::ir_response_bound(s, f, i, j, k).value);
          });
    m.def("combined_bound",
          [](const NetworkSpec& s, const std::string& i, const std::string& j,
             const std::string& k, const std::string& cls) {
              return rat(bounds::combined_bound(s, i, j, k, cls_arg(cls)));
          });
    m.def("e2e_bound", [](const NetworkSpec& s, const std::string& f) {
        return rat(bounds::e2e_bound(s, f));
    });
    m.def("additive_e2e", [](const NetworkSpec& s, const std::string& f) {
        return rat(bounds::additive_e2e(s, f));
    });
    m.def("ir_backlog",
          [](const NetworkSpec& s, const std::string& i, const std::string& j,
             const std::string& k, const std::string& cls) {
              return rat(bounds::ir_backlog(s, i, j, k, cls_arg(cls)).value);
          });
    m.def("cbfs_backlog",
          [](const NetworkSpec& s, const std::string& i, const std::string& j,
             const std::string& cls) { return rat(bounds::cbfs_backlog(s, i, j, cls_arg(cls))); });
    m.def("bounds_report_json",
          [](const NetworkSpec& s) { return bounds::to_json(bounds::full_report(s)).dump(2); });
    m.def("bounds_table",
          [](const NetworkSpec& s) { return bounds::to_table(bounds::full_report(s)); });

    py::class_<PyTrace>(m, "Trace")
        .def("worst",
             [](const PyTrace& t, const std::string& flow, const std::string& metric,
                const std::string& i, const std::string& j, const std::string& k) {
                 return rat(worst_observed(t.trace, t.spec, flow,
                                           sim::metric_from_string(metric), i, j, k));
             },
             py::arg("flow"), py::arg("metric"), py::arg("i") = "", py::arg("j") = "",
             py::arg("k") = "")
        .def("max_backlog",
             [](const PyTrace& t, const std::string& queue) {
                 return sim::max_backlog(t.trace, queue);
             })
        .def("event_lines", [](const PyTrace& t) { return sim::to_event_lines(t.trace); })
        .def("to_json", [](const PyTrace& t) { return sim::to_json(t.trace).dump(); })
        .def("conformance",
             [](const PyTrace& t) {
                 std::vector<std::string> out;
                 bounds::BoundsReport report = bounds::full_report(t.spec);
                 for (const auto& v : sim::conformance_check(t.trace, t.spec, report))
                     out.push_back(v.describe());
                 return out;
             });

    m.def("simulate",
          [](const NetworkSpec& s, const std::string& scenario_json, std::int64_t horizon) {
              sim::Scenario sc = sim::scenario_from_json(nlohmann::json::parse(scenario_json));
              return PyTrace{s, sim::run(s, sc, horizon)};
          },
          py::arg("spec"), py::arg("scenario_json"), py::arg("horizon_ps"));

    auto adv_result = [](const NetworkSpec& s, sim::adversarial::Result&& adv) {
        py::dict out;
        out["scenario_json"] = sim::to_json(adv.scenario).dump();
        out["diagnostics"] = adv.diagnostics;
        out["horizon_ps"] = adv.horizon_hint;
        out["predicted_s"] = rat(adv.predicted_s);
        if (adv.predicted_h) out["predicted_h"] = rat(*adv.predicted_h);
        if (adv.predicted_e2e) out["predicted_e2e"] = rat(*adv.predicted_e2e);
        return out;
    };
    m.def("adversarial_scenario",
          [adv_result](const NetworkSpec& s, const std::string& flow, const std::string& i,
                       const std::string& j) {
              return adv_result(s, sim::adversarial::cbfs_tightness(s, flow, i, j));
          });
    m.def("adversarial_e2e", [adv_result](const NetworkSpec& s, const std::string& flow) {
        return adv_result(s, sim::adversarial::e2e_tightness(s, flow));
    });
}
