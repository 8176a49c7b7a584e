// Python bindings: the DSL, the weight rule, batch experiments and corpus
// evaluation. Structured results cross the boundary as JSON text and are
// decoded by the pure-Python wrapper.

#include "langmpc/assistants/corpus.hpp"
#include "langmpc/assistants/pipeline.hpp"
#include "langmpc/assistants/reference_costs.hpp"
#include "langmpc/dsl/errors.hpp"
#include "langmpc/dsl/eval.hpp"
#include "langmpc/dsl/parser.hpp"
#include "langmpc/mpc/problem.hpp"
#include "langmpc/service/config.hpp"
#include "langmpc/service/protocol.hpp"
#include "langmpc/sim/metrics.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

namespace py = pybind11;
using namespace langmpc;

namespace {

dsl::Bindings to_bindings(const std::map<std::string, double>& values) {
  dsl::Bindings b;
  for (const auto& [name, value] : values) b.set(name, value);
  return b;
}

nlohmann::json metrics_json(const sim::Metrics& m) {
  return {{"collision", m.collision},         {"duration", m.duration},
          {"path_length", m.path_length},     {"min_distance", m.min_distance},
          {"mean_speed", m.mean_speed},       {"mean_abs_accel", m.mean_abs_accel},
          {"mean_abs_omega", m.mean_abs_omega}};
}

service::BackendConfig backend(const std::string& llm, const std::string& fixtures) {
  return {service::parse_backend(llm), fixtures, "gpt-4o-mini"};
}

std::string run_batch(const std::filesystem::path& scenario_file, const std::filesystem::path& variants_file,
                      const std::vector<std::string>& only, int episodes, std::uint64_t seed, const std::string& llm,
                      const std::string& fixtures) {
  const auto scenario = world::load_scenario(scenario_file);
  auto variants = sim::load_variants(variants_file);
  if (!only.empty()) {
    std::erase_if(variants, [&](const sim::Variant& v) {
      return std::find(only.begin(), only.end(), v.label) == only.end();
    });
  }
  const auto config = backend(llm, fixtures);
  service::make_client(config);
  std::vector<sim::VariantStats> table;
  {
    py::gil_scoped_release release;
    table = sim::run_batch(scenario, variants, episodes, seed, {}, [&] { return service::make_client(config); });
  }
  nlohmann::json out = nlohmann::json::array();
  for (const auto& s : table) {
    nlohmann::json runs = nlohmann::json::array();
    for (const auto& r : s.runs) runs.push_back(metrics_json(r));
    out.push_back({{"label", s.label},
                   {"description", s.description},
                   {"episodes", s.episodes},
                   {"collision_rate", s.collision_rate},
                   {"mean", metrics_json(s.mean)},
                   {"stddev", metrics_json(s.stddev)},
                   {"runs", runs}});
  }
  return out.dump();
}

std::string evaluate_corpus(const std::filesystem::path& corpus_file, int repetitions, const std::string& llm,
                            const std::string& fixtures) {
  const auto corpus = assistants::load_corpus(corpus_file);
  const auto config = backend(llm, fixtures);
  service::make_client(config);
  std::vector<assistants::EvalRow> rows;
  {
    py::gil_scoped_release release;
    rows = assistants::evaluate_corpus(
        corpus, [&] { return service::make_client(config); }, repetitions,
        dsl::default_parameters(2.0, {19.0, 0.0}));
  }
  nlohmann::json out = nlohmann::json::array();
  for (const auto& r : rows) {
    out.push_back({{"group", r.group},
                   {"id", r.id},
                   {"context", r.context},
                   {"successes", r.successes},
                   {"trials", r.trials},
                   {"rate", r.rate()},
                   {"last_failure", r.last_failure}});
  }
  return out.dump();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Language-steered model predictive control";

  static py::exception<dsl::DslError> dsl_error(m, "DslError", PyExc_ValueError);
  static py::exception<service::ProtocolError> protocol_error(m, "ProtocolError", PyExc_ValueError);
  static py::exception<service::ConfigError> config_error(m, "ConfigError", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const dsl::DslError& e) {
      dsl_error(e.what());
    } catch (const service::ProtocolError& e) {
      protocol_error(e.what());
    } catch (const service::ConfigError& e) {
      config_error(e.what());
    }
  });

  m.attr("PROTOCOL_VERSION") = service::kProtocolVersion;

  m.def("canonical", [](const std::string& source) { return dsl::to_source(dsl::parse_expr(source)); },
        py::arg("source"), "Parse an expression and print it back in canonical form.");
  m.def("evaluate",
        [](const std::string& source, const std::map<std::string, double>& bindings) {
          return dsl::eval(dsl::parse_expr(source), to_bindings(bindings));
        },
        py::arg("source"), py::arg("bindings"));
  m.def("gradient",
        [](const std::string& source, const std::map<std::string, double>& bindings,
           const std::vector<std::string>& wrt) { return dsl::grad(dsl::parse_expr(source), to_bindings(bindings), wrt); },
        py::arg("source"), py::arg("bindings"), py::arg("wrt"));
  m.def("human_constraint",
        [](std::pair<double, double> robot, std::pair<double, double> human, double robot_radius,
           double human_radius) {
          return mpc::human_constraint({robot.first, robot.second, 0.0, 0.0}, {human.first, human.second},
                                       robot_radius, human_radius);
        },
        py::arg("robot"), py::arg("human"), py::arg("robot_radius") = 0.3, py::arg("human_radius") = 0.3);
  m.def("ratings_to_weights", &assistants::ratings_to_weights, py::arg("ratings"));
  m.def("reference_cost_json",
        [](const std::string& name, double v_ref, std::pair<double, double> goal) {
          return dsl::to_json(assistants::reference_cost(name, dsl::default_parameters(v_ref, {goal.first, goal.second})))
              .dump();
        },
        py::arg("name"), py::arg("v_ref") = 2.0, py::arg("goal") = std::pair<double, double>{19.0, 0.0});
  m.def("parse_inbound_type",
        [](const std::string& text) {
          const auto msg = service::parse_inbound(text);
          return std::visit(
              [](const auto& v) -> std::string {
                using T = std::decay_t<decltype(v)>;
                if constexpr (std::is_same_v<T, service::QueryMsg>) return "query";
                else if constexpr (std::is_same_v<T, service::SceneMsg>) return "scene";
                else if constexpr (std::is_same_v<T, service::ControlMsg>) return "control";
                else return "hello";
              },
              msg);
        },
        py::arg("text"), "Validate a client frame and return its type.");
  m.def("run_batch_json", &run_batch, py::arg("scenario"), py::arg("variants"), py::arg("only"), py::arg("episodes"),
        py::arg("seed"), py::arg("llm"), py::arg("fixtures"));
  m.def("evaluate_corpus_json", &evaluate_corpus, py::arg("corpus"), py::arg("repetitions"), py::arg("llm"),
        py::arg("fixtures"));
}
