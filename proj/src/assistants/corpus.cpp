#include "langmpc/assistants/corpus.hpp"

#include "langmpc/assistants/reference_costs.hpp"
#include "langmpc/dsl/eval.hpp"

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <fstream>
#include <set>

namespace langmpc::assistants {
namespace {

Route route_from(const std::string& text) {
  for (const Route r : {Route::kGenerateNewCost, Route::kAdaptToEnvironment, Route::kUpdateParameters}) {
    if (text == to_string(r)) {
      return r;
    }
  }
  throw std::runtime_error(fmt::format("unknown route '{}'", text));
}

std::set<std::string> names_of(const dsl::CostSpec& spec) {
  const auto names = spec.term_names();
  return {names.begin(), names.end()};
}

bool refers_to_human(const dsl::Expr& e) {
  const auto vars = dsl::referenced_variables(e);
  return vars.count(dsl::Variable::kOhX) != 0 && vars.count(dsl::Variable::kOhY) != 0;
}

/// Value of `e` with the robot at `p` and the closest human at `h`.
double at(const dsl::Expr& e, const dsl::ParameterSet& params, double px, double py, double hx, double hy) {
  dsl::Bindings b{{"px", px}, {"py", py}, {"theta", 0.0}, {"v", 0.0}, {"a", 0.0}, {"omega", 0.0},
                  {"oh_x", hx}, {"oh_y", hy}, {"e_c", 0.0}, {"e_l", 0.0}};
  for (const auto& [name, p] : params.entries()) {
    b.set(name, p.value);
  }
  return dsl::eval(e, b);
}

std::optional<std::string> check_mandatory(const dsl::CostSpec& spec) {
  for (const char* m : dsl::kMandatoryTerms) {
    if (!spec.has_term(m)) {
      return fmt::format("missing mandatory term '{}'", m);
    }
  }
  return std::nullopt;
}

ImportanceRatings run_weights(const dsl::CostSpec& base, const std::string& query, std::string_view scene,
                              const std::shared_ptr<LlmClient>& client, double v_max, dsl::ParameterSet* params_out,
                              std::string* failure) {
  Assistants assistants(client, {v_max, 8, [] { return 0.0; }});
  ControllerHandle handle(make_active(base, initial_ratings(base), v_max));
  const auto events = assistants.handle_query({query, 0.0, 0}, handle, scene);
  if (events.empty() || events.back().stage != Stage::kApplied) {
    *failure = events.empty() ? "no events" : events.back().detail;
  }
  *params_out = handle.current()->spec.params;
  return handle.current()->ratings;
}

}  // namespace

Corpus load_corpus(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) {
    throw std::runtime_error(fmt::format("cannot open corpus {}", file.string()));
  }
  Corpus corpus;
  try {
    const auto doc = nlohmann::json::parse(in);
    for (const auto& c : doc.value("routing", nlohmann::json::array())) {
      RoutingCase rc{c.at("id"), c.at("query"), {}};
      for (const auto& [ctx, route] : c.at("expected").items()) {
        rc.expected[ctx] = route_from(route.get<std::string>());
      }
      corpus.routing.push_back(std::move(rc));
    }
    for (const auto& c : doc.value("generation", nlohmann::json::array())) {
      corpus.generation.push_back({c.at("id"), c.at("query"), c.at("shape")});
    }
    for (const auto& c : doc.value("weights", nlohmann::json::array())) {
      WeightCase wc{c.at("id"), c.at("query"), c.at("base"), {}};
      for (const auto& e : c.at("expect")) {
        Expectation x;
        x.is_param = e.contains("param");
        x.name = e.at(x.is_param ? "param" : "rating");
        x.direction = e.at("direction") == "up" ? 1 : -1;
        wc.expect.push_back(std::move(x));
      }
      corpus.weights.push_back(std::move(wc));
    }
    for (const auto& c : doc.value("camera", nlohmann::json::array())) {
      corpus.camera.push_back({c.at("id"), c.at("scene"), c.at("ratings").get<ImportanceRatings>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(fmt::format("malformed corpus {}: {}", file.string(), e.what()));
  }
  return corpus;
}

std::optional<std::string> shape_mismatch(const dsl::CostSpec& spec, std::string_view shape) {
  if (auto missing = check_mandatory(spec)) {
    return missing;
  }
  const auto names = names_of(spec);
  if (shape == "path" || shape == "goal") {
    const std::set<std::string> want = shape == "path"
                                           ? std::set<std::string>{"contour", "lag", "velocity", "accel", "omega"}
                                           : std::set<std::string>{"goal", "velocity", "accel", "omega"};
    if (names != want) {
      return fmt::format("terms {} differ from the expected set", fmt::join(names, ", "));
    }
    return std::nullopt;
  }
  for (const auto& t : spec.terms) {
    if (!refers_to_human(t.expr)) {
      continue;
    }
    if (shape == "inverse_distance") {
      // Largest next to the human, decaying with distance.
      const double near = at(t.expr, spec.params, 0.0, 0.0, 0.1, 0.0);
      const double mid = at(t.expr, spec.params, 0.0, 0.0, 1.0, 0.0);
      const double far = at(t.expr, spec.params, 0.0, 0.0, 3.0, 4.0);
      if (near > mid && mid > far && far > 0.0) {
        return std::nullopt;
      }
    } else if (shape == "human_quadratic") {
      const double zero = at(t.expr, spec.params, 2.0, -1.0, 2.0, -1.0);
      const double d25 = at(t.expr, spec.params, 1.0, 2.0, 4.0, 6.0);
      if (!dsl::contains_if_else(t.expr) && std::abs(zero) < 1e-12 && std::abs(d25 - 25.0) < 1e-9) {
        return std::nullopt;
      }
    } else if (shape == "safe_distance") {
      const auto d_safe = spec.params.entries().find("d_safe");
      if (d_safe == spec.params.entries().end() || !d_safe->second.tunable) {
        return std::string("no tunable d_safe parameter");
      }
      if (!spec.has_term("goal")) {
        return std::string("missing goal term");
      }
      const double d = d_safe->second.value;
      const bool conditional = dsl::contains_if_else(t.expr) &&
                               dsl::referenced_parameters(t.expr).count("d_safe") != 0;
      // Penalizes only inside d_safe.
      if (conditional && at(t.expr, spec.params, 0.0, 0.0, 0.5 * d, 0.0) > 0.0 &&
          at(t.expr, spec.params, 0.0, 0.0, 2.0 * d, 0.0) == 0.0) {
        return std::nullopt;
      }
    } else {
      return fmt::format("unknown shape '{}'", shape);
    }
  }
  return fmt::format("no term with the '{}' shape", shape);
}

std::vector<EvalRow> evaluate_corpus(const Corpus& corpus, const ClientFactory& make_client, int repetitions,
                                     const dsl::ParameterSet& params, double v_max) {
  const PipelineOptions options{v_max, 8, [] { return 0.0; }};
  std::vector<EvalRow> rows;
  for (const auto& c : corpus.routing) {
    for (const auto& [context, expected] : c.expected) {
      EvalRow row{"routing", c.id, context, 0, 0, {}};
      const auto base = reference_cost(context, params);
      for (int i = 0; i < repetitions; ++i) {
        ++row.trials;
        try {
          Assistants assistants(make_client(), options);
          const auto got = assistants.route(c.query, base).route;
          if (got == expected) {
            ++row.successes;
          } else {
            row.last_failure = fmt::format("got {}", to_string(got));
          }
        } catch (const std::exception& e) {
          row.last_failure = e.what();
        }
      }
      rows.push_back(std::move(row));
    }
  }
  const auto path = reference_cost("path", params);
  for (const auto& c : corpus.generation) {
    EvalRow row{"generation", c.id, "path", 0, 0, {}};
    for (int i = 0; i < repetitions; ++i) {
      ++row.trials;
      try {
        Assistants assistants(make_client(), options);
        const auto why = shape_mismatch(assistants.generate_cost(c.query, path), c.shape);
        if (!why) {
          ++row.successes;
        } else {
          row.last_failure = *why;
        }
      } catch (const std::exception& e) {
        row.last_failure = e.what();
      }
    }
    rows.push_back(std::move(row));
  }
  for (const auto& c : corpus.weights) {
    EvalRow row{"weights", c.id, c.base, 0, 0, {}};
    const auto base = reference_cost(c.base, params);
    const auto before_ratings = initial_ratings(base);
    for (int i = 0; i < repetitions; ++i) {
      ++row.trials;
      std::string failure;
      dsl::ParameterSet after_params;
      const auto after = run_weights(base, c.query, {}, make_client(), v_max, &after_params, &failure);
      for (const auto& e : c.expect) {
        if (!failure.empty()) {
          break;
        }
        const double before = e.is_param ? base.params.value(e.name) : before_ratings.at(e.name);
        const double now = e.is_param ? after_params.value(e.name) : after.at(e.name);
        if ((now - before) * e.direction <= 0.0) {
          failure = fmt::format("{} went from {} to {}", e.name, before, now);
        }
      }
      if (failure.empty()) {
        ++row.successes;
      } else {
        row.last_failure = failure;
      }
    }
    rows.push_back(std::move(row));
  }
  for (const auto& c : corpus.camera) {
    EvalRow row{"camera", c.id, "path", 0, 0, {}};
    for (int i = 0; i < repetitions; ++i) {
      ++row.trials;
      std::string failure;
      dsl::ParameterSet after_params;
      const auto after =
          run_weights(path, "Adapt to the environment.", c.scene, make_client(), v_max, &after_params, &failure);
      for (const auto& [name, z] : c.ratings) {
        if (failure.empty() && after.at(name) != z) {
          failure = fmt::format("{}={} instead of {}", name, after.at(name), z);
        }
      }
      if (failure.empty()) {
        ++row.successes;
      } else {
        row.last_failure = failure;
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string format_eval_table(const std::vector<EvalRow>& rows) {
  std::string out = fmt::format("{:<11} {:<4} {:<14} {:>7} {:>6}  {}\n", "group", "id", "context", "trials", "rate",
                                "last failure");
  for (const auto& r : rows) {
    out += fmt::format("{:<11} {:<4} {:<14} {:>7} {:>6.2f}  {}\n", r.group, r.id, r.context, r.trials, r.rate(),
                       r.last_failure);
  }
  return out;
}

}  // namespace langmpc::assistants
