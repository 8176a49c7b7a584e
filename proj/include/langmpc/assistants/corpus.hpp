#ifndef LANGMPC_ASSISTANTS_CORPUS_HPP_
#define LANGMPC_ASSISTANTS_CORPUS_HPP_

#include "langmpc/assistants/llm_client.hpp"
#include "langmpc/assistants/pipeline.hpp"
#include "langmpc/dsl/cost_spec.hpp"

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace langmpc::assistants {

struct RoutingCase {
  std::string id;
  std::string query;
  std::map<std::string, Route> expected;  // reference cost name -> route
};

struct GenerationCase {
  std::string id;
  std::string query;
  std::string shape;
};

struct Expectation {
  bool is_param{false};  // parameter value, otherwise term rating
  std::string name;
  int direction{1};  // +1 up, -1 down
};

struct WeightCase {
  std::string id;
  std::string query;
  std::string base;  // reference cost name
  std::vector<Expectation> expect;
};

struct CameraCase {
  std::string id;
  std::string scene;
  ImportanceRatings ratings;  // expected final values
};

struct Corpus {
  std::vector<RoutingCase> routing;
  std::vector<GenerationCase> generation;
  std::vector<WeightCase> weights;
  std::vector<CameraCase> camera;
};

/// Throws std::runtime_error on a missing or malformed file.
Corpus load_corpus(const std::filesystem::path& file);

/**
 * Shapes: "path", "goal" (exact term sets), "inverse_distance",
 * "human_quadratic" (squared distance to the closest human), "safe_distance"
 * (goal plus a conditional term on a tunable d_safe). Returns why `spec`
 * does not match, or nullopt.
 */
std::optional<std::string> shape_mismatch(const dsl::CostSpec& spec, std::string_view shape);

struct EvalRow {
  std::string group;    // routing | generation | weights | camera
  std::string id;
  std::string context;  // reference cost for routing rows
  int successes{0};
  int trials{0};
  std::string last_failure;

  double rate() const { return trials == 0 ? 0.0 : static_cast<double>(successes) / trials; }
};

using ClientFactory = std::function<std::shared_ptr<LlmClient>()>;

/// Every corpus case `repetitions` times, each trial with fresh assistants.
std::vector<EvalRow> evaluate_corpus(const Corpus& corpus, const ClientFactory& make_client, int repetitions,
                                     const dsl::ParameterSet& params, double v_max = 2.5);

/// Aligned text table of the rows.
std::string format_eval_table(const std::vector<EvalRow>& rows);

}  // namespace langmpc::assistants

#endif  // LANGMPC_ASSISTANTS_CORPUS_HPP_
