#ifndef LANGMPC_ASSISTANTS_PIPELINE_HPP_
#define LANGMPC_ASSISTANTS_PIPELINE_HPP_

#include "langmpc/assistants/llm_client.hpp"
#include "langmpc/assistants/response.hpp"
#include "langmpc/dsl/cost_spec.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace langmpc::assistants {

namespace detail {
struct Geometry;
}  // namespace detail

/// Any stage failure; the controller keeps its previous spec.
class PipelineError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Generated cost still invalid after the repair round-trip.
class CostRejected : public PipelineError {
 public:
  using PipelineError::PipelineError;
};

class AllZeroRatings : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Query {
  std::string text;
  double received_at{0.0};  // [s]
  int index{0};             // j
};

/// Integer importance z per term, 0..10.
using ImportanceRatings = std::map<std::string, int>;
inline constexpr int kInitialRating = 5;
inline constexpr int kMaxRating = 10;

/// w = z / mean(z). Throws AllZeroRatings (or std::invalid_argument when empty).
std::map<std::string, double> ratings_to_weights(const ImportanceRatings& ratings);

/// Every term of `spec` rated kInitialRating.
ImportanceRatings initial_ratings(const dsl::CostSpec& spec);

enum class Stage { kCapability, kCostGen, kCamera, kWeightRet, kApplied, kRejected };
std::string_view to_string(Stage stage);

struct PipelineEvent {
  Stage stage{Stage::kCapability};
  std::string detail;
  double elapsed{0.0};  // [s] since the query entered the pipeline

  bool operator==(const PipelineEvent&) const = default;
};

using EventSink = std::function<void(const PipelineEvent&)>;

/// A validated, weighted spec together with the ratings its weights came from.
struct ActiveSpec {
  dsl::CostSpec spec;
  ImportanceRatings ratings;
  std::string digest;
};

/// Recomposes `spec` with weights from `ratings` and validates it.
ActiveSpec make_active(const dsl::CostSpec& spec, const ImportanceRatings& ratings, double v_max);

/**
 * The controller's single shared point with the pipeline. Readers take a
 * snapshot once per solve, so a swap lands between solver invocations.
 */
class ControllerHandle {
 public:
  explicit ControllerHandle(ActiveSpec initial);

  std::shared_ptr<const ActiveSpec> current() const;
  void swap(std::shared_ptr<const ActiveSpec> next);
  /// Incremented on every swap.
  std::uint64_t version() const;

 private:
  mutable std::mutex mutex_;
  std::shared_ptr<const ActiveSpec> active_;
  std::uint64_t version_{0};
};

struct WeightUpdate {
  ImportanceRatings ratings;  // complete over the spec's terms
  std::map<std::string, double> params;  // new absolute values, tunable parameters only
  std::vector<std::string> warnings;
};

struct PipelineOptions {
  double v_max{2.5};
  /// Exchanges kept in the rolling context of the Capability and Weight
  /// assistants.
  std::size_t history_limit{8};
  /// Seconds on an arbitrary monotonic scale; defaults to the steady clock.
  /// A constant clock makes event streams reproducible.
  std::function<double()> clock;
  /// Body radii [m] given to the assistants so that stated clearances can be
  /// turned into centre distances.
  double robot_radius{0.3};
  double human_radius{0.3};
};

/// The four assistants over one client.
class Assistants {
 public:
  explicit Assistants(std::shared_ptr<LlmClient> client, PipelineOptions options = {});

  /// Unparseable twice → UpdateParameters. Throws TransportError.
  RouteDecision route(std::string_view query, const dsl::CostSpec& spec);

  /// Unit-weighted spec for `query`. Throws CostRejected, TransportError.
  dsl::CostSpec generate_cost(std::string_view query, const dsl::CostSpec& spec);

  /// Motion guidance bullets. Throws PipelineError, TransportError.
  std::vector<std::string> camera_adapt(std::string_view scene);

  /// Throws PipelineError when unparseable twice, TransportError.
  WeightUpdate retrieve_weights(std::string_view instruction, const dsl::CostSpec& spec,
                                const ImportanceRatings& ratings);

  /**
   * route → (generate_cost | camera_adapt)? → retrieve_weights →
   * ratings_to_weights → one swap on `handle`. Any failure leaves the handle
   * untouched and ends the stream with a Rejected event.
   */
  std::vector<PipelineEvent> handle_query(const Query& query, ControllerHandle& handle, std::string_view scene = {},
                                          const EventSink& sink = {});

  /// Clears the rolling contexts and the client's state.
  void reset();

  const PipelineOptions& options() const { return options_; }

 private:
  std::string ask(std::string_view system, std::vector<ChatMessage>* history, const std::string& user);
  double now() const;
  detail::Geometry geometry() const;

  std::shared_ptr<LlmClient> client_;
  PipelineOptions options_;
  std::vector<ChatMessage> capability_history_;
  std::vector<ChatMessage> weight_history_;
};

}  // namespace langmpc::assistants

#endif  // LANGMPC_ASSISTANTS_PIPELINE_HPP_
