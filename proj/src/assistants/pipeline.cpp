#include "langmpc/assistants/pipeline.hpp"

#include "langmpc/assistants/prompts.hpp"
#include "langmpc/dsl/errors.hpp"
#include "messages.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <numeric>

namespace langmpc::assistants {
namespace {

// Environment-derived parameters every generated cost inherits.
constexpr std::array<const char*, 4> kInheritedParams = {"v_ref", "eps", "goal_x", "goal_y"};

std::string join(const std::vector<std::string>& items, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    out += (i == 0 ? "" : std::string(sep)) + items[i];
  }
  return out;
}

std::string describe_ratings(const ImportanceRatings& ratings) {
  std::vector<std::string> parts;
  for (const auto& [name, z] : ratings) {
    parts.push_back(fmt::format("{}={}", name, z));
  }
  return join(parts, " ");
}

/// Spec from a cost-generation answer; throws on anything unusable.
dsl::CostSpec build_cost(std::string_view text, std::string_view query, const dsl::CostSpec& current, double v_max) {
  const auto manifest = parse_cost_manifest(text);
  if (!manifest) {
    throw PipelineError("the answer contains no usable TERM lines");
  }
  dsl::ParameterSet params;
  for (const char* name : kInheritedParams) {
    if (const auto it = current.params.entries().find(name); it != current.params.entries().end()) {
      params.set(name, it->second);
    }
  }
  for (const auto& p : manifest->params) {
    if (const auto it = params.entries().find(p.name); it != params.entries().end() && !it->second.tunable) {
      throw PipelineError(fmt::format("parameter '{}' is fixed by the environment", p.name));
    }
    params.set(p.name, {p.value, p.unit, true});
  }
  std::vector<dsl::CostTerm> terms;
  for (const auto& t : manifest->terms) {
    if (!t.source) {
      if (!dsl::is_builtin(t.name)) {
        throw PipelineError(fmt::format("'{}' is not a library term; give its expression", t.name));
      }
      terms.push_back(dsl::CostTerm::from_builtin(t.name));
    } else {
      terms.push_back(dsl::CostTerm::from_source(t.name, *t.source));
    }
    // Parameters of the previous cost the new terms still use keep their value.
    for (const auto& name : dsl::referenced_parameters(terms.back().expr)) {
      if (!params.contains(name)) {
        if (const auto it = current.params.entries().find(name); it != current.params.entries().end()) {
          params.set(name, it->second);
        }
      }
    }
  }
  auto spec = dsl::compose_cost(std::move(terms), {}, std::move(params), std::string(query));
  spec.validate(v_max);
  return spec;
}

}  // namespace

std::map<std::string, double> ratings_to_weights(const ImportanceRatings& ratings) {
  if (ratings.empty()) {
    throw std::invalid_argument("no ratings to convert");
  }
  long sum = 0;
  for (const auto& [name, z] : ratings) {
    if (z < 0 || z > kMaxRating) {
      throw std::invalid_argument(fmt::format("rating {}={} outside [0, {}]", name, z, kMaxRating));
    }
    sum += z;
  }
  if (sum == 0) {
    throw AllZeroRatings("all importance ratings are zero");
  }
  const double mean = static_cast<double>(sum) / static_cast<double>(ratings.size());
  std::map<std::string, double> weights;
  for (const auto& [name, z] : ratings) {
    weights[name] = static_cast<double>(z) / mean;
  }
  return weights;
}

ImportanceRatings initial_ratings(const dsl::CostSpec& spec) {
  ImportanceRatings ratings;
  for (const auto& t : spec.terms) {
    ratings[t.name] = kInitialRating;
  }
  return ratings;
}

std::string_view to_string(Stage stage) {
  switch (stage) {
    case Stage::kCapability:
      return "Capability";
    case Stage::kCostGen:
      return "CostGen";
    case Stage::kCamera:
      return "Camera";
    case Stage::kWeightRet:
      return "WeightRet";
    case Stage::kApplied:
      return "Applied";
    case Stage::kRejected:
      return "Rejected";
  }
  return "?";
}

ActiveSpec make_active(const dsl::CostSpec& spec, const ImportanceRatings& ratings, double v_max) {
  // First pass injects any missing mandatory term so that it can be rated.
  const auto terms = dsl::compose_cost(spec.terms, {}, spec.params, spec.provenance).terms;
  ImportanceRatings complete;
  for (const auto& t : terms) {
    const auto it = ratings.find(t.name);
    complete[t.name] = it == ratings.end() ? kInitialRating : it->second;
  }
  for (const auto& [name, z] : ratings) {
    if (complete.count(name) == 0) {
      throw std::invalid_argument(fmt::format("rating for '{}', which is not a cost term", name));
    }
  }
  ActiveSpec active;
  active.spec = dsl::compose_cost(terms, ratings_to_weights(complete), spec.params, spec.provenance);
  active.spec.validate(v_max);
  active.ratings = std::move(complete);
  active.digest = dsl::digest(active.spec);
  return active;
}

ControllerHandle::ControllerHandle(ActiveSpec initial)
    : active_(std::make_shared<const ActiveSpec>(std::move(initial))) {}

std::shared_ptr<const ActiveSpec> ControllerHandle::current() const {
  std::lock_guard lock(mutex_);
  return active_;
}

void ControllerHandle::swap(std::shared_ptr<const ActiveSpec> next) {
  std::lock_guard lock(mutex_);
  active_ = std::move(next);
  ++version_;
}

std::uint64_t ControllerHandle::version() const {
  std::lock_guard lock(mutex_);
  return version_;
}

Assistants::Assistants(std::shared_ptr<LlmClient> client, PipelineOptions options)
    : client_(std::move(client)), options_(std::move(options)) {
  if (!client_) {
    throw std::invalid_argument("assistants need a client");
  }
}

detail::Geometry Assistants::geometry() const { return {options_.robot_radius, options_.human_radius}; }

double Assistants::now() const {
  if (options_.clock) {
    return options_.clock();
  }
  return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch()).count();
}

std::string Assistants::ask(std::string_view system, std::vector<ChatMessage>* history, const std::string& user) {
  static const std::vector<ChatMessage> kNoHistory;
  std::string answer = client_->send(system, history != nullptr ? *history : kNoHistory, user);
  if (history != nullptr) {
    history->push_back({"user", user});
    history->push_back({"assistant", answer});
    const std::size_t keep = 2 * options_.history_limit;
    if (history->size() > keep) {
      history->erase(history->begin(), history->end() - static_cast<std::ptrdiff_t>(keep));
    }
  }
  return answer;
}

RouteDecision Assistants::route(std::string_view query, const dsl::CostSpec& spec) {
  if (auto decision = parse_route(ask(prompts::capability, &capability_history_,
                                      detail::capability_message(query, spec)))) {
    return *decision;
  }
  if (auto decision = parse_route(ask(prompts::capability, &capability_history_,
                                      detail::repair_message("missing or unknown DECISION line")))) {
    return *decision;
  }
  return {Route::kUpdateParameters, "routing answer unparseable; keeping the current cost function"};
}

dsl::CostSpec Assistants::generate_cost(std::string_view query, const dsl::CostSpec& spec) {
  std::vector<ChatMessage> conversation;
  std::string user = detail::cost_generation_message(query, spec, geometry());
  for (int attempt = 0;; ++attempt) {
    const std::string answer = client_->send(prompts::cost_generation, conversation, user);
    try {
      return build_cost(answer, query, spec, options_.v_max);
    } catch (const std::exception& e) {
      if (attempt == 1) {
        throw CostRejected(fmt::format("generated cost rejected: {}", e.what()));
      }
      conversation.push_back({"user", user});
      conversation.push_back({"assistant", answer});
      user = detail::repair_message(e.what());
    }
  }
}

std::vector<std::string> Assistants::camera_adapt(std::string_view scene) {
  if (scene.empty()) {
    throw PipelineError("no scene description available");
  }
  std::vector<ChatMessage> conversation;
  const std::string user = detail::camera_message(scene);
  std::string answer = client_->send(prompts::camera, conversation, user);
  auto bullets = parse_bullets(answer);
  if (bullets.empty()) {
    conversation.push_back({"user", user});
    conversation.push_back({"assistant", answer});
    bullets = parse_bullets(client_->send(prompts::camera, conversation, detail::repair_message("no bullet points")));
  }
  if (bullets.empty()) {
    throw PipelineError("camera guidance unparseable");
  }
  return bullets;
}

WeightUpdate Assistants::retrieve_weights(std::string_view instruction, const dsl::CostSpec& spec,
                                          const ImportanceRatings& ratings) {
  auto reply = parse_ratings(ask(prompts::weight_retrieval, &weight_history_,
                                 detail::weight_message(instruction, spec, ratings, geometry())));
  if (!reply) {
    reply = parse_ratings(ask(prompts::weight_retrieval, &weight_history_, detail::repair_message("no RATING lines")));
  }
  if (!reply) {
    throw PipelineError("weight answer unparseable");
  }

  WeightUpdate update;
  for (const auto& t : spec.terms) {
    const auto it = ratings.find(t.name);
    update.ratings[t.name] = it == ratings.end() ? kInitialRating : it->second;
  }
  for (const auto& line : reply->malformed) {
    update.warnings.push_back(fmt::format("ignored malformed line '{}'", line));
  }
  for (const auto& [name, raw] : reply->ratings) {
    if (!spec.has_term(name)) {
      update.warnings.push_back(fmt::format("ignored rating for unknown term '{}'", name));
      continue;
    }
    const long clamped = std::clamp<long>(raw, 0, kMaxRating);
    if (clamped != raw) {
      update.warnings.push_back(fmt::format("rating {}={} clamped to {}", name, raw, clamped));
    }
    update.ratings[name] = static_cast<int>(clamped);
  }
  for (const auto& p : reply->params) {
    const auto it = spec.params.entries().find(p.name);
    if (it == spec.params.entries().end()) {
      update.warnings.push_back(fmt::format("ignored unknown parameter '{}'", p.name));
      continue;
    }
    if (!it->second.tunable) {
      update.warnings.push_back(fmt::format("ignored fixed parameter '{}'", p.name));
      continue;
    }
    double value = p.value;
    if (p.name == "v_ref" && (value < 0.0 || value > options_.v_max)) {
      value = std::clamp(value, 0.0, options_.v_max);
      update.warnings.push_back(fmt::format("v_ref={} clamped to {}", p.value, value));
    }
    if (value != it->second.value) {
      update.params[p.name] = value;
    }
  }
  return update;
}

std::vector<PipelineEvent> Assistants::handle_query(const Query& query, ControllerHandle& handle,
                                                    std::string_view scene, const EventSink& sink) {
  const double start = now();
  std::vector<PipelineEvent> events;
  const auto emit = [&](Stage stage, std::string detail) {
    events.push_back({stage, std::move(detail), now() - start});
    if (sink) {
      sink(events.back());
    }
  };

  const auto active = handle.current();
  try {
    if (query.text.empty()) {
      throw PipelineError("empty query");
    }
    const RouteDecision decision = route(query.text, active->spec);
    emit(Stage::kCapability, fmt::format("{}: {}", to_string(decision.route), decision.rationale));

    dsl::CostSpec spec = active->spec;
    ImportanceRatings ratings = active->ratings;
    std::string instruction = query.text;
    if (decision.route == Route::kGenerateNewCost) {
      spec = generate_cost(query.text, active->spec);
      ImportanceRatings carried;
      for (const auto& t : spec.terms) {
        const auto it = ratings.find(t.name);
        carried[t.name] = it == ratings.end() ? kInitialRating : it->second;
      }
      ratings = std::move(carried);
      emit(Stage::kCostGen, fmt::format("terms: {}", join(spec.term_names(), ", ")));
    } else if (decision.route == Route::kAdaptToEnvironment) {
      const auto guidance = camera_adapt(scene);
      instruction.clear();
      for (const auto& g : guidance) {
        instruction += fmt::format("- {}\n", g);
      }
      emit(Stage::kCamera, join(guidance, " | "));
    }

    const WeightUpdate update = retrieve_weights(instruction, spec, ratings);
    for (const auto& w : update.warnings) {
      emit(Stage::kWeightRet, fmt::format("warning: {}", w));
    }
    std::string summary = describe_ratings(update.ratings);
    for (const auto& [name, value] : update.params) {
      spec.params.update(name, value);
      summary += fmt::format(" {}:={}", name, value);
    }
    emit(Stage::kWeightRet, summary);

    spec.provenance = query.text;
    auto next = std::make_shared<const ActiveSpec>(make_active(spec, update.ratings, options_.v_max));
    handle.swap(next);
    emit(Stage::kApplied, next->digest);
  } catch (const std::exception& e) {
    emit(Stage::kRejected, e.what());
  }
  return events;
}

void Assistants::reset() {
  capability_history_.clear();
  weight_history_.clear();
  client_->reset();
}

}  // namespace langmpc::assistants
