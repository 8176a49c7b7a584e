#include "langmpc/assistants/backends.hpp"
#include "langmpc/assistants/corpus.hpp"
#include "langmpc/assistants/pipeline.hpp"
#include "langmpc/assistants/reference_costs.hpp"
#include "langmpc/assistants/response.hpp"
#include "langmpc/assistants/worker.hpp"
#include "support/fault_client.hpp"

#include <gtest/gtest.h>
#include <httplib.h>
#include <nlohmann/json.hpp>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <numeric>
#include <random>
#include <thread>

namespace langmpc::assistants {
namespace {

using langmpc::testing::Fault;
using langmpc::testing::FaultInjectingClient;
using langmpc::testing::ScriptedClient;

const dsl::ParameterSet kParams = dsl::default_parameters(2.0, {19.0, 0.0});
const PipelineOptions kFixedClock{2.5, 8, [] { return 0.0; }};

ActiveSpec active(std::string_view name) {
  const auto spec = reference_cost(name, kParams);
  return make_active(spec, initial_ratings(spec), 2.5);
}

Corpus queries() { return load_corpus(std::filesystem::path(LANGMPC_DATA_DIR) / "corpus/queries.json"); }

TEST(RatingsToWeights, Examples) {
  const auto uniform = ratings_to_weights({{"a", 5}, {"b", 5}, {"c", 5}, {"d", 5}, {"e", 5}});
  for (const auto& [name, w] : uniform) {
    EXPECT_DOUBLE_EQ(w, 1.0) << name;
  }
  const auto w = ratings_to_weights({{"x", 10}, {"y", 5}, {"z", 0}});
  EXPECT_DOUBLE_EQ(w.at("x"), 2.0);
  EXPECT_DOUBLE_EQ(w.at("y"), 1.0);
  EXPECT_DOUBLE_EQ(w.at("z"), 0.0);
  const auto row_a =
      ratings_to_weights({{"contour", 8}, {"lag", 8}, {"velocity", 6}, {"accel", 6}, {"omega", 7}});
  EXPECT_DOUBLE_EQ(row_a.at("contour"), 8.0 / 7.0);
  EXPECT_DOUBLE_EQ(row_a.at("velocity"), 6.0 / 7.0);
  EXPECT_DOUBLE_EQ(row_a.at("omega"), 1.0);
}

TEST(RatingsToWeights, Errors) {
  EXPECT_THROW(ratings_to_weights({{"a", 0}, {"b", 0}}), AllZeroRatings);
  EXPECT_THROW(ratings_to_weights({}), std::invalid_argument);
  EXPECT_THROW(ratings_to_weights({{"a", 11}}), std::invalid_argument);
  EXPECT_THROW(ratings_to_weights({{"a", -1}, {"b", 3}}), std::invalid_argument);
}

TEST(RatingsToWeights, MeanIsOneAndScaleInvariant) {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> rating(0, 10);
  std::uniform_int_distribution<int> count(1, 9);
  int checked = 0;
  while (checked < 1000) {
    ImportanceRatings z;
    const int n = count(rng);
    for (int i = 0; i < n; ++i) {
      z["t" + std::to_string(i)] = rating(rng);
    }
    if (std::all_of(z.begin(), z.end(), [](const auto& kv) { return kv.second == 0; })) {
      continue;
    }
    ++checked;
    const auto w = ratings_to_weights(z);
    const double sum = std::accumulate(w.begin(), w.end(), 0.0, [](double s, const auto& kv) { return s + kv.second; });
    ASSERT_NEAR(sum / n, 1.0, 1e-12);
    const int max_z = std::max_element(z.begin(), z.end(), [](auto& l, auto& r) { return l.second < r.second; })->second;
    if (2 * max_z <= kMaxRating) {
      ImportanceRatings doubled = z;
      for (auto& [name, value] : doubled) {
        value *= 2;
      }
      const auto w2 = ratings_to_weights(doubled);
      for (const auto& [name, value] : w) {
        ASSERT_NEAR(w2.at(name), value, 1e-12);
      }
    }
  }
}

TEST(Response, ParsesRouteWithAndWithoutFences) {
  const auto fenced = parse_route("Sure.\n```\nDECISION: GENERATE_NEW_COST\nREASON: needs a goal\n```\n");
  ASSERT_TRUE(fenced);
  EXPECT_EQ(fenced->route, Route::kGenerateNewCost);
  EXPECT_EQ(fenced->rationale, "needs a goal");
  const auto plain = parse_route("decision: update_parameters");
  ASSERT_TRUE(plain);
  EXPECT_EQ(plain->route, Route::kUpdateParameters);
  EXPECT_FALSE(parse_route("DECISION: REGENERATE_EVERYTHING"));
  EXPECT_FALSE(parse_route("I would update the parameters."));
  EXPECT_FALSE(parse_route("DECISIONS: UPDATE_PARAMETERS"));
}

TEST(Response, ParsesCostManifest) {
  const auto m = parse_cost_manifest(
      "```\nTERM: goal\nTERM: keep_off = if_else(d_safe - px, px, 0)\nPARAM d_safe = 1.5 m\nREASON: ok\n```");
  ASSERT_TRUE(m);
  ASSERT_EQ(m->terms.size(), 2U);
  EXPECT_EQ(m->terms[0].name, "goal");
  EXPECT_FALSE(m->terms[0].source);
  EXPECT_EQ(*m->terms[1].source, "if_else(d_safe - px, px, 0)");
  ASSERT_EQ(m->params.size(), 1U);
  EXPECT_EQ(m->params[0].name, "d_safe");
  EXPECT_DOUBLE_EQ(m->params[0].value, 1.5);
  EXPECT_EQ(m->params[0].unit, "m");
  EXPECT_FALSE(parse_cost_manifest("REASON: nothing"));
  EXPECT_FALSE(parse_cost_manifest("TERM: bad name = px"));
  EXPECT_FALSE(parse_cost_manifest("TERM: goal\nPARAM d_safe = lots"));
}

TEST(Response, ParsesRatingsAndKeepsMalformedLines) {
  const auto r = parse_ratings("RATING contour=8\nRATING lag = 7\nRATING velocity=6.5\nPARAM v_ref=2.5 m/s\n");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->ratings.at("contour"), 8);
  EXPECT_EQ(r->ratings.at("lag"), 7);
  EXPECT_EQ(r->ratings.count("velocity"), 0U);
  ASSERT_EQ(r->malformed.size(), 1U);
  ASSERT_EQ(r->params.size(), 1U);
  EXPECT_DOUBLE_EQ(r->params[0].value, 2.5);
  EXPECT_FALSE(parse_ratings("PARAM v_ref=2"));
  EXPECT_EQ(parse_bullets("```\n- slow down\n* keep right\nnot a bullet\n```"),
            (std::vector<std::string>{"slow down", "keep right"}));
}

TEST(LlmClient, RequestDigestIsStableAndSensitive) {
  const std::vector<ChatMessage> conv{{"user", "a"}, {"assistant", "b"}};
  EXPECT_EQ(request_digest("sys", conv, "q"), request_digest("sys", conv, "q"));
  EXPECT_NE(request_digest("sys", conv, "q"), request_digest("sys", {}, "q"));
  EXPECT_NE(request_digest("sys", conv, "q"), request_digest("sys2", conv, "q"));
  EXPECT_NE(request_digest("sys", conv, "q"), request_digest("sys", conv, "q "));
  EXPECT_EQ(request_digest("s", {}, "u").size(), 64U);
}

TEST(Route, PaperRoutingMatrixWithMock) {
  const auto corpus = queries();
  ASSERT_EQ(corpus.routing.size(), 5U);
  for (const auto& c : corpus.routing) {
    for (const auto& [context, expected] : c.expected) {
      Assistants assistants(std::make_shared<MockBackend>());
      EXPECT_EQ(assistants.route(c.query, reference_cost(context, kParams)).route, expected)
          << c.id << " on " << context;
    }
  }
}

TEST(Route, UnparseableTwiceDefaultsToUpdateParameters) {
  auto client = std::make_shared<ScriptedClient>(std::vector<std::string>{"hmm", "still unsure"});
  Assistants assistants(client);
  const auto decision = assistants.route("Do a barrel roll.", reference_cost("path", kParams));
  EXPECT_EQ(decision.route, Route::kUpdateParameters);
  ASSERT_EQ(client->users.size(), 2U);
  // The retry sees the failed exchange.
  EXPECT_EQ(client->conversations[1].size(), 2U);
}

TEST(Route, RetrySucceeds) {
  auto client = std::make_shared<ScriptedClient>(std::vector<std::string>{"hmm", "DECISION: GENERATE_NEW_COST"});
  Assistants assistants(client);
  EXPECT_EQ(assistants.route("x", reference_cost("path", kParams)).route, Route::kGenerateNewCost);
}

TEST(Route, PromptCarriesCostSourceAndTerms) {
  auto client = std::make_shared<ScriptedClient>(std::vector<std::string>{"DECISION: UPDATE_PARAMETERS"});
  Assistants assistants(client);
  assistants.route("Be faster.", reference_cost("safe_distance", kParams));
  const auto& user = client->users.front();
  EXPECT_NE(user.find("Be faster."), std::string::npos);
  EXPECT_NE(user.find("safe_distance: if_else("), std::string::npos);
  EXPECT_NE(user.find("velocity: "), std::string::npos);
}

TEST(GenerateCost, PaperShapesWithMock) {
  const auto corpus = queries();
  ASSERT_EQ(corpus.generation.size(), 6U);
  for (const auto& c : corpus.generation) {
    Assistants assistants(std::make_shared<MockBackend>());
    const auto spec = assistants.generate_cost(c.query, reference_cost("path", kParams));
    const auto why = shape_mismatch(spec, c.shape);
    EXPECT_FALSE(why) << c.id << ": " << why.value_or("");
  }
}

TEST(GenerateCost, Examples) {
  Assistants assistants(std::make_shared<MockBackend>());
  const auto goal = assistants.generate_cost("Reach the goal.", reference_cost("path", kParams));
  EXPECT_EQ(goal.term_names(), (std::vector<std::string>{"goal", "velocity", "accel", "omega"}));
  EXPECT_EQ(goal.params.value("goal_x"), 19.0);

  const auto sd =
      assistants.generate_cost("Go to the goal while keeping a safe distance from humans.", reference_cost("path", kParams));
  ASSERT_TRUE(sd.params.contains("d_safe"));
  EXPECT_TRUE(sd.params.entries().at("d_safe").tunable);
  EXPECT_TRUE(dsl::contains_if_else(sd.find_term("safe_distance")->expr));

  const auto f = assistants.generate_cost("Follow the path. Try to keep a distance of at least 1.5m from pedestrians.",
                                          reference_cost("path", kParams));
  // A stated gap between bodies becomes a centre distance: 1.5 + 0.3 + 0.3.
  EXPECT_DOUBLE_EQ(f.params.value("d_safe"), 2.1);
  EXPECT_TRUE(f.has_term("contour"));
  EXPECT_TRUE(f.has_term("safe_distance"));
}

TEST(GenerateCost, MandatoryTermsInjected) {
  auto client = std::make_shared<ScriptedClient>(std::vector<std::string>{"TERM: goal\n"});
  Assistants assistants(client);
  const auto spec = assistants.generate_cost("Reach the goal.", reference_cost("path", kParams));
  EXPECT_TRUE(spec.has_term("velocity"));
  EXPECT_TRUE(spec.has_term("accel"));
  EXPECT_TRUE(spec.has_term("omega"));
}

TEST(GenerateCost, RepairRoundTrip) {
  auto client = std::make_shared<ScriptedClient>(
      std::vector<std::string>{"TERM: bad = 1 / (px - oh_x)\n", "TERM: good = 1 / ((px - oh_x)^2 + eps)\n"});
  Assistants assistants(client);
  const auto spec = assistants.generate_cost("Keep away.", reference_cost("path", kParams));
  EXPECT_TRUE(spec.has_term("good"));
  ASSERT_EQ(client->users.size(), 2U);
  EXPECT_NE(client->users[1].find("could not be used"), std::string::npos);
  EXPECT_EQ(client->conversations[1].size(), 2U);
  // Cost generation starts fresh on every call.
  assistants.generate_cost("Keep away.", reference_cost("path", kParams));
  EXPECT_TRUE(client->conversations[2].empty());
}

TEST(GenerateCost, RejectedAfterRetry) {
  auto client = std::make_shared<ScriptedClient>(std::vector<std::string>{"TERM: x = (px -\n"});
  Assistants assistants(client);
  EXPECT_THROW(assistants.generate_cost("x", reference_cost("path", kParams)), CostRejected);
  EXPECT_EQ(client->users.size(), 2U);
  auto unknown = std::make_shared<ScriptedClient>(std::vector<std::string>{"TERM: wobble\n"});
  Assistants other(unknown);
  EXPECT_THROW(other.generate_cost("x", reference_cost("path", kParams)), CostRejected);
}

TEST(GenerateCost, EnvironmentParametersAreFixed) {
  auto client = std::make_shared<ScriptedClient>(std::vector<std::string>{"TERM: goal\nPARAM goal_x = 3 m\n"});
  Assistants assistants(client);
  EXPECT_THROW(assistants.generate_cost("x", reference_cost("path", kParams)), CostRejected);
}

TEST(CameraAdapt, SceneRowsReachPaperRatings) {
  const auto corpus = queries();
  ASSERT_EQ(corpus.camera.size(), 3U);
  for (const auto& c : corpus.camera) {
    Assistants assistants(std::make_shared<MockBackend>(), kFixedClock);
    ControllerHandle handle(active("path"));
    const auto events = assistants.handle_query({"Adapt to the environment.", 0.0, 0}, handle, c.scene);
    ASSERT_EQ(events.back().stage, Stage::kApplied) << events.back().detail;
    EXPECT_EQ(events[1].stage, Stage::kCamera);
    EXPECT_EQ(handle.current()->ratings, c.ratings) << c.id;
  }
}

TEST(CameraAdapt, KeepsTermsAndNeedsAScene) {
  Assistants assistants(std::make_shared<MockBackend>(), kFixedClock);
  const auto guidance = assistants.camera_adapt("narrow corridor, several pedestrians approaching");
  EXPECT_FALSE(guidance.empty());
  EXPECT_THROW(assistants.camera_adapt(""), PipelineError);

  ControllerHandle handle(active("path"));
  const auto before = handle.current();
  const auto events = assistants.handle_query({"Adapt to the environment.", 0.0, 0}, handle, {});
  EXPECT_EQ(events.back().stage, Stage::kRejected);
  EXPECT_EQ(handle.current(), before);
}

TEST(RetrieveWeights, PaperDirectionsWithMock) {
  const auto corpus = queries();
  ASSERT_EQ(corpus.weights.size(), 6U);
  const auto rows = evaluate_corpus({{}, {}, corpus.weights, {}}, [] { return std::make_shared<MockBackend>(); }, 1,
                                    kParams);
  for (const auto& row : rows) {
    EXPECT_EQ(row.successes, row.trials) << row.id << ": " << row.last_failure;
  }
}

TEST(RetrieveWeights, ClampsAndWarns) {
  auto client = std::make_shared<ScriptedClient>(std::vector<std::string>{
      "RATING contour=14\nRATING ghost=3\nRATING lag=-2\nPARAM v_ref=7 m/s\nPARAM goal_x=0\nPARAM nope=1\n"});
  Assistants assistants(client);
  const auto spec = reference_cost("path", kParams);
  const auto update = assistants.retrieve_weights("x", spec, initial_ratings(spec));
  EXPECT_EQ(update.ratings.at("contour"), 10);
  EXPECT_EQ(update.ratings.at("lag"), 0);
  EXPECT_EQ(update.ratings.at("velocity"), 5);
  EXPECT_EQ(update.ratings.count("ghost"), 0U);
  EXPECT_DOUBLE_EQ(update.params.at("v_ref"), 2.5);
  EXPECT_EQ(update.params.count("goal_x"), 0U);
  EXPECT_EQ(update.warnings.size(), 6U);
}

TEST(RetrieveWeights, UnparseableTwiceFails) {
  auto client = std::make_shared<ScriptedClient>(std::vector<std::string>{"no idea"});
  Assistants assistants(client);
  const auto spec = reference_cost("path", kParams);
  EXPECT_THROW(assistants.retrieve_weights("x", spec, initial_ratings(spec)), PipelineError);
}

TEST(HandleQuery, FollowThePathFromGoal) {
  Assistants assistants(std::make_shared<MockBackend>(), kFixedClock);
  ControllerHandle handle(active("goal"));
  const auto events = assistants.handle_query({"Follow the path.", 0.0, 0}, handle);
  ASSERT_EQ(events.size(), 4U);
  EXPECT_EQ(events[0].stage, Stage::kCapability);
  EXPECT_EQ(events[1].stage, Stage::kCostGen);
  EXPECT_EQ(events[2].stage, Stage::kWeightRet);
  EXPECT_EQ(events[3].stage, Stage::kApplied);
  const auto now = handle.current();
  EXPECT_EQ(now->spec.term_names(), (std::vector<std::string>{"contour", "lag", "velocity", "accel", "omega"}));
  EXPECT_EQ(now->digest, events[3].detail);
  EXPECT_EQ(now->spec.provenance, "Follow the path.");
  EXPECT_EQ(handle.version(), 1U);
}

TEST(HandleQuery, BeSmootherRaisesInputRatings) {
  Assistants assistants(std::make_shared<MockBackend>(), kFixedClock);
  ControllerHandle handle(active("path"));
  const auto events = assistants.handle_query({"Be smoother.", 0.0, 0}, handle);
  EXPECT_EQ(events.size(), 3U);
  const auto& z = handle.current()->ratings;
  EXPECT_GT(z.at("accel"), kInitialRating);
  EXPECT_GT(z.at("omega"), kInitialRating);
  EXPECT_GT(handle.current()->spec.weights.at("accel"), handle.current()->spec.weights.at("contour"));
}

TEST(HandleQuery, BeFasterRaisesReferenceSpeed) {
  Assistants assistants(std::make_shared<MockBackend>(), kFixedClock);
  ControllerHandle handle(active("path"));
  assistants.handle_query({"Be faster.", 0.0, 0}, handle);
  EXPECT_GT(handle.current()->spec.params.value("v_ref"), 2.0);
  EXPECT_LE(handle.current()->spec.params.value("v_ref"), 2.5);
}

TEST(HandleQuery, TransportFailureKeepsSpec) {
  auto client = std::make_shared<FaultInjectingClient>(1, Fault::kTransport, false);
  Assistants assistants(client, kFixedClock);
  ControllerHandle handle(active("goal"));
  const auto before = handle.current();
  const auto events = assistants.handle_query({"Follow the path.", 0.0, 0}, handle);
  EXPECT_EQ(events.back().stage, Stage::kRejected);
  EXPECT_NE(events.back().detail.find("injected"), std::string::npos);
  EXPECT_EQ(handle.current(), before);
  EXPECT_EQ(handle.version(), 0U);
}

TEST(HandleQuery, UnknownQueryKeepsRatings) {
  Assistants assistants(std::make_shared<MockBackend>(), kFixedClock);
  ControllerHandle handle(active("path"));
  const auto before = handle.current();
  const auto events = assistants.handle_query({"Sing a song.", 0.0, 0}, handle);
  EXPECT_EQ(events.back().stage, Stage::kApplied);
  EXPECT_EQ(handle.current()->ratings, before->ratings);
  EXPECT_EQ(handle.current()->spec.weights, before->spec.weights);
}

TEST(HandleQuery, RollingContextForCapabilityAndWeights) {
  struct Spy : MockBackend {
    std::vector<std::size_t> capability_sizes;
    std::vector<std::size_t> weight_sizes;
    std::string send(std::string_view system, const std::vector<ChatMessage>& conversation,
                     std::string_view user) override {
      if (system.find("Capability") != std::string_view::npos) {
        capability_sizes.push_back(conversation.size());
      } else if (system.find("Weight Retrieval") != std::string_view::npos) {
        weight_sizes.push_back(conversation.size());
      }
      return MockBackend::send(system, conversation, user);
    }
  };
  auto spy = std::make_shared<Spy>();
  Assistants assistants(spy, {2.5, 2, [] { return 0.0; }});
  ControllerHandle handle(active("path"));
  for (const char* q : {"Be faster.", "Be smoother.", "Stick to the path.", "Be faster."}) {
    assistants.handle_query({q, 0.0, 0}, handle);
  }
  EXPECT_EQ(spy->capability_sizes, (std::vector<std::size_t>{0, 2, 4, 4}));
  EXPECT_EQ(spy->weight_sizes, (std::vector<std::size_t>{0, 2, 4, 4}));
  assistants.reset();
  assistants.handle_query({"Be faster.", 0.0, 0}, handle);
  EXPECT_EQ(spy->capability_sizes.back(), 0U);
}

std::vector<std::vector<PipelineEvent>> run_session(const std::shared_ptr<LlmClient>& client) {
  const auto corpus = queries();
  Assistants assistants(client, kFixedClock);
  ControllerHandle handle(active("path"));
  std::vector<std::vector<PipelineEvent>> all;
  int j = 0;
  for (const auto& c : corpus.routing) {
    all.push_back(assistants.handle_query({c.query, 0.0, j++}, handle, "dense crowd in open space"));
  }
  for (const auto& c : corpus.weights) {
    all.push_back(assistants.handle_query({c.query, 0.0, j++}, handle));
  }
  return all;
}

TEST(MockBackend, EventStreamsAreDeterministic) {
  const auto first = run_session(std::make_shared<MockBackend>());
  const auto second = run_session(std::make_shared<MockBackend>());
  EXPECT_EQ(first, second);
}

TEST(ReplayBackend, ReproducesRecordedSession) {
  const auto dir = std::filesystem::temp_directory_path() / "langmpc_replay_test";
  std::filesystem::remove_all(dir);
  const auto recorded = run_session(std::make_shared<RecordingClient>(std::make_shared<MockBackend>(), dir));
  EXPECT_GT(std::distance(std::filesystem::directory_iterator(dir), std::filesystem::directory_iterator{}), 10);
  const auto replayed = run_session(std::make_shared<ReplayBackend>(dir));
  EXPECT_EQ(recorded, replayed);

  ReplayBackend empty(dir / "missing");
  EXPECT_THROW(empty.send("s", {}, "u"), TransportError);
  std::filesystem::remove_all(dir);
}

TEST(Pipeline, AtomicUnderInjectedFailures) {
  const std::vector<std::pair<std::string, std::string>> cases = {
      {"Follow the path.", "goal"},
      {"Go to the goal while keeping a safe distance from humans.", "path"},
      {"Be faster.", "path"},
      {"Take more distance to humans.", "safe_distance"},
      {"Adapt to the environment.", "path"},
      {"Follow the closest human.", "goal"},
      {"Stick to the path.", "path"},
  };
  std::mt19937_64 rng(2024);
  int injections = 0;
  int rejected = 0;
  while (injections < 200) {
    const auto& [query, base] = cases[rng() % cases.size()];
    const Fault fault = langmpc::testing::kAllFaults[rng() % std::size(langmpc::testing::kAllFaults)];
    const int at = static_cast<int>(rng() % 4);
    const bool sticky = (rng() % 2) == 0;
    auto client = std::make_shared<FaultInjectingClient>(at, fault, sticky);
    Assistants assistants(client, kFixedClock);
    ControllerHandle handle(active(base));
    const auto before = handle.current();
    const auto events = assistants.handle_query({query, 0.0, 0}, handle, "narrow corridor congested with pedestrians");
    if (client->calls() <= at) {
      continue;  // the pipeline finished before the injection point
    }
    ++injections;
    const auto after = handle.current();
    ASSERT_FALSE(events.empty());
    if (events.back().stage == Stage::kRejected) {
      ++rejected;
      ASSERT_EQ(after, before) << query;
      ASSERT_EQ(handle.version(), 0U);
    } else {
      ASSERT_EQ(events.back().stage, Stage::kApplied);
      ASSERT_NO_THROW(after->spec.validate(2.5));
      ASSERT_EQ(after->digest, dsl::digest(after->spec));
      ASSERT_EQ(after->spec.weights, ratings_to_weights(after->ratings));
      for (const char* m : dsl::kMandatoryTerms) {
        ASSERT_TRUE(after->spec.has_term(m));
      }
      for (const auto& [name, z] : after->ratings) {
        ASSERT_GE(z, 0);
        ASSERT_LE(z, kMaxRating);
      }
    }
  }
  EXPECT_GT(rejected, 20);
}

TEST(Worker, QueueDepthOneNewestWins) {
  std::mutex mutex;
  std::vector<PipelineEvent> events;
  Assistants assistants(std::make_shared<MockBackend>(), kFixedClock);
  ControllerHandle handle(active("path"));
  PipelineWorker worker(assistants, handle, [&](const PipelineEvent& e) {
    std::lock_guard lock(mutex);
    events.push_back(e);
  }, std::chrono::milliseconds{150});
  worker.submit("Be smoother.");
  std::this_thread::sleep_for(std::chrono::milliseconds{30});
  EXPECT_TRUE(worker.busy());
  worker.submit("Stick to the path.");
  worker.submit("Be faster.");
  worker.wait_idle();
  EXPECT_FALSE(worker.busy());
  std::lock_guard lock(mutex);
  const auto count = [&](Stage s) {
    return std::count_if(events.begin(), events.end(), [&](const PipelineEvent& e) { return e.stage == s; });
  };
  EXPECT_EQ(count(Stage::kApplied), 2);
  ASSERT_EQ(count(Stage::kRejected), 1);
  const auto dropped = std::find_if(events.begin(), events.end(), [](auto& e) { return e.stage == Stage::kRejected; });
  EXPECT_NE(dropped->detail.find("Stick to the path."), std::string::npos);
  EXPECT_EQ(handle.current()->spec.provenance, "Be faster.");
  EXPECT_EQ(handle.current()->ratings.at("contour"), kInitialRating);
}

TEST(Worker, StopsWhileWaiting) {
  Assistants assistants(std::make_shared<MockBackend>(), kFixedClock);
  ControllerHandle handle(active("path"));
  const auto start = std::chrono::steady_clock::now();
  {
    PipelineWorker worker(assistants, handle, {}, std::chrono::milliseconds{5000});
    worker.submit("Be faster.");
  }
  EXPECT_LT(std::chrono::steady_clock::now() - start, std::chrono::seconds{2});
  EXPECT_EQ(handle.version(), 0U);
}

TEST(LiveBackend, SpeaksChatCompletions) {
  httplib::Server server;
  nlohmann::json seen;
  std::string auth;
  server.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
    seen = nlohmann::json::parse(req.body);
    auth = req.get_header_value("Authorization");
    res.set_content(R"({"choices":[{"message":{"role":"assistant","content":"DECISION: UPDATE_PARAMETERS"}}]})",
                    "application/json");
  });
  server.Post("/bad/chat/completions", [](const httplib::Request&, httplib::Response& res) {
    res.status = 500;
    res.set_content("boom", "text/plain");
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread thread([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  LiveConfig config;
  config.base_url = "http://127.0.0.1:" + std::to_string(port) + "/v1/";
  config.api_key = "k123";
  config.model = "test-model";
  LiveBackend live(config);
  const auto answer = live.send("system text", {{"user", "q0"}, {"assistant", "a0"}}, "q1");
  EXPECT_EQ(answer, "DECISION: UPDATE_PARAMETERS");
  EXPECT_EQ(auth, "Bearer k123");
  EXPECT_EQ(seen["model"], "test-model");
  ASSERT_EQ(seen["messages"].size(), 4U);
  EXPECT_EQ(seen["messages"][0]["role"], "system");
  EXPECT_EQ(seen["messages"][3]["content"], "q1");

  config.base_url = "http://127.0.0.1:" + std::to_string(port) + "/bad";
  EXPECT_THROW(LiveBackend(config).send("s", {}, "u"), TransportError);
  server.stop();
  thread.join();

  config.base_url = "not a url";
  EXPECT_THROW(LiveBackend{config}, std::invalid_argument);
}

TEST(LiveBackend, RealModelSmokeWhenKeyPresent) {
  if (std::getenv("LLM_API_KEY") == nullptr) {
    GTEST_SKIP() << "LLM_API_KEY not set";
  }
  Assistants assistants(std::make_shared<LiveBackend>(LiveConfig::from_environment()));
  const auto decision = assistants.route("Adapt to the environment.", reference_cost("path", kParams));
  EXPECT_EQ(decision.route, Route::kAdaptToEnvironment);
}

}  // namespace
}  // namespace langmpc::assistants
