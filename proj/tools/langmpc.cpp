// Command-line entry points: batch experiments, assistant evaluation, the
// live session service and fixture recording.

#include "langmpc/assistants/backends.hpp"
#include "langmpc/assistants/corpus.hpp"
#include "langmpc/service/config.hpp"
#include "langmpc/service/server.hpp"
#include "langmpc/service/session.hpp"
#include "langmpc/sim/metrics.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <csignal>
#include <fstream>
#include <iostream>
#include <set>

namespace {

using namespace langmpc;
using service::ConfigError;

constexpr int kUsageError = 2;
constexpr int kRunError = 1;

struct BackendFlags {
  std::string llm{"mock"};
  std::string fixtures;
  std::string model{"gpt-4o-mini"};

  void add_to(CLI::App& cmd) {
    cmd.add_option("--llm", llm, "Language model backend: mock, replay or live")->capture_default_str();
    cmd.add_option("--fixtures", fixtures, "Fixture directory for the replay backend");
    cmd.add_option("--model", model, "Model name for the live backend")->capture_default_str();
  }

  service::BackendConfig config() const { return {service::parse_backend(llm), fixtures, model}; }
};

world::Scenario load_scenario_or_throw(const std::string& name) {
  const auto path = service::resolve_data_file(name, "scenarios");
  try {
    return world::load_scenario(path);
  } catch (const std::exception& e) {
    throw ConfigError(fmt::format("invalid scenario {}: {}", path.string(), e.what()));
  }
}

std::vector<sim::Variant> load_variants_or_throw(const std::string& name, const std::string& only) {
  const auto path = service::resolve_data_file(name, "variants");
  std::vector<sim::Variant> variants;
  try {
    variants = sim::load_variants(path);
  } catch (const std::exception& e) {
    throw ConfigError(fmt::format("invalid variants {}: {}", path.string(), e.what()));
  }
  if (only.empty()) {
    return variants;
  }
  std::set<std::string> keep;
  for (std::size_t start = 0; start <= only.size();) {
    const auto end = std::min(only.find(',', start), only.size());
    keep.insert(only.substr(start, end - start));
    start = end + 1;
  }
  std::vector<sim::Variant> out;
  for (auto& v : variants) {
    if (keep.erase(v.label) != 0) out.push_back(std::move(v));
  }
  if (!keep.empty()) {
    throw ConfigError(fmt::format("unknown variant label '{}'", *keep.begin()));
  }
  return out;
}

struct RunFlags {
  std::string scenario;
  std::string variants{"behaviours"};
  std::string only;
  int episodes{10};
  std::uint64_t seed{1};
  std::string out;
  std::string mpc;
  BackendFlags backend;
};

int run(const RunFlags& f) {
  if (f.episodes < 1) throw ConfigError("--episodes must be at least 1");
  const auto scenario = load_scenario_or_throw(f.scenario);
  const auto variants = load_variants_or_throw(f.variants, f.only);
  const auto config = service::episode_config(f.mpc);
  const auto backend = f.backend.config();
  service::make_client(backend);  // fail fast on a bad backend

  std::vector<sim::VariantStats> table;
  try {
    table = sim::run_batch(scenario, variants, f.episodes, f.seed, config,
                           [&backend] { return service::make_client(backend); });
  } catch (const std::exception& e) {
    std::cerr << "episode failed: " << e.what() << "\n";
    return kRunError;
  }
  std::cout << sim::batch_text(table);
  if (!f.out.empty()) {
    std::ofstream out(f.out);
    if (!out) throw ConfigError(fmt::format("cannot write {}", f.out));
    out << sim::batch_csv(table);
  }
  return 0;
}

struct EvalFlags {
  std::string corpus{"queries"};
  int repetitions{10};
  double require_rate{-1.0};
  BackendFlags backend;
};

const dsl::ParameterSet kEvalParams = dsl::default_parameters(2.0, {19.0, 0.0});

int eval(const EvalFlags& f) {
  if (f.repetitions < 1) throw ConfigError("--reps must be at least 1");
  assistants::Corpus corpus;
  const auto path = service::resolve_data_file(f.corpus, "corpus");
  try {
    corpus = assistants::load_corpus(path);
  } catch (const std::exception& e) {
    throw ConfigError(fmt::format("invalid corpus {}: {}", path.string(), e.what()));
  }
  const auto backend = f.backend.config();
  service::make_client(backend);
  const auto rows = assistants::evaluate_corpus(
      corpus, [&backend] { return service::make_client(backend); }, f.repetitions, kEvalParams);
  std::cout << assistants::format_eval_table(rows);
  for (const auto& r : rows) {
    if (r.rate() < f.require_rate) {
      std::cerr << fmt::format("{} {} below required rate {}\n", r.group, r.id, f.require_rate);
      return kRunError;
    }
  }
  return 0;
}

struct ServeFlags {
  std::string scenario{"corridor"};
  std::string host{"127.0.0.1"};
  unsigned short port{8765};
  int latency_ms{1500};
  double speedup{1.0};
  std::uint64_t seed{1};
  std::string mpc;
  BackendFlags backend;
};

int serve(const ServeFlags& f) {
  if (f.latency_ms < 0) throw ConfigError("--latency-ms must be non-negative");
  service::SessionOptions options;
  options.episode = service::episode_config(f.mpc);
  options.latency = std::chrono::milliseconds(f.latency_ms);
  options.speedup = f.speedup;
  options.seed = f.seed;
  if (!(f.speedup > 0.0)) throw ConfigError("--speedup must be positive");

  // Block termination signals before any thread starts so that only sigwait
  // below receives them.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  service::Session session(load_scenario_or_throw(f.scenario), service::make_client(f.backend.config()), options);
  service::WebSocketServer server(session, f.host, f.port);
  try {
    server.start();
  } catch (const std::runtime_error& e) {
    std::cerr << e.what() << "\n";
    return kRunError;
  }
  session.start();
  std::cout << fmt::format("serving {} on ws://{}:{}/ (protocol {})", session.scenario_name(), f.host, server.port(),
                           service::kProtocolVersion)
            << std::endl;
  int received = 0;
  sigwait(&signals, &received);
  server.stop();
  session.stop();
  return 0;
}

struct RecordFlags {
  std::string corpus{"queries"};
  std::string out;
  int repetitions{1};
  std::string scenario;
  std::string variants;
  std::uint64_t seed{1};
  BackendFlags backend;
};

int replay_record(const RecordFlags& f) {
  if (f.out.empty()) throw ConfigError("--out is required");
  if (f.backend.llm == "replay") throw ConfigError("recording needs a mock or live backend");
  std::filesystem::create_directories(f.out);
  const auto backend = f.backend.config();
  service::make_client(backend);
  const auto recorder = [&] {
    return std::make_shared<assistants::RecordingClient>(service::make_client(backend), f.out);
  };

  const auto corpus_path = service::resolve_data_file(f.corpus, "corpus");
  const auto rows = assistants::evaluate_corpus(assistants::load_corpus(corpus_path), recorder, f.repetitions,
                                                kEvalParams);
  std::cout << assistants::format_eval_table(rows);

  if (!f.scenario.empty() || !f.variants.empty()) {
    if (f.scenario.empty() || f.variants.empty()) throw ConfigError("--scenario and --variants go together");
    const auto scenario = load_scenario_or_throw(f.scenario);
    const auto variants = load_variants_or_throw(f.variants, {});
    const auto table = sim::run_batch(scenario, variants, 1, f.seed, sim::EpisodeConfig{}, recorder);
    std::cout << sim::batch_text(table);
  }
  std::size_t files = 0;
  for ([[maybe_unused]] const auto& entry : std::filesystem::directory_iterator(f.out)) ++files;
  std::cout << fmt::format("{} fixtures in {}\n", files, f.out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Language-steered model predictive control for robot navigation"};
  app.require_subcommand(1);

  RunFlags run_flags;
  auto* run_cmd = app.add_subcommand("run", "Run batches of simulated episodes per behaviour variant");
  run_cmd->add_option("--scenario", run_flags.scenario, "Scenario JSON file or bundled name")->required();
  run_cmd->add_option("--variants", run_flags.variants, "Variant table file or bundled name")->capture_default_str();
  run_cmd->add_option("--only", run_flags.only, "Comma-separated variant labels to run");
  run_cmd->add_option("--episodes", run_flags.episodes, "Episodes per variant")->capture_default_str();
  run_cmd->add_option("--seed", run_flags.seed, "Base seed; episode i uses seed + i")->capture_default_str();
  run_cmd->add_option("--out", run_flags.out, "CSV output file");
  run_cmd->add_option("--mpc", run_flags.mpc, "JSON file with MPC config overrides");
  run_flags.backend.add_to(*run_cmd);

  EvalFlags eval_flags;
  auto* eval_cmd = app.add_subcommand("eval", "Success rates of the assistants on a query corpus");
  eval_cmd->add_option("--corpus", eval_flags.corpus, "Corpus file or bundled name")->capture_default_str();
  eval_cmd->add_option("--reps", eval_flags.repetitions, "Repetitions per prompt")->capture_default_str();
  eval_cmd->add_option("--require-rate", eval_flags.require_rate, "Exit 1 if any rate is below this");
  eval_flags.backend.add_to(*eval_cmd);

  ServeFlags serve_flags;
  auto* serve_cmd = app.add_subcommand("serve", "Run a live session over a websocket");
  serve_cmd->add_option("--scenario", serve_flags.scenario, "Scenario JSON file or bundled name")
      ->capture_default_str();
  serve_cmd->add_option("--host", serve_flags.host, "Listen address")->capture_default_str();
  serve_cmd->add_option("--port", serve_flags.port, "Listen port, 0 for any")->capture_default_str();
  serve_cmd->add_option("--latency-ms", serve_flags.latency_ms, "Artificial pipeline delay")->capture_default_str();
  serve_cmd->add_option("--speedup", serve_flags.speedup, "Sim seconds per wall second")->capture_default_str();
  serve_cmd->add_option("--seed", serve_flags.seed, "Pedestrian spawn seed")->capture_default_str();
  serve_cmd->add_option("--mpc", serve_flags.mpc, "JSON file with MPC config overrides");
  serve_flags.backend.add_to(*serve_cmd);

  RecordFlags record_flags;
  auto* record_cmd = app.add_subcommand("replay-record", "Record assistant exchanges as replay fixtures");
  record_cmd->add_option("--out", record_flags.out, "Fixture directory to write")->required();
  record_cmd->add_option("--corpus", record_flags.corpus, "Corpus file or bundled name")->capture_default_str();
  record_cmd->add_option("--reps", record_flags.repetitions, "Repetitions per prompt")->capture_default_str();
  record_cmd->add_option("--scenario", record_flags.scenario, "Also record one episode per variant here");
  record_cmd->add_option("--variants", record_flags.variants, "Variant table for --scenario");
  record_cmd->add_option("--seed", record_flags.seed, "Episode seed")->capture_default_str();
  record_flags.backend.add_to(*record_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsageError;
  }

  try {
    if (*run_cmd) return run(run_flags);
    if (*eval_cmd) return eval(eval_flags);
    if (*serve_cmd) return serve(serve_flags);
    if (*record_cmd) return replay_record(record_flags);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRunError;
  }
  return kUsageError;
}
