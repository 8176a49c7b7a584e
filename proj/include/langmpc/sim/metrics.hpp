#ifndef LANGMPC_SIM_METRICS_HPP_
#define LANGMPC_SIM_METRICS_HPP_

#include "langmpc/assistants/llm_client.hpp"
#include "langmpc/sim/episode.hpp"

#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace langmpc::sim {

struct Metrics {
  bool collision{false};
  double duration{0.0};       // [s]
  double path_length{0.0};    // [m]
  double min_distance{0.0};   // [m], center to center unless radii are subtracted
  double mean_speed{0.0};     // [m/s]
  double mean_abs_accel{0.0};  // [m/s^2]
  double mean_abs_omega{0.0};  // [rad/s]
};

/// Means run over the control steps; min distance is infinite without humans.
/// Throws std::invalid_argument on an empty record.
Metrics compute_metrics(const EpisodeRecord& record, bool subtract_radii = false);

struct Variant {
  std::string label;
  std::string description;
  QueryScript script;
};

/// JSON array of {"label", "description", "script": [...]}.
std::vector<Variant> load_variants(const std::filesystem::path& file);

struct VariantStats {
  std::string label;
  std::string description;
  int episodes{0};
  double collision_rate{0.0};
  Metrics mean;
  Metrics stddev;  // sample standard deviation, 0 for a single episode
  std::vector<Metrics> runs;
};

using ClientFactory = std::function<std::shared_ptr<assistants::LlmClient>()>;

/// Episodes use seeds base_seed + i; each gets a fresh client.
std::vector<VariantStats> run_batch(const world::Scenario& scenario, const std::vector<Variant>& variants,
                                    int episodes, std::uint64_t base_seed, const EpisodeConfig& config,
                                    const ClientFactory& make_client);

/// One row per variant: label, episodes, collision rate, then mean and std of
/// every metric.
std::string batch_csv(const std::vector<VariantStats>& table);
std::string batch_text(const std::vector<VariantStats>& table);

}  // namespace langmpc::sim

#endif  // LANGMPC_SIM_METRICS_HPP_
