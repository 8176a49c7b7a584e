#include "langmpc/sim/metrics.hpp"

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <limits>

namespace langmpc::sim {
namespace {

constexpr std::size_t kFieldCount = 7;

std::array<double, kFieldCount> fields(const Metrics& m) {
  return {m.collision ? 1.0 : 0.0, m.duration,       m.path_length,   m.min_distance,
          m.mean_speed,            m.mean_abs_accel, m.mean_abs_omega};
}

Metrics from_fields(const std::array<double, kFieldCount>& f) {
  return {f[0] > 0.5, f[1], f[2], f[3], f[4], f[5], f[6]};
}

constexpr std::array<const char*, kFieldCount> kNames = {"collision", "duration", "path_length", "min_distance",
                                                         "speed",     "abs_accel", "abs_omega"};

}  // namespace

Metrics compute_metrics(const EpisodeRecord& record, bool subtract_radii) {
  if (record.steps.empty()) {
    throw std::invalid_argument("empty episode record");
  }
  Metrics m;
  m.collision = record.status == Termination::kCollision;
  const std::size_t n = record.steps.size() - 1;  // control steps
  m.duration = static_cast<double>(n) * record.dt;
  m.min_distance = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < record.steps.size(); ++i) {
    const auto& s = record.steps[i];
    if (i + 1 < record.steps.size()) {
      m.path_length += (record.steps[i + 1].robot.position() - s.robot.position()).norm();
      m.mean_speed += s.robot.v;
      m.mean_abs_accel += std::abs(s.input.a);
      m.mean_abs_omega += std::abs(s.input.omega);
    }
    for (const auto& h : s.humans) {
      m.min_distance = std::min(m.min_distance, (h.position - s.robot.position()).norm());
    }
  }
  if (n > 0) {
    m.mean_speed /= static_cast<double>(n);
    m.mean_abs_accel /= static_cast<double>(n);
    m.mean_abs_omega /= static_cast<double>(n);
  }
  if (subtract_radii && std::isfinite(m.min_distance)) {
    m.min_distance -= record.robot_radius + record.human_radius;
  }
  return m;
}

std::vector<Variant> load_variants(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) {
    throw std::invalid_argument(fmt::format("cannot open variants {}", file.string()));
  }
  std::vector<Variant> out;
  try {
    for (const auto& v : nlohmann::json::parse(in)) {
      out.push_back({v.at("label"), v.value("description", ""), query_script_from_json(v.at("script"))});
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(fmt::format("malformed variants {}: {}", file.string(), e.what()));
  }
  return out;
}

std::vector<VariantStats> run_batch(const world::Scenario& scenario, const std::vector<Variant>& variants,
                                    int episodes, std::uint64_t base_seed, const EpisodeConfig& config,
                                    const ClientFactory& make_client) {
  if (episodes < 1) {
    throw std::invalid_argument("episodes must be at least 1");
  }
  std::vector<VariantStats> table;
  for (const auto& v : variants) {
    VariantStats stats;
    stats.label = v.label;
    stats.description = v.description;
    stats.episodes = episodes;
    std::array<double, kFieldCount> sum{};
    for (int i = 0; i < episodes; ++i) {
      const auto record = run_episode(scenario, v.script, config, make_client(), base_seed + static_cast<std::uint64_t>(i));
      stats.runs.push_back(compute_metrics(record));
      const auto f = fields(stats.runs.back());
      for (std::size_t j = 0; j < kFieldCount; ++j) {
        sum[j] += f[j];
      }
    }
    std::array<double, kFieldCount> mean{};
    std::array<double, kFieldCount> var{};
    for (std::size_t j = 0; j < kFieldCount; ++j) {
      mean[j] = sum[j] / episodes;
    }
    for (const auto& r : stats.runs) {
      const auto f = fields(r);
      for (std::size_t j = 0; j < kFieldCount; ++j) {
        var[j] += (f[j] - mean[j]) * (f[j] - mean[j]);
      }
    }
    std::array<double, kFieldCount> sd{};
    for (std::size_t j = 0; j < kFieldCount; ++j) {
      sd[j] = episodes > 1 ? std::sqrt(var[j] / (episodes - 1)) : 0.0;
    }
    stats.collision_rate = mean[0];
    stats.mean = from_fields(mean);
    stats.stddev = from_fields(sd);
    table.push_back(std::move(stats));
  }
  return table;
}

std::string batch_csv(const std::vector<VariantStats>& table) {
  std::string out = "variant,episodes,collision_rate";
  for (std::size_t j = 1; j < kFieldCount; ++j) {
    out += fmt::format(",{0}_mean,{0}_std", kNames[j]);
  }
  out += '\n';
  for (const auto& s : table) {
    out += fmt::format("{},{},{}", s.label, s.episodes, s.collision_rate);
    const auto mean = fields(s.mean);
    const auto sd = fields(s.stddev);
    for (std::size_t j = 1; j < kFieldCount; ++j) {
      out += fmt::format(",{:.6g},{:.6g}", mean[j], sd[j]);
    }
    out += '\n';
  }
  return out;
}

std::string batch_text(const std::vector<VariantStats>& table) {
  std::string out = fmt::format("{:<8} {:>4} {:>9}", "variant", "n", "col.rate");
  for (std::size_t j = 1; j < kFieldCount; ++j) {
    out += fmt::format(" {:>17}", kNames[j]);
  }
  out += '\n';
  for (const auto& s : table) {
    out += fmt::format("{:<8} {:>4} {:>9.2f}", s.label, s.episodes, s.collision_rate);
    const auto mean = fields(s.mean);
    const auto sd = fields(s.stddev);
    for (std::size_t j = 1; j < kFieldCount; ++j) {
      out += fmt::format(" {:>17}", fmt::format("{:.2f} ± {:.2f}", mean[j], sd[j]));
    }
    out += '\n';
  }
  return out;
}

}  // namespace langmpc::sim
