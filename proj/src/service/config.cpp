#include "langmpc/service/config.hpp"

#include "langmpc/assistants/backends.hpp"
#include "langmpc/mpc/config.hpp"

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <cstdlib>
#include <fstream>

namespace langmpc::service {

Backend parse_backend(std::string_view name) {
  if (name == "mock") return Backend::kMock;
  if (name == "replay") return Backend::kReplay;
  if (name == "live") return Backend::kLive;
  throw ConfigError(fmt::format("unknown backend '{}' (expected mock, replay or live)", name));
}

std::shared_ptr<assistants::LlmClient> make_client(const BackendConfig& config) {
  switch (config.backend) {
    case Backend::kMock:
      return std::make_shared<assistants::MockBackend>();
    case Backend::kReplay:
      if (config.fixtures.empty() || !std::filesystem::is_directory(config.fixtures)) {
        throw ConfigError(fmt::format("replay needs an existing fixture directory (got '{}')", config.fixtures.string()));
      }
      return std::make_shared<assistants::ReplayBackend>(config.fixtures);
    case Backend::kLive:
      try {
        return std::make_shared<assistants::LiveBackend>(assistants::LiveConfig::from_environment(config.model));
      } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
      }
  }
  throw ConfigError("unknown backend");
}

std::filesystem::path data_dir() {
  if (const char* env = std::getenv("LANGMPC_DATA_DIR"); env != nullptr && *env != '\0') {
    return env;
  }
  return LANGMPC_DEFAULT_DATA_DIR;
}

std::filesystem::path resolve_data_file(const std::string& name, const std::string& subdir) {
  if (std::filesystem::is_regular_file(name)) {
    return name;
  }
  for (const auto& candidate : {data_dir() / subdir / name, data_dir() / subdir / (name + ".json")}) {
    if (std::filesystem::is_regular_file(candidate)) {
      return candidate;
    }
  }
  throw ConfigError(fmt::format("cannot find '{}' (looked for a file and in {})", name, (data_dir() / subdir).string()));
}

sim::EpisodeConfig episode_config(const std::filesystem::path& mpc_overrides) {
  sim::EpisodeConfig config;
  if (mpc_overrides.empty()) {
    return config;
  }
  std::ifstream in(mpc_overrides);
  if (!in) {
    throw ConfigError(fmt::format("cannot open MPC overrides {}", mpc_overrides.string()));
  }
  try {
    mpc::apply_overrides(config.mpc, nlohmann::json::parse(in));
  } catch (const std::exception& e) {
    throw ConfigError(fmt::format("bad MPC overrides {}: {}", mpc_overrides.string(), e.what()));
  }
  return config;
}

}  // namespace langmpc::service
