#ifndef LANGMPC_SERVICE_CONFIG_HPP_
#define LANGMPC_SERVICE_CONFIG_HPP_

#include "langmpc/assistants/llm_client.hpp"
#include "langmpc/sim/episode.hpp"

#include <filesystem>
#include <memory>
#include <stdexcept>
#include <string>

namespace langmpc::service {

/// Bad user configuration; the CLI maps it to exit code 2.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class Backend { kMock, kReplay, kLive };

/// "mock", "replay" or "live". Throws ConfigError.
Backend parse_backend(std::string_view name);

struct BackendConfig {
  Backend backend{Backend::kMock};
  std::filesystem::path fixtures;  // replay source, or record target
  std::string model{"gpt-4o-mini"};
};

/// Throws ConfigError when replay has no fixture directory or live has no
/// LLM_API_KEY in the environment.
std::shared_ptr<assistants::LlmClient> make_client(const BackendConfig& config);

/// Data shipped with the project: LANGMPC_DATA_DIR from the environment, or
/// the source tree the binary was built from.
std::filesystem::path data_dir();

/// A readable file as given, else a bundled file under data_dir()/subdir
/// with or without the ".json" suffix. Throws ConfigError.
std::filesystem::path resolve_data_file(const std::string& name, const std::string& subdir);

/// Episode config with MPC overrides from a JSON file applied. Throws
/// ConfigError on unreadable files or unknown keys.
sim::EpisodeConfig episode_config(const std::filesystem::path& mpc_overrides);

}  // namespace langmpc::service

#endif  // LANGMPC_SERVICE_CONFIG_HPP_
