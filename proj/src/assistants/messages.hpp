#ifndef LANGMPC_ASSISTANTS_MESSAGES_HPP_
#define LANGMPC_ASSISTANTS_MESSAGES_HPP_

#include "langmpc/assistants/pipeline.hpp"
#include "langmpc/dsl/cost_spec.hpp"

#include <string>
#include <string_view>

// User-message layout shared by the pipeline and the mock backend. Each
// message is a series of "Label:" lines, each followed by a body without
// blank lines and terminated by one blank line.
namespace langmpc::assistants::detail {

inline constexpr std::string_view kQuery = "Query";
inline constexpr std::string_view kScene = "Scene";
inline constexpr std::string_view kInstruction = "Instruction";
inline constexpr std::string_view kCostFunction = "Cost function";
inline constexpr std::string_view kParameters = "Parameters";
inline constexpr std::string_view kRatings = "Current ratings";
inline constexpr std::string_view kError = "Error";
inline constexpr std::string_view kGeometry = "Geometry";

struct Geometry {
  double robot_radius{0.3};
  double human_radius{0.3};
};

std::string capability_message(std::string_view query, const dsl::CostSpec& spec);
std::string cost_generation_message(std::string_view query, const dsl::CostSpec& spec, const Geometry& geometry);
std::string camera_message(std::string_view scene);
std::string weight_message(std::string_view instruction, const dsl::CostSpec& spec,
                           const ImportanceRatings& ratings, const Geometry& geometry);

/// Radii parsed back from a Geometry section; defaults when absent.
Geometry parse_geometry(std::string_view message);
std::string repair_message(std::string_view error);

/// Body of the section `label`, empty when absent.
std::string section(std::string_view message, std::string_view label);

}  // namespace langmpc::assistants::detail

#endif  // LANGMPC_ASSISTANTS_MESSAGES_HPP_
