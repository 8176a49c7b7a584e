#ifndef LANGMPC_ASSISTANTS_PROMPTS_HPP_
#define LANGMPC_ASSISTANTS_PROMPTS_HPP_

#include <string_view>

// System prompts embedded at build time from data/prompts/*.txt.
namespace langmpc::assistants::prompts {

extern const std::string_view capability;
extern const std::string_view cost_generation;
extern const std::string_view camera;
extern const std::string_view weight_retrieval;

}  // namespace langmpc::assistants::prompts

#endif  // LANGMPC_ASSISTANTS_PROMPTS_HPP_
