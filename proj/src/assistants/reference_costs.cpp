#include "langmpc/assistants/reference_costs.hpp"

#include <fmt/format.h>

#include <stdexcept>

namespace langmpc::assistants {

dsl::CostSpec reference_cost(std::string_view name, dsl::ParameterSet params, double d_safe) {
  using dsl::CostTerm;
  std::vector<CostTerm> terms;
  if (name == "path") {
    terms = {CostTerm::from_builtin("contour"), CostTerm::from_builtin("lag")};
  } else if (name == "goal") {
    terms = {CostTerm::from_builtin("goal")};
  } else if (name == "human_follow") {
    terms = {CostTerm::from_source("human_follow", std::string(kHumanFollowSource))};
  } else if (name == "human_max") {
    terms = {CostTerm::from_source("human_max", std::string(kHumanMaxSource))};
  } else if (name == "safe_distance") {
    terms = {CostTerm::from_builtin("goal"),
             CostTerm::from_source("safe_distance", std::string(kSafeDistanceSource))};
    params.set("d_safe", {d_safe, "m", true});
  } else {
    throw std::invalid_argument(fmt::format("unknown reference cost '{}'", name));
  }
  for (const char* m : dsl::kMandatoryTerms) {
    terms.push_back(CostTerm::from_builtin(m));
  }
  return dsl::compose_cost(std::move(terms), {}, std::move(params), std::string(name));
}

std::vector<std::string_view> reference_cost_names() {
  return {"path", "goal", "human_follow", "human_max", "safe_distance"};
}

}  // namespace langmpc::assistants
