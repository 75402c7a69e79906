#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dthread/core/types.hpp"
#include "dthread/verify/finding.hpp"

namespace dthread::verify {

/// Integer expression over machine variables: literals, variables, true and
/// false, + - * / %, comparisons, &&, || and !. Booleans are 0 and 1.
class IntExpr {
 public:
  /// Throws Error(kSyntax) with the offending column, or
  /// Error(kUnresolvedReference) for an undeclared variable.
  static IntExpr compile(std::string_view text, const std::vector<std::string>& variables);
  /// Throws Error(kOverflow) or Error(kInvalidArgument) on division by zero.
  std::int64_t eval(std::span<const std::int64_t> values) const;
  const std::string& text() const { return text_; }

  struct Node;

 private:
  std::string text_;
  std::shared_ptr<const Node> root_;
};

struct BehaviorOptions {
  std::size_t depth_bound = 10'000;
  std::size_t state_cap = 1'000'000;
};

/// Breadth-first exploration of (state, valuation) pairs. An assignment that
/// leaves a variable's declared range disables its transition.
std::vector<Finding> check_state_machine(const core::StateMachineDef& machine, const BehaviorOptions& options = {});

struct Configuration {
  std::string state;
  std::vector<std::int64_t> values;  // declaration order

  friend bool operator==(const Configuration&, const Configuration&) = default;
};

/// Re-executes a counterexample trace from the evidence of a behavior
/// finding. Returns the final configuration, or nullopt when a step is not
/// enabled or does not land where the trace says.
std::optional<Configuration> replay_trace(const core::StateMachineDef& machine, const nlohmann::ordered_json& trace);

}  // namespace dthread::verify
