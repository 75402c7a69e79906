#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "dthread/core/uid.hpp"

namespace dthread::verify {

using core::Uid;

enum class Phase { kPhase1Geometric, kPhase1Functional, kPhase1Relational, kPhase2Constraint, kPhase2Behavior };
enum class Severity { kError, kWarning, kInfo };

std::string_view to_string(Phase phase);
std::string_view to_string(Severity severity);
Phase parse_phase(std::string_view text);
Severity parse_severity(std::string_view text);

struct Finding {
  Phase phase = Phase::kPhase1Geometric;
  Severity severity = Severity::kInfo;
  std::string rule;
  std::vector<Uid> subjects;
  std::string message;
  nlohmann::ordered_json evidence = nlohmann::ordered_json::object();
};

/// Order within a phase: rule, then subjects, then message.
bool finding_less(const Finding& a, const Finding& b);
void sort_findings(std::vector<Finding>& findings);

nlohmann::ordered_json finding_to_json(const Finding& f);
Finding finding_from_json(const nlohmann::json& j);

}  // namespace dthread::verify
