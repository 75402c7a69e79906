#include "dthread/verify/finding.hpp"

#include <algorithm>
#include <array>
#include <tuple>

#include "dthread/core/error.hpp"

namespace dthread::verify {
namespace {

constexpr std::array<std::string_view, 5> kPhases = {"Phase1Geometric", "Phase1Functional", "Phase1Relational",
                                                     "Phase2Constraint", "Phase2Behavior"};
constexpr std::array<std::string_view, 3> kSeverities = {"Error", "Warning", "Info"};

}  // namespace

std::string_view to_string(Phase phase) { return kPhases[static_cast<std::size_t>(phase)]; }
std::string_view to_string(Severity severity) { return kSeverities[static_cast<std::size_t>(severity)]; }

Phase parse_phase(std::string_view text) {
  for (std::size_t i = 0; i < kPhases.size(); ++i) {
    if (kPhases[i] == text) return static_cast<Phase>(i);
  }
  throw Error(Errc::kInvalidArgument, "unknown phase '" + std::string(text) + "'");
}

Severity parse_severity(std::string_view text) {
  for (std::size_t i = 0; i < kSeverities.size(); ++i) {
    if (kSeverities[i] == text) return static_cast<Severity>(i);
  }
  throw Error(Errc::kInvalidArgument, "unknown severity '" + std::string(text) + "'");
}

bool finding_less(const Finding& a, const Finding& b) {
  return std::tie(a.rule, a.subjects, a.message) < std::tie(b.rule, b.subjects, b.message);
}

void sort_findings(std::vector<Finding>& findings) { std::stable_sort(findings.begin(), findings.end(), finding_less); }

nlohmann::ordered_json finding_to_json(const Finding& f) {
  nlohmann::ordered_json j;
  j["phase"] = to_string(f.phase);
  j["severity"] = to_string(f.severity);
  j["rule"] = f.rule;
  auto& subjects = j["subjects"] = nlohmann::ordered_json::array();
  for (const auto& s : f.subjects) subjects.push_back(s.str());
  j["message"] = f.message;
  j["evidence"] = f.evidence;
  return j;
}

Finding finding_from_json(const nlohmann::json& j) {
  try {
    Finding f;
    f.phase = parse_phase(j.at("phase").get<std::string>());
    f.severity = parse_severity(j.at("severity").get<std::string>());
    f.rule = j.at("rule").get<std::string>();
    for (const auto& s : j.at("subjects")) f.subjects.push_back(Uid::parse(s.get<std::string>()));
    f.message = j.at("message").get<std::string>();
    f.evidence = nlohmann::ordered_json::parse(j.at("evidence").dump());
    return f;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::kSchema, std::string("finding: ") + e.what());
  }
}

}  // namespace dthread::verify
