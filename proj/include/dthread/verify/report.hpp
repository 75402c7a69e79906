#pragma once

#include <map>
#include <string>
#include <vector>

#include "json.hpp"

#include "dthread/core/model.hpp"
#include "dthread/geom/compat.hpp"
#include "dthread/geom/link.hpp"
#include "dthread/verify/behavior.hpp"
#include "dthread/verify/constraint.hpp"
#include "dthread/verify/finding.hpp"
#include "dthread/verify/phase1.hpp"

namespace dthread::verify {

struct VerifyPolicy {
  geom::GeoPolicy geo;
  RelationalRules rules = RelationalRules::defaults();
  BehaviorOptions behavior;
};

struct VerificationReport {
  std::vector<Finding> findings;
  std::map<std::pair<Phase, Severity>, std::size_t> summary;
  std::string model_digest;

  std::size_t count(Severity severity) const;
  std::size_t errors() const { return count(Severity::kError); }
};

struct VerifyInputs {
  const geom::GeometryIndex* geometry = nullptr;
  /// Problems met while loading geometry files; reported as warnings.
  std::vector<std::string> geometry_warnings;
  /// Constraints beyond the model's own ConstraintRecords.
  std::vector<ConstraintSpec> extra_specs;
  /// Machines beyond the model's own; their uid and owner are used as-is.
  std::vector<core::StateMachineDef> extra_machines;
};

/// Integrity, Phase 1, Phase 2 constraints, Phase 2 behavior, each block in
/// rule/subject order. Constraint records that fail to parse become Errors.
VerificationReport run_full_verification(const core::Model& model, const VerifyPolicy& policy = {},
                                         const VerifyInputs& inputs = {});

/// Stable-order JSON including a `digest` over every other field.
nlohmann::ordered_json report_to_json(const VerificationReport& report, const VerifyPolicy& policy);
std::string report_digest(const VerificationReport& report, const VerifyPolicy& policy);

}  // namespace dthread::verify
