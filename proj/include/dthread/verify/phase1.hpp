#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "dthread/core/model.hpp"
#include "dthread/geom/compat.hpp"
#include "dthread/geom/link.hpp"
#include "dthread/verify/finding.hpp"

namespace dthread::verify {

struct RelationalRule {
  std::string tag_a;  // "*" matches any tag
  std::string tag_b;
  core::InteractionKind kind = core::InteractionKind::kSpatial;
  bool allow = true;
  std::string note;
};

/// Symmetric in the tag pair. An interaction is forbidden when some rule
/// matching a tag pair of its endpoints forbids it; everything else is
/// allowed.
class RelationalRules {
 public:
  static RelationalRules defaults();
  /// {"rules": [{"tags": [a, b], "kind": "Material", "allow": false, "note": ...}]}
  /// Throws Errc::kSchema.
  static RelationalRules from_json(const nlohmann::json& j);
  static RelationalRules load(const std::filesystem::path& path);
  nlohmann::ordered_json to_json() const;

  void add(RelationalRule rule) { rules_.push_back(std::move(rule)); }
  const RelationalRule* forbidding(const core::Component& a, const core::Component& b,
                                   core::InteractionKind kind) const;
  const std::vector<RelationalRule>& rules() const { return rules_; }

 private:
  std::vector<RelationalRule> rules_;
};

/// Findings for validate_integrity problems (Phase1Relational, Error).
std::vector<Finding> integrity_findings(const core::Model& model);

/// Geometric, functional and relational checks over every interaction.
/// `geometry` may be null; interactions then get a not-checked Info.
std::vector<Finding> run_phase1(const core::Model& model, const geom::GeometryIndex* geometry,
                                const geom::GeoPolicy& geo, const RelationalRules& rules);

struct Interval {
  Decimal lo;
  Decimal hi;
};

/// `<name>_min`/`<name>_max`, or `<name>` as a degenerate interval; values
/// in base units. nullopt when neither form is declared.
std::optional<Interval> attribute_interval(const core::Component& c, const std::string& name);

}  // namespace dthread::verify
