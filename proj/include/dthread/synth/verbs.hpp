#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "json.hpp"

#include "dthread/core/types.hpp"

namespace dthread::synth {

struct VerbRule {
  core::InteractionKind kind = core::InteractionKind::kInformation;
  bool directed = true;
  friend bool operator==(const VerbRule&, const VerbRule&) = default;
};

/// Verb -> interaction kind table, keyed by lowercase base form.
class VerbTable {
 public:
  /// The shipped table (same content as data/verbs.json).
  static VerbTable defaults();
  /// `{"send": {"kind": "Information", "directed": true}, ...}`.
  /// Throws Errc::kSchema.
  static VerbTable from_json(const nlohmann::json& j);
  static VerbTable load(const std::filesystem::path& path);
  nlohmann::json to_json() const;

  void set(std::string verb, VerbRule rule) { rules_[std::move(verb)] = rule; }
  /// Looks up an inflected word ("sends", "mounted", "supplies").
  std::optional<std::pair<std::string, VerbRule>> match(std::string_view word) const;
  const std::map<std::string, VerbRule>& rules() const { return rules_; }

 private:
  std::map<std::string, VerbRule> rules_;
};

}  // namespace dthread::synth
