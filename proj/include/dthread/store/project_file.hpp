#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"

#include "dthread/core/model.hpp"
#include "dthread/synth/project.hpp"

namespace dthread::store {

inline constexpr int kFormatVersion = 1;
inline constexpr std::string_view kFormatName = "dthread-project";
inline constexpr std::string_view kExtension = ".thread.json";

/// Model state as sorted-key JSON; decimals are strings with their unit.
nlohmann::json model_to_json(const core::Model& model);
/// Throws Errc::kSchema naming the JSON pointer of the offending value.
core::Model model_from_json(const nlohmann::json& j, const std::string& pointer = "");

/// sha256 over the canonical model serialization.
std::string model_digest(const core::Model& model);

/// Canonical file text: two-space indent, lexicographic keys, trailing
/// newline. The `digest` field covers every other field.
std::string serialize_project(const synth::Project& project);
/// Throws Errc::kUnknownVersion, Errc::kSchema (with JSON pointer) and
/// Errc::kIntegrity when the digest or the journal does not match.
synth::Project parse_project(std::string_view text);

/// Atomic temp-file + rename. Refuses (Errc::kIntegrity, listing the
/// problems) when the model has integrity errors unless `force`. Returns
/// the file digest. Throws Errc::kIo.
std::string save_project(const synth::Project& project, const std::filesystem::path& path, bool force = false);
synth::Project load_project(const std::filesystem::path& path);

/// Text of validate_integrity problems, one per line; empty when clean.
std::string describe_integrity(const core::IntegrityReport& report);

}  // namespace dthread::store
