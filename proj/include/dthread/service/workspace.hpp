#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dthread/core/model.hpp"
#include "dthread/docpipe/extract.hpp"
#include "dthread/geom/link.hpp"
#include "dthread/synth/identify.hpp"
#include "dthread/synth/project.hpp"
#include "dthread/verify/report.hpp"

namespace dthread::service {

/// SOURCE_DATE_EPOCH when set, otherwise 0, so that journals are
/// reproducible unless the caller asks for wall-clock stamps.
std::int64_t default_timestamp();

/// A project file on disk plus its loaded state. Every stage runs on the
/// in-memory project; `save` writes it back.
class Workspace {
 public:
  static Workspace create(const std::filesystem::path& file, bool force = false);
  static Workspace open(const std::filesystem::path& file);

  const std::filesystem::path& file() const { return file_; }
  std::filesystem::path base_dir() const;
  const synth::Project& project() const { return project_; }
  const core::Model& model() const { return project_.model(); }

  std::string save(bool force = false) const;

  /// Text documents; title defaults to the file name.
  core::DocumentArtifact ingest_text(std::string title, std::string_view raw, core::DocFormat format);
  core::DocumentArtifact ingest_file(const std::filesystem::path& path, std::optional<core::DocFormat> format,
                                     std::optional<std::string> title = std::nullopt);
  /// STEP files are stored by path relative to the project directory.
  geom::LinkSummary ingest_step(const std::filesystem::path& path);

  std::vector<core::Uid> extract(docpipe::ExtractorAdapter& adapter);
  synth::SynthesisSummary synthesize();
  void apply(const synth::RefinementEdit& edit);

  geom::GeometryIndex geometry(std::vector<std::string>* warnings) const;
  verify::VerificationReport verify(const verify::VerifyPolicy& policy,
                                    std::vector<verify::ConstraintSpec> extra_specs = {}) const;

 private:
  Workspace(std::filesystem::path file, synth::Project project) : file_(std::move(file)), project_(std::move(project)) {}

  std::filesystem::path file_;
  synth::Project project_;
};

bool is_step_path(const std::filesystem::path& path);

/// Accepts a single edit object, an array of them, or JSON lines.
std::vector<synth::RefinementEdit> parse_edits(std::string_view text, const core::Model& model,
                                               const std::string& author, std::int64_t timestamp);

std::string read_file(const std::filesystem::path& path);

}  // namespace dthread::service
