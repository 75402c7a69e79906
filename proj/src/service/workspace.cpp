#include "dthread/service/workspace.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "dthread/core/error.hpp"
#include "dthread/docpipe/document.hpp"
#include "dthread/store/project_file.hpp"

namespace dthread::service {

namespace fs = std::filesystem;

std::int64_t default_timestamp() {
  const char* env = std::getenv("SOURCE_DATE_EPOCH");
  if (env == nullptr || *env == '\0') return 0;
  try {
    std::size_t used = 0;
    const long long v = std::stoll(env, &used);
    if (used != std::string_view(env).size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw Error(Errc::kInvalidArgument, std::string("SOURCE_DATE_EPOCH is not an integer: ") + env);
  }
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::kIo, "cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

bool is_step_path(const fs::path& path) {
  std::string ext = path.extension().string();
  for (auto& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return ext == ".stp" || ext == ".step" || ext == ".p21";
}

Workspace Workspace::create(const fs::path& file, bool force) {
  if (fs::exists(file) && !force) throw Error(Errc::kConflict, file.string() + " already exists");
  Workspace ws(file, synth::Project{});
  ws.save();
  return ws;
}

Workspace Workspace::open(const fs::path& file) { return Workspace(file, store::load_project(file)); }

fs::path Workspace::base_dir() const {
  fs::path dir = fs::absolute(file_).parent_path();
  return dir;
}

std::string Workspace::save(bool force) const { return store::save_project(project_, file_, force); }

core::DocumentArtifact Workspace::ingest_text(std::string title, std::string_view raw, core::DocFormat format) {
  return project_.run_stage("ingest", [&](core::Model& m) {
    return docpipe::ingest_document(m, std::move(title), raw, format);
  });
}

core::DocumentArtifact Workspace::ingest_file(const fs::path& path, std::optional<core::DocFormat> format,
                                              std::optional<std::string> title) {
  const std::string raw = read_file(path);
  return ingest_text(title.value_or(path.filename().string()), raw,
                     format.value_or(docpipe::format_from_path(path)));
}

geom::LinkSummary Workspace::ingest_step(const fs::path& path) {
  const std::string bytes = read_file(path);
  const geom::StepModel step = geom::parse_step(bytes);
  const std::string rel = fs::absolute(path).lexically_relative(base_dir()).generic_string();
  return project_.run_stage("link", [&](core::Model& m) { return geom::link_geometry(m, rel, bytes, step); });
}

std::vector<core::Uid> Workspace::extract(docpipe::ExtractorAdapter& adapter) {
  std::vector<docpipe::CandidateSpan> candidates;
  for (const auto& [uid, doc] : model().documents()) {
    auto c = docpipe::annotate_candidates(doc, adapter);
    candidates.insert(candidates.end(), c.begin(), c.end());
  }
  return project_.run_stage("extract", [&](core::Model& m) { return docpipe::extract_requirements(m, candidates); });
}

synth::SynthesisSummary Workspace::synthesize() {
  return project_.run_stage("synthesize",
                            [](core::Model& m) { return synth::synthesize(m, synth::VerbTable::defaults()); });
}

void Workspace::apply(const synth::RefinementEdit& edit) { project_.apply(edit); }

geom::GeometryIndex Workspace::geometry(std::vector<std::string>* warnings) const {
  return geom::GeometryIndex::load(model(), base_dir(), warnings);
}

verify::VerificationReport Workspace::verify(const verify::VerifyPolicy& policy,
                                             std::vector<verify::ConstraintSpec> extra_specs) const {
  verify::VerifyInputs inputs;
  const geom::GeometryIndex index = geometry(&inputs.geometry_warnings);
  inputs.geometry = &index;
  inputs.extra_specs = std::move(extra_specs);
  return verify::run_full_verification(model(), policy, inputs);
}

std::vector<synth::RefinementEdit> parse_edits(std::string_view text, const core::Model& model,
                                               const std::string& author, std::int64_t timestamp) {
  std::vector<nlohmann::json> items;
  try {
    auto whole = nlohmann::json::parse(text, nullptr, true, true);
    if (whole.is_array()) {
      items.assign(whole.begin(), whole.end());
    } else {
      items.push_back(std::move(whole));
    }
  } catch (const nlohmann::json::parse_error&) {
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
      ++n;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      try {
        items.push_back(nlohmann::json::parse(line));
      } catch (const nlohmann::json::parse_error& e) {
        throw Error(Errc::kSchema, "edit line " + std::to_string(n) + ": " + e.what());
      }
    }
  }
  // names are resolved against the model as it will be when the edit runs
  std::vector<synth::RefinementEdit> out;
  core::Model scratch = model;
  for (const auto& j : items) {
    out.push_back(synth::edit_from_json(j, &scratch, author, timestamp));
    synth::apply_edit_in_place(scratch, out.back());
  }
  return out;
}

}  // namespace dthread::service
