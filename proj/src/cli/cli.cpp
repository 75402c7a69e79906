#include "dthread/cli/cli.hpp"

#include <algorithm>
#include <fstream>
#include <optional>

#include "CLI11.hpp"
#include "json.hpp"

#include "dthread/core/error.hpp"
#include "dthread/service/api.hpp"
#include "dthread/service/workspace.hpp"
#include "dthread/store/project_file.hpp"
#include "dthread/synth/dsm.hpp"
#include "dthread/verify/report.hpp"

namespace dthread::cli {

namespace fs = std::filesystem;
using service::Workspace;

namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out || !(out << text)) throw Error(Errc::kIo, "cannot write " + path.string());
}

std::string subjects_text(const verify::Finding& f) {
  std::string s;
  for (const auto& u : f.subjects) {
    if (!s.empty()) s += ",";
    s += u.str();
  }
  return s;
}

struct Options {
  std::string project = "project" + std::string(store::kExtension);
  bool force = false;

  std::string init_path;

  std::string ingest_file;
  std::string ingest_format;
  std::string ingest_title;

  std::string adapter = "baseline";
  std::string replay_fixture;

  std::string csv_path;
  std::string dsm_json_path;

  std::string edit_json;
  std::string author = "cli";
  std::optional<std::int64_t> timestamp;

  std::string impact_uid;
  std::string impact_kinds;
  std::string impact_direction = "forward";

  std::vector<std::string> constraint_files;
  std::string rules_file;
  std::string report_path;
  bool report_stdout = false;

  std::string bind = "127.0.0.1:8080";
  std::string cors_origin = "http://localhost:5173";
};

verify::VerifyPolicy policy_from(const Options& o) {
  verify::VerifyPolicy policy;
  if (!o.rules_file.empty()) policy.rules = verify::RelationalRules::load(o.rules_file);
  return policy;
}

int cmd_verify(const Options& o, std::ostream& out) {
  const Workspace ws = Workspace::open(o.project);
  std::vector<verify::ConstraintSpec> extra;
  for (const auto& file : o.constraint_files) {
    auto specs = verify::parse_constraint_file(service::read_file(file));
    extra.insert(extra.end(), specs.begin(), specs.end());
  }
  const auto policy = policy_from(o);
  const auto report = ws.verify(policy, std::move(extra));
  const auto j = verify::report_to_json(report, policy);
  if (!o.report_path.empty()) write_text(o.report_path, j.dump(2) + "\n");
  if (o.report_stdout) {
    out << j.dump(2) << "\n";
  } else {
    for (const auto& f : report.findings) {
      if (f.severity == verify::Severity::kInfo) continue;
      out << to_string(f.severity) << "\t" << f.rule << "\t" << subjects_text(f) << "\t" << f.message << "\n";
    }
    out << report.errors() << " error(s), " << report.count(verify::Severity::kWarning) << " warning(s), "
        << report.count(verify::Severity::kInfo) << " info; report " << j["digest"].get<std::string>() << "\n";
  }
  return report.errors() == 0 ? 0 : 1;
}

int cmd_serve(const Options& o, std::ostream& out) {
  service::ServiceConfig config;
  config.cors_origin = o.cors_origin;
  config.policy = policy_from(o);
  if (!o.replay_fixture.empty()) config.replay_fixture = o.replay_fixture;
  service::ApiSession session(Workspace::open(o.project), config);
  service::Server server(session);
  const auto [host, port] = service::parse_bind(o.bind);
  const int bound = server.bind(host, port);
  out << "serving " << o.project << " on http://" << host << ":" << bound << "/api" << std::endl;
  server.listen();
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Requirements, architecture and geometry in one model", "dthread"};
  app.require_subcommand(1);
  app.add_option("-p,--project", o.project, "Project file")->envname("DTHREAD_PROJECT");

  auto* init = app.add_subcommand("init", "Create an empty project file");
  init->add_option("project", o.init_path, "Project file to create")->required();
  init->add_flag("--force", o.force, "Overwrite an existing file");

  auto* ingest = app.add_subcommand("ingest", "Add a text document or link a STEP file");
  ingest->add_option("file", o.ingest_file)->required()->check(CLI::ExistingFile);
  ingest->add_option("--format", o.ingest_format, "md, txt or step (default: from extension)")
      ->check(CLI::IsMember({"md", "markdown", "txt", "text", "step"}));
  ingest->add_option("--title", o.ingest_title);

  auto* extract = app.add_subcommand("extract", "Extract requirements from every document");
  extract->add_option("--adapter", o.adapter)->check(CLI::IsMember({"baseline", "replay", "live"}));
  extract->add_option("--replay-fixture", o.replay_fixture)->check(CLI::ExistingFile);

  auto* synthesize = app.add_subcommand("synthesize", "Identify components and interactions");

  auto* dsm = app.add_subcommand("dsm", "Design structure matrix");
  dsm->require_subcommand(1);
  auto* dsm_export = dsm->add_subcommand("export", "Write the DSM (CSV to stdout by default)");
  dsm_export->add_option("--csv", o.csv_path);
  dsm_export->add_option("--json", o.dsm_json_path);

  auto* edit = app.add_subcommand("edit", "Apply refinement edits");
  edit->add_option("--json", o.edit_json, "Edit JSON, or @file with an object, array or JSON lines")->required();
  edit->add_option("--author", o.author);
  edit->add_option("--timestamp", o.timestamp, "Unix seconds (default: SOURCE_DATE_EPOCH or 0)");

  auto* impact = app.add_subcommand("impact", "Trace closure from a uid");
  impact->add_option("uid", o.impact_uid)->required();
  impact->add_option("--kinds", o.impact_kinds, "Comma-separated trace kinds (default: all)");
  impact->add_option("--direction", o.impact_direction)->check(CLI::IsMember({"forward", "backward", "both"}));

  auto* verify_cmd = app.add_subcommand("verify", "Run every check; exit 1 when Errors are found");
  verify_cmd->add_option("--constraints", o.constraint_files)->check(CLI::ExistingFile);
  verify_cmd->add_option("--rules", o.rules_file, "Relational rule table (JSON)")->check(CLI::ExistingFile);
  verify_cmd->add_option("--report", o.report_path, "Write the JSON report here");
  verify_cmd->add_flag("--json", o.report_stdout, "Print the JSON report instead of a summary");

  auto* serve = app.add_subcommand("serve", "Serve the project over HTTP");
  serve->add_option("--bind", o.bind);
  serve->add_option("--cors-origin", o.cors_origin);
  serve->add_option("--replay-fixture", o.replay_fixture)->check(CLI::ExistingFile);
  serve->add_option("--rules", o.rules_file)->check(CLI::ExistingFile);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, err, err);
    err << app.help();
    return 2;
  }

  try {
    if (init->parsed()) {
      Workspace::create(o.init_path, o.force);
      out << "created " << o.init_path << "\n";
      return 0;
    }
    if (verify_cmd->parsed()) return cmd_verify(o, out);
    if (serve->parsed()) return cmd_serve(o, out);

    Workspace ws = Workspace::open(o.project);
    if (ingest->parsed()) {
      if (o.ingest_format == "step" || (o.ingest_format.empty() && service::is_step_path(o.ingest_file))) {
        const auto s = ws.ingest_step(o.ingest_file);
        out << "linked " << s.geometry.str() << ": " << s.linked.size() << " component(s)";
        if (!s.unmatched_products.empty()) out << ", " << s.unmatched_products.size() << " unmatched product(s)";
        out << "\n";
      } else {
        std::optional<core::DocFormat> format;
        if (o.ingest_format == "md" || o.ingest_format == "markdown") format = core::DocFormat::kMarkdown;
        if (o.ingest_format == "txt" || o.ingest_format == "text") format = core::DocFormat::kPlainText;
        std::optional<std::string> title;
        if (!o.ingest_title.empty()) title = o.ingest_title;
        const auto doc = ws.ingest_file(o.ingest_file, format, title);
        out << doc.uid.str() << " " << doc.title << ": " << doc.sentences.size() << " sentence(s)\n";
      }
    } else if (extract->parsed()) {
      std::optional<fs::path> fixture;
      if (!o.replay_fixture.empty()) fixture = o.replay_fixture;
      auto adapter = docpipe::make_adapter(docpipe::parse_adapter_mode(o.adapter), fixture);
      const auto uids = ws.extract(*adapter);
      out << uids.size() << " requirement(s) extracted\n";
    } else if (synthesize->parsed()) {
      const auto s = ws.synthesize();
      out << s.new_components.size() << " component(s), " << s.interactions << " interaction(s), " << s.traces_added
          << " trace(s)\n";
    } else if (dsm_export->parsed()) {
      const auto d = synth::graph_to_dsm(ws.model());
      if (!o.csv_path.empty()) write_text(o.csv_path, synth::dsm_to_csv(d, ws.model()));
      if (!o.dsm_json_path.empty()) write_text(o.dsm_json_path, synth::dsm_to_json(d, &ws.model()).dump(2) + "\n");
      if (o.csv_path.empty() && o.dsm_json_path.empty()) out << synth::dsm_to_csv(d, ws.model());
      return 0;
    } else if (edit->parsed()) {
      const std::string text = o.edit_json.starts_with("@") ? service::read_file(o.edit_json.substr(1)) : o.edit_json;
      const auto edits =
          service::parse_edits(text, ws.model(), o.author, o.timestamp.value_or(service::default_timestamp()));
      for (const auto& e : edits) ws.apply(e);
      out << edits.size() << " edit(s) applied\n";
    } else if (impact->parsed()) {
      std::set<core::TraceKind> kinds;
      std::stringstream in(o.impact_kinds);
      std::string item;
      while (std::getline(in, item, ',')) {
        if (!item.empty()) kinds.insert(core::parse_enum<core::TraceKind>(item));
      }
      const auto set = ws.model().impact_set(core::Uid::parse(o.impact_uid), kinds,
                                             core::parse_enum<core::Direction>(o.impact_direction));
      for (const auto& u : set) out << u.str() << "\n";
      return 0;
    }
    ws.save();
    return 0;
  } catch (const Error& e) {
    err << "error (" << to_string(e.code()) << "): " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace dthread::cli
