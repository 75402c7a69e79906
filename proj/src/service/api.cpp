#include "dthread/service/api.hpp"

#include <charconv>
#include <regex>
#include <sstream>

#include "dthread/core/digest.hpp"
#include "dthread/core/error.hpp"
#include "dthread/docpipe/document.hpp"
#include "dthread/store/project_file.hpp"
#include "dthread/synth/dsm.hpp"
#include "dthread/synth/edit.hpp"

namespace dthread::service {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

ApiResponse error_response(int status, std::string_view code, const std::string& message) {
  ApiResponse r;
  r.status = status;
  r.body = {{"error", std::string(code)}, {"message", message}};
  return r;
}

int status_for(Errc code) {
  switch (code) {
    case Errc::kUnregisteredUid:
    case Errc::kUnknownProduct:
      return 404;
    case Errc::kConflict:
    case Errc::kDuplicateBinding:
    case Errc::kDuplicateEdge:
    case Errc::kDuplicateName:
      return 409;
    case Errc::kIntegrity:
    case Errc::kDanglingEndpoint:
      return 422;
    case Errc::kIo:
    case Errc::kAdapterFailure:
      return 502;
    default:
      return 400;
  }
}

std::vector<std::string> split_csv(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

json parse_body(const ApiRequest& req) {
  if (req.body.find_first_not_of(" \t\r\n") == std::string::npos) return json::object();
  try {
    return json::parse(req.body);
  } catch (const json::parse_error& e) {
    throw Error(Errc::kSchema, std::string("request body is not JSON: ") + e.what());
  }
}

ordered_json ordered(const json& j) { return ordered_json::parse(j.dump()); }

ordered_json box_json(const geom::Aabb& box) {
  if (box.is_empty()) return nullptr;
  return {{"min", {box.min().x(), box.min().y(), box.min().z()}}, {"max", {box.max().x(), box.max().y(), box.max().z()}}};
}

}  // namespace

ApiSession::ApiSession(Workspace workspace, ServiceConfig config)
    : workspace_(std::move(workspace)), config_(std::move(config)) {}

std::uint64_t ApiSession::revision() const {
  std::shared_lock lock(mutex_);
  return revision_;
}

ApiResponse ApiSession::handle(const ApiRequest& request) {
  ApiResponse r;
  try {
    r = dispatch(request);
  } catch (const Error& e) {
    r = error_response(status_for(e.code()), to_string(e.code()), e.what());
  } catch (const json::exception& e) {
    r = error_response(400, to_string(Errc::kSchema), e.what());
  } catch (const std::exception& e) {
    r = error_response(500, "internal", e.what());
  }
  r.headers["Access-Control-Allow-Origin"] = config_.cors_origin;
  r.headers["Access-Control-Expose-Headers"] = "ETag";
  r.headers["Vary"] = "Origin";
  {
    std::shared_lock lock(mutex_);
    r.headers["ETag"] = std::to_string(revision_);
  }
  return r;
}

template <typename Fn>
ApiResponse ApiSession::mutate(const ApiRequest& request, Fn&& fn) {
  std::unique_lock lock(mutex_);
  if (auto it = request.headers.find("if-match"); it != request.headers.end()) {
    std::string tag = it->second;
    std::erase(tag, '"');
    std::uint64_t expected = 0;
    auto [end, ec] = std::from_chars(tag.data(), tag.data() + tag.size(), expected);
    if (ec != std::errc() || end != tag.data() + tag.size()) {
      return error_response(400, "bad-revision", "If-Match must be a revision number");
    }
    if (expected != revision_) {
      ApiResponse r = error_response(409, "revision-conflict", "project is at revision " + std::to_string(revision_));
      r.body["revision"] = revision_;
      return r;
    }
  }
  Workspace next = workspace_;
  ordered_json result = fn(next);
  next.save();
  workspace_ = std::move(next);
  ++revision_;
  ApiResponse r;
  r.body = {{"revision", revision_}, {"result", std::move(result)}};
  return r;
}

ApiResponse ApiSession::dispatch(const ApiRequest& req) {
  static const std::regex requirement_re("^/api/requirements/([a-z]+-[0-9]+)$");
  static const std::regex aabb_re("^/api/geometry/([a-z]+-[0-9]+)/aabb$");
  std::smatch m;
  const std::string& path = req.path;

  if (req.method == "OPTIONS") {
    ApiResponse r;
    r.status = 204;
    r.body = nullptr;
    r.headers["Access-Control-Allow-Methods"] = "GET, POST, PATCH, OPTIONS";
    r.headers["Access-Control-Allow-Headers"] = "Content-Type, If-Match";
    return r;
  }

  if (req.method == "GET") {
    std::shared_lock lock(mutex_);
    if (path == "/api/project") return get_project();
    if (path == "/api/dsm") return get_dsm();
    if (path == "/api/impact") return get_impact(req);
    if (path == "/api/reports/latest") {
      if (!latest_report_) return error_response(404, "no-report", "no verification has run in this session");
      ApiResponse r;
      r.body = *latest_report_;
      return r;
    }
    if (std::regex_match(path, m, requirement_re)) return get_requirement(m[1]);
    if (std::regex_match(path, m, aabb_re)) return get_aabb(m[1]);
  }

  if (req.method == "POST" && path == "/api/documents") {
    std::vector<Upload> uploads = req.uploads;
    if (uploads.empty()) {
      const json body = parse_body(req);
      uploads.push_back({"file", body.at("title").get<std::string>(), body.at("text").get<std::string>()});
    }
    const json body = req.uploads.empty() ? parse_body(req) : json::object();
    return mutate(req, [&](Workspace& ws) {
      ordered_json added = ordered_json::array();
      for (const auto& u : uploads) {
        core::DocFormat format = docpipe::format_from_path(u.filename);
        if (body.contains("format")) format = core::parse_enum<core::DocFormat>(body["format"].get<std::string>());
        const auto doc = ws.ingest_text(u.filename, u.content, format);
        added.push_back({{"uid", doc.uid.str()}, {"title", doc.title}, {"sentences", doc.sentences.size()}});
      }
      return added;
    });
  }

  if (req.method == "POST" && path == "/api/extract") {
    const json body = parse_body(req);
    const auto mode = docpipe::parse_adapter_mode(body.value("adapter", std::string("baseline")));
    std::optional<std::filesystem::path> fixture = config_.replay_fixture;
    auto adapter = docpipe::make_adapter(mode, fixture);
    return mutate(req, [&](Workspace& ws) {
      ordered_json uids = ordered_json::array();
      for (const auto& u : ws.extract(*adapter)) uids.push_back(u.str());
      return uids;
    });
  }

  if (req.method == "POST" && path == "/api/synthesize") {
    return mutate(req, [](Workspace& ws) {
      const auto s = ws.synthesize();
      ordered_json added = ordered_json::array();
      for (const auto& u : s.new_components) added.push_back(u.str());
      return ordered_json{{"new_components", added}, {"interactions", s.interactions}, {"traces_added", s.traces_added}};
    });
  }

  if (req.method == "POST" && path == "/api/edits") {
    const std::string body = req.body;
    return mutate(req, [&](Workspace& ws) {
      ordered_json applied = ordered_json::array();
      for (const auto& e : parse_edits(body, ws.model(), config_.author, default_timestamp())) {
        ws.apply(e);
        applied.push_back(ordered(synth::edit_to_json(e)));
      }
      return applied;
    });
  }

  if (req.method == "PATCH" && std::regex_match(path, m, requirement_re)) {
    const core::Uid uid = core::Uid::parse(m[1].str());
    const json body = parse_body(req);
    std::vector<synth::EditPayload> payloads;
    if (body.contains("text")) payloads.push_back(synth::op::EditRequirementText{uid, body["text"].get<std::string>()});
    if (body.contains("status")) {
      const auto status = core::parse_enum<core::ReqStatus>(body["status"].get<std::string>());
      if (status == core::ReqStatus::kAccepted) {
        payloads.push_back(synth::op::AcceptRequirement{uid});
      } else if (status == core::ReqStatus::kRejected) {
        payloads.push_back(synth::op::RejectRequirement{uid});
      } else if (status != core::ReqStatus::kModified || !body.contains("text")) {
        throw Error(Errc::kInvalidArgument, "status can only be set to Accepted or Rejected");
      }
    }
    if (payloads.empty()) throw Error(Errc::kSchema, "expected \"status\" and/or \"text\"");
    return mutate(req, [&](Workspace& ws) {
      for (auto& p : payloads) ws.apply({std::move(p), config_.author, default_timestamp()});
      const json all = store::model_to_json(ws.model())["requirements"];
      for (const auto& r : all) {
        if (r["uid"] == uid.str()) return ordered(r);
      }
      return ordered_json(nullptr);
    });
  }

  if (req.method == "POST" && path == "/api/verify") {
    const json body = parse_body(req);
    std::vector<verify::ConstraintSpec> extra;
    if (body.contains("constraints")) extra = verify::parse_constraint_file(body["constraints"].get<std::string>());
    std::shared_lock lock(mutex_);
    const auto report = workspace_.verify(config_.policy, std::move(extra));
    ordered_json j = verify::report_to_json(report, config_.policy);
    lock.unlock();
    {
      std::unique_lock w(mutex_);
      latest_report_ = j;
    }
    ApiResponse r;
    r.body = std::move(j);
    return r;
  }

  return error_response(404, "not-found", req.method + " " + path);
}

ApiResponse ApiSession::get_project() const {
  const auto& model = workspace_.model();
  ApiResponse r;
  r.body = {{"revision", revision_},
            {"path", workspace_.file().filename().string()},
            {"model_digest", store::model_digest(model)},
            {"journal_length", workspace_.project().journal().entries.size()},
            {"model", ordered(store::model_to_json(model))}};
  return r;
}

ApiResponse ApiSession::get_requirement(const std::string& uid) const {
  const core::Uid u = core::Uid::parse(uid);
  if (!workspace_.model().requirements().contains(u)) throw Error(Errc::kUnregisteredUid, "no requirement " + uid);
  const json all = store::model_to_json(workspace_.model());
  for (const auto& r : all["requirements"]) {
    if (r["uid"] == uid) {
      ApiResponse out;
      out.body = ordered(r);
      return out;
    }
  }
  throw Error(Errc::kUnregisteredUid, "no requirement " + uid);
}

ApiResponse ApiSession::get_dsm() const {
  ApiResponse r;
  r.body = ordered(synth::dsm_to_json(synth::graph_to_dsm(workspace_.model()), &workspace_.model()));
  return r;
}

ApiResponse ApiSession::get_impact(const ApiRequest& req) const {
  auto it = req.query.find("start");
  if (it == req.query.end()) throw Error(Errc::kInvalidArgument, "missing start");
  const core::Uid start = core::Uid::parse(it->second);
  std::set<core::TraceKind> kinds;
  if (auto k = req.query.find("kinds"); k != req.query.end()) {
    for (const auto& name : split_csv(k->second)) kinds.insert(core::parse_enum<core::TraceKind>(name));
  }
  core::Direction direction = core::Direction::kForward;
  if (auto d = req.query.find("direction"); d != req.query.end()) {
    direction = core::parse_enum<core::Direction>(d->second);
  }
  ordered_json uids = ordered_json::array();
  for (const auto& u : workspace_.model().impact_set(start, kinds, direction)) uids.push_back(u.str());
  ApiResponse r;
  r.body = {{"start", start.str()}, {"direction", std::string(core::to_string(direction))}, {"uids", std::move(uids)}};
  return r;
}

ApiResponse ApiSession::get_aabb(const std::string& uid) const {
  const core::Uid u = core::Uid::parse(uid);
  const auto& model = workspace_.model();
  std::vector<std::string> warnings;
  const auto index = workspace_.geometry(&warnings);
  ApiResponse r;
  if (model.components().contains(u)) {
    const auto part = index.part(model, u);
    if (!part) throw Error(Errc::kUnresolvedReference, uid + " has no linked geometry");
    r.body = {{"uid", uid}, {"unit", "mm"}, {"box", box_json(part->box)}};
    return r;
  }
  auto g = model.geometry().find(u);
  if (g == model.geometry().end()) throw Error(Errc::kUnregisteredUid, "no component or geometry " + uid);
  const geom::StepModel* step = index.file(g->second.path);
  if (!step) throw Error(Errc::kIo, g->second.path + " could not be loaded");
  ordered_json products = ordered_json::object();
  for (const auto& p : step->products) products[p.name] = box_json(geom::world_aabb(*step, p.id));
  r.body = {{"uid", uid}, {"unit", "mm"}, {"path", g->second.path}, {"products", std::move(products)}};
  return r;
}

std::pair<std::string, int> parse_bind(const std::string& text) {
  std::string host = "127.0.0.1";
  std::string port = text;
  if (auto colon = text.rfind(':'); colon != std::string::npos) {
    if (colon > 0) host = text.substr(0, colon);
    port = text.substr(colon + 1);
  } else if (text.find_first_not_of("0123456789") != std::string::npos) {
    return {text, 8080};
  }
  int value = 0;
  auto [end, ec] = std::from_chars(port.data(), port.data() + port.size(), value);
  if (port.empty() || ec != std::errc() || end != port.data() + port.size() || value < 0 || value > 65535) {
    throw Error(Errc::kInvalidArgument, "bad bind address " + text);
  }
  return {host, value};
}

}  // namespace dthread::service
