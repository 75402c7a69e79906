#include "dthread/store/project_file.hpp"

#include <fstream>
#include <sstream>
#include <unistd.h>

#include "dthread/core/digest.hpp"
#include "dthread/core/error.hpp"

namespace dthread::store {
namespace {

using nlohmann::json;
using namespace core;

json uid_or_null(const std::optional<Uid>& u) { return u ? json(u->str()) : json(nullptr); }

json uid_list(const auto& uids) {
  json out = json::array();
  for (const auto& u : uids) out.push_back(u.str());
  return out;
}

json trace_json(const TraceEdge& e) { return {{"src", e.src.str()}, {"kind", to_string(e.kind)}, {"dst", e.dst.str()}}; }

// --- reading with JSON-pointer diagnostics ---------------------------------

std::string escape_pointer(std::string_view key) {
  std::string out;
  for (char c : key) {
    if (c == '~') {
      out += "~0";
    } else if (c == '/') {
      out += "~1";
    } else {
      out += c;
    }
  }
  return out;
}

[[noreturn]] void schema_error(const std::string& pointer, const std::string& what) {
  throw Error(Errc::kSchema, (pointer.empty() ? std::string("/") : pointer) + ": " + what);
}

const json& field(const json& obj, std::string_view key, const std::string& ptr) {
  if (!obj.is_object()) schema_error(ptr, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) schema_error(ptr + "/" + escape_pointer(key), "missing");
  return *it;
}

std::string sub(const std::string& ptr, std::string_view key) { return ptr + "/" + escape_pointer(key); }
std::string sub(const std::string& ptr, std::size_t i) { return ptr + "/" + std::to_string(i); }

std::string str(const json& obj, std::string_view key, const std::string& ptr) {
  const json& v = field(obj, key, ptr);
  if (!v.is_string()) schema_error(sub(ptr, key), "expected a string");
  return v.get<std::string>();
}

const json& arr(const json& obj, std::string_view key, const std::string& ptr) {
  const json& v = field(obj, key, ptr);
  if (!v.is_array()) schema_error(sub(ptr, key), "expected an array");
  return v;
}

bool boolean(const json& obj, std::string_view key, const std::string& ptr) {
  const json& v = field(obj, key, ptr);
  if (!v.is_boolean()) schema_error(sub(ptr, key), "expected a boolean");
  return v.get<bool>();
}

std::uint64_t unsigned_int(const json& v, const std::string& ptr) {
  if (!v.is_number_unsigned()) schema_error(ptr, "expected a non-negative integer");
  return v.get<std::uint64_t>();
}

// Re-throws core parse failures at the given pointer.
template <typename Fn>
auto at(const std::string& ptr, Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    if (e.code() == Errc::kSchema && std::string_view(e.what()).starts_with("/")) throw;
    schema_error(ptr, e.what());
  } catch (const json::exception& e) {
    schema_error(ptr, e.what());
  }
}

Uid uid_at(const json& obj, std::string_view key, const std::string& ptr) {
  const std::string text = str(obj, key, ptr);
  return at(sub(ptr, key), [&] { return Uid::parse(text); });
}

std::optional<Uid> optional_uid(const json& obj, std::string_view key, const std::string& ptr) {
  const json& v = field(obj, key, ptr);
  if (v.is_null()) return std::nullopt;
  return uid_at(obj, key, ptr);
}

template <typename Enum>
Enum enum_at(const json& obj, std::string_view key, const std::string& ptr) {
  const std::string text = str(obj, key, ptr);
  return at(sub(ptr, key), [&] { return parse_enum<Enum>(text); });
}

TraceEdge trace_from(const json& e, const std::string& ptr) {
  return {uid_at(e, "src", ptr), enum_at<TraceKind>(e, "kind", ptr), uid_at(e, "dst", ptr)};
}

json journal_to_json(const synth::Journal& journal) {
  json entries = json::array();
  for (const auto& e : journal.entries) {
    if (const auto* c = std::get_if<synth::Checkpoint>(&e)) {
      entries.push_back({{"checkpoint", c->stage}});
    } else {
      entries.push_back({{"edit", synth::edit_to_json(std::get<synth::RefinementEdit>(e))}});
    }
  }
  return {{"entries", entries}, {"snapshot", model_to_json(journal.snapshot)}};
}

synth::Journal journal_from_json(const json& j, const std::string& ptr) {
  synth::Journal journal;
  const json& entries = arr(j, "entries", ptr);
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const std::string p = sub(sub(ptr, "entries"), i);
    const json& e = entries[i];
    if (!e.is_object() || e.size() != 1) schema_error(p, "expected {\"checkpoint\": ...} or {\"edit\": ...}");
    if (e.contains("checkpoint")) {
      journal.entries.emplace_back(synth::Checkpoint{str(e, "checkpoint", p)});
    } else {
      const json& edit = field(e, "edit", p);
      journal.entries.emplace_back(at(sub(p, "edit"), [&] { return synth::edit_from_json(edit); }));
    }
  }
  journal.snapshot = model_from_json(field(j, "snapshot", ptr), sub(ptr, "snapshot"));
  return journal;
}

json body_of(const synth::Project& project) {
  json j = model_to_json(project.model());
  j["format"] = kFormatName;
  j["version"] = kFormatVersion;
  j["journal"] = journal_to_json(project.journal());
  return j;
}

std::string canonical(const json& j) { return j.dump(2, ' ', false, json::error_handler_t::strict) + "\n"; }

}  // namespace

json model_to_json(const Model& m) {
  json j;
  json serials = json::object();
  for (const auto& [ns, next] : m.next_serials()) serials[ns] = next;
  j["uids"] = {{"next_serial", serials}, {"live", uid_list(m.live_uids())}, {"retired", uid_list(m.retired_uids())}};

  json bindings = json::array();
  for (const auto& b : m.all_bindings()) {
    bindings.push_back({{"uid", b.uid.str()}, {"modality", to_string(b.modality)}, {"locator", b.locator}});
  }
  j["bindings"] = bindings;

  json components = json::array();
  for (const auto& [uid, c] : m.components()) {
    json attrs = json::object();
    for (const auto& [name, q] : c.attributes) attrs[name] = q.to_string();
    components.push_back({{"uid", uid.str()},
                          {"name", c.name},
                          {"function_tags", c.function_tags},
                          {"attributes", attrs},
                          {"parent", uid_or_null(c.parent)}});
  }
  j["components"] = components;

  json requirements = json::array();
  for (const auto& [uid, r] : m.requirements()) {
    json source = nullptr;
    if (r.source) source = {{"doc", r.source->doc.str()}, {"start", r.source->span.start}, {"end", r.source->span.end}};
    requirements.push_back({{"uid", uid.str()},
                            {"text", r.text},
                            {"type", to_string(r.type)},
                            {"priority", to_string(r.priority)},
                            {"status", to_string(r.status)},
                            {"source", source},
                            {"custom", r.custom}});
  }
  j["requirements"] = requirements;

  json documents = json::array();
  for (const auto& [uid, d] : m.documents()) {
    json sentences = json::array();
    for (const auto& s : d.sentences) sentences.push_back({s.start, s.end});
    documents.push_back({{"uid", uid.str()},
                         {"title", d.title},
                         {"format", to_string(d.format)},
                         {"text", d.text},
                         {"sentences", sentences}});
  }
  j["documents"] = documents;

  json geometry = json::array();
  for (const auto& [uid, g] : m.geometry()) {
    geometry.push_back({{"uid", uid.str()}, {"path", g.path}, {"digest", g.digest}, {"products", g.products}});
  }
  j["geometry"] = geometry;

  json interactions = json::array();
  for (const auto& i : m.interactions()) {
    interactions.push_back({{"a", i.a.str()},
                            {"b", i.b.str()},
                            {"kind", to_string(i.kind)},
                            {"directed", i.directed},
                            {"rationale", uid_list(i.rationale)}});
  }
  json traces = json::array();
  for (const auto& e : m.traces()) traces.push_back(trace_json(e));
  json flagged = json::array();
  for (const auto& e : m.flagged_traces()) flagged.push_back(trace_json(e));
  j["edges"] = {{"interactions", interactions}, {"traces", traces}, {"flagged", flagged}};

  json constraints = json::array();
  for (const auto& [uid, c] : m.constraints()) {
    constraints.push_back({{"uid", uid.str()}, {"text", c.text}, {"origin", uid_or_null(c.origin)}});
  }
  j["constraints"] = constraints;

  json machines = json::array();
  for (const auto& [uid, sm] : m.state_machines()) machines.push_back(synth::state_machine_to_json(sm));
  j["state_machines"] = machines;
  return j;
}

Model model_from_json(const json& j, const std::string& ptr) {
  if (!j.is_object()) schema_error(ptr, "expected an object");
  Model::RawState raw;

  const json& uids = field(j, "uids", ptr);
  const std::string up = sub(ptr, "uids");
  const json& serials = field(uids, "next_serial", up);
  if (!serials.is_object()) schema_error(sub(up, "next_serial"), "expected an object");
  for (const auto& [ns, v] : serials.items()) raw.next_serial[ns] = unsigned_int(v, sub(sub(up, "next_serial"), ns));
  for (const char* key : {"live", "retired"}) {
    const json& list = arr(uids, key, up);
    auto& target = std::string_view(key) == "live" ? raw.live : raw.retired;
    for (std::size_t i = 0; i < list.size(); ++i) {
      const std::string p = sub(sub(up, key), i);
      if (!list[i].is_string()) schema_error(p, "expected a uid string");
      target.insert(at(p, [&] { return Uid::parse(list[i].get<std::string>()); }));
    }
  }

  const json& bindings = arr(j, "bindings", ptr);
  for (std::size_t i = 0; i < bindings.size(); ++i) {
    const std::string p = sub(sub(ptr, "bindings"), i);
    raw.bindings.push_back(
        {uid_at(bindings[i], "uid", p), enum_at<Modality>(bindings[i], "modality", p), str(bindings[i], "locator", p)});
  }

  const json& components = arr(j, "components", ptr);
  for (std::size_t i = 0; i < components.size(); ++i) {
    const std::string p = sub(sub(ptr, "components"), i);
    const json& c = components[i];
    Component comp;
    comp.uid = uid_at(c, "uid", p);
    comp.name = str(c, "name", p);
    const json& tags = arr(c, "function_tags", p);
    for (std::size_t t = 0; t < tags.size(); ++t) {
      if (!tags[t].is_string()) schema_error(sub(sub(p, "function_tags"), t), "expected a string");
      comp.function_tags.insert(tags[t].get<std::string>());
    }
    const json& attrs = field(c, "attributes", p);
    if (!attrs.is_object()) schema_error(sub(p, "attributes"), "expected an object");
    for (const auto& [name, q] : attrs.items()) {
      const std::string ap = sub(sub(p, "attributes"), name);
      if (!q.is_string()) schema_error(ap, "expected a quantity string");
      comp.attributes[name] = at(ap, [&] { return Quantity::parse(q.get<std::string>()); });
    }
    comp.parent = optional_uid(c, "parent", p);
    raw.components.emplace(comp.uid, std::move(comp));
  }

  const json& requirements = arr(j, "requirements", ptr);
  for (std::size_t i = 0; i < requirements.size(); ++i) {
    const std::string p = sub(sub(ptr, "requirements"), i);
    const json& r = requirements[i];
    Requirement req;
    req.uid = uid_at(r, "uid", p);
    req.text = str(r, "text", p);
    req.type = enum_at<ReqType>(r, "type", p);
    req.priority = enum_at<Priority>(r, "priority", p);
    req.status = enum_at<ReqStatus>(r, "status", p);
    const json& source = field(r, "source", p);
    if (!source.is_null()) {
      const std::string sp = sub(p, "source");
      req.source = SourceRef{uid_at(source, "doc", sp),
                             Span{unsigned_int(field(source, "start", sp), sub(sp, "start")),
                                  unsigned_int(field(source, "end", sp), sub(sp, "end"))}};
    }
    const json& custom = field(r, "custom", p);
    if (!custom.is_object()) schema_error(sub(p, "custom"), "expected an object");
    for (const auto& [k, v] : custom.items()) {
      if (!v.is_string()) schema_error(sub(sub(p, "custom"), k), "expected a string");
      req.custom[k] = v.get<std::string>();
    }
    raw.requirements.emplace(req.uid, std::move(req));
  }

  const json& documents = arr(j, "documents", ptr);
  for (std::size_t i = 0; i < documents.size(); ++i) {
    const std::string p = sub(sub(ptr, "documents"), i);
    const json& d = documents[i];
    DocumentArtifact doc;
    doc.uid = uid_at(d, "uid", p);
    doc.title = str(d, "title", p);
    doc.format = enum_at<DocFormat>(d, "format", p);
    doc.text = str(d, "text", p);
    const json& sentences = arr(d, "sentences", p);
    for (std::size_t s = 0; s < sentences.size(); ++s) {
      const std::string sp = sub(sub(p, "sentences"), s);
      if (!sentences[s].is_array() || sentences[s].size() != 2) schema_error(sp, "expected [start, end]");
      doc.sentences.push_back({unsigned_int(sentences[s][0], sub(sp, 0)), unsigned_int(sentences[s][1], sub(sp, 1))});
    }
    raw.documents.emplace(doc.uid, std::move(doc));
  }

  const json& geometry = arr(j, "geometry", ptr);
  for (std::size_t i = 0; i < geometry.size(); ++i) {
    const std::string p = sub(sub(ptr, "geometry"), i);
    const json& g = geometry[i];
    GeometryArtifact art;
    art.uid = uid_at(g, "uid", p);
    art.path = str(g, "path", p);
    art.digest = str(g, "digest", p);
    const json& products = arr(g, "products", p);
    for (std::size_t k = 0; k < products.size(); ++k) {
      if (!products[k].is_string()) schema_error(sub(sub(p, "products"), k), "expected a string");
      art.products.push_back(products[k].get<std::string>());
    }
    raw.geometry.emplace(art.uid, std::move(art));
  }

  const json& edges = field(j, "edges", ptr);
  const std::string ep = sub(ptr, "edges");
  const json& interactions = arr(edges, "interactions", ep);
  for (std::size_t i = 0; i < interactions.size(); ++i) {
    const std::string p = sub(sub(ep, "interactions"), i);
    const json& in = interactions[i];
    Interaction x;
    x.a = uid_at(in, "a", p);
    x.b = uid_at(in, "b", p);
    x.kind = enum_at<InteractionKind>(in, "kind", p);
    x.directed = boolean(in, "directed", p);
    const json& rationale = arr(in, "rationale", p);
    for (std::size_t k = 0; k < rationale.size(); ++k) {
      const std::string rp = sub(sub(p, "rationale"), k);
      if (!rationale[k].is_string()) schema_error(rp, "expected a uid string");
      x.rationale.push_back(at(rp, [&] { return Uid::parse(rationale[k].get<std::string>()); }));
    }
    raw.interactions.push_back(std::move(x));
  }
  for (const char* key : {"traces", "flagged"}) {
    const json& list = arr(edges, key, ep);
    auto& target = std::string_view(key) == "traces" ? raw.edges : raw.flagged;
    for (std::size_t i = 0; i < list.size(); ++i) target.insert(trace_from(list[i], sub(sub(ep, key), i)));
  }

  const json& constraints = arr(j, "constraints", ptr);
  for (std::size_t i = 0; i < constraints.size(); ++i) {
    const std::string p = sub(sub(ptr, "constraints"), i);
    ConstraintRecord c{uid_at(constraints[i], "uid", p), str(constraints[i], "text", p),
                       optional_uid(constraints[i], "origin", p)};
    raw.constraints.emplace(c.uid, std::move(c));
  }

  const json& machines = arr(j, "state_machines", ptr);
  for (std::size_t i = 0; i < machines.size(); ++i) {
    const std::string p = sub(sub(ptr, "state_machines"), i);
    auto sm = at(p, [&] { return synth::state_machine_from_json(machines[i]); });
    raw.machines.emplace(sm.uid, std::move(sm));
  }
  return at(ptr, [&] { return Model::restore(std::move(raw)); });
}

std::string model_digest(const Model& model) { return sha256_hex(canonical(model_to_json(model))); }

std::string serialize_project(const synth::Project& project) {
  json j = body_of(project);
  j["digest"] = sha256_hex(canonical(j));
  return canonical(j);
}

synth::Project parse_project(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(Errc::kSchema, std::string("/: not valid JSON (") + e.what() + ")");
  }
  if (!j.is_object()) schema_error("", "expected an object");
  const json& version = field(j, "version", "");
  if (!version.is_number_integer()) schema_error("/version", "expected an integer");
  if (version.get<std::int64_t>() != kFormatVersion) {
    throw Error(Errc::kUnknownVersion, "project format version " + version.dump() + " is not supported (expected " +
                                           std::to_string(kFormatVersion) + ")");
  }
  if (str(j, "format", "") != kFormatName) schema_error("/format", "expected \"" + std::string(kFormatName) + "\"");
  const std::string digest = str(j, "digest", "");
  json body = j;
  body.erase("digest");
  if (sha256_hex(canonical(body)) != digest) {
    throw Error(Errc::kIntegrity, "/digest: content does not match the recorded digest");
  }
  Model model = model_from_json(j, "");
  synth::Journal journal = journal_from_json(field(j, "journal", ""), "/journal");
  Model replayed = at("/journal", [&] { return synth::replay(journal); });
  if (!(replayed == model)) throw Error(Errc::kIntegrity, "/journal: replaying the journal does not give the stored state");
  return synth::Project(std::move(model), std::move(journal));
}

std::string describe_integrity(const IntegrityReport& report) {
  std::ostringstream out;
  for (const auto& b : report.dangling_bindings) {
    out << "dangling binding: " << b.uid.str() << " " << to_string(b.modality) << " '" << b.locator << "'\n";
  }
  for (const auto& e : report.dangling_edges) {
    out << "dangling edge: " << e.src.str() << " " << to_string(e.kind) << " " << e.dst.str() << "\n";
  }
  for (const auto& u : report.orphan_uids) out << "orphan uid: " << u.str() << "\n";
  return out.str();
}

std::string save_project(const synth::Project& project, const std::filesystem::path& path, bool force) {
  const auto report = project.model().validate_integrity();
  if (!force && !report.empty()) {
    throw Error(Errc::kIntegrity, "refusing to save " + path.string() + ":\n" + describe_integrity(report));
  }
  const std::string text = serialize_project(project);
  auto tmp = path;
  tmp += ".tmp-" + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::kIo, "cannot write " + tmp.string());
    out << text;
    out.flush();
    if (!out) {
      std::filesystem::remove(tmp);
      throw Error(Errc::kIo, "short write to " + tmp.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw Error(Errc::kIo, "cannot replace " + path.string() + ": " + ec.message());
  }
  return json::parse(text)["digest"].get<std::string>();
}

synth::Project load_project(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::kIo, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_project(buf.str());
}

}  // namespace dthread::store
