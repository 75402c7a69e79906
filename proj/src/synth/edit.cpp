#include "dthread/synth/edit.hpp"

#include <algorithm>
#include <cctype>

#include "dthread/core/error.hpp"
#include "dthread/docpipe/text.hpp"

namespace dthread::synth {

using core::Model;
using core::Uid;
using nlohmann::json;

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void check_tags(const std::set<std::string>& tags) {
  for (const auto& t : tags) {
    const bool ok = !t.empty() && std::all_of(t.begin(), t.end(), [](char c) {
      return (std::islower(static_cast<unsigned char>(c)) != 0) || (std::isdigit(static_cast<unsigned char>(c)) != 0) ||
             c == '-' || c == '_';
    });
    if (!ok) throw Error(Errc::kInvalidArgument, "function tag '" + t + "' must be a lowercase token");
  }
}

void check_state_machine(const core::StateMachineDef& sm) {
  if (sm.name.empty()) throw Error(Errc::kInvalidArgument, "state machine needs a name");
  const std::set<std::string> states(sm.states.begin(), sm.states.end());
  if (states.size() != sm.states.size() || states.empty() || states.contains("")) {
    throw Error(Errc::kInvalidArgument, "state machine states must be unique, non-empty names");
  }
  auto known = [&](const std::string& s, const char* role) {
    if (!states.contains(s)) throw Error(Errc::kInvalidArgument, std::string(role) + " state '" + s + "' is not declared");
  };
  known(sm.initial, "initial");
  for (const auto& f : sm.final_states) known(f, "final");
  std::set<std::string> vars;
  for (const auto& v : sm.variables) {
    if (v.name.empty() || !vars.insert(v.name).second) {
      throw Error(Errc::kInvalidArgument, "variable names must be unique and non-empty");
    }
    if (v.min > v.max || v.initial < v.min || v.initial > v.max) {
      throw Error(Errc::kInvalidArgument, "variable '" + v.name + "' has an empty range or out-of-range initial value");
    }
  }
  for (const auto& t : sm.transitions) {
    known(t.from, "transition source");
    known(t.to, "transition target");
    for (const auto& a : t.assigns) {
      if (!vars.contains(a.variable)) throw Error(Errc::kInvalidArgument, "assignment to undeclared '" + a.variable + "'");
    }
  }
  for (const auto& inv : sm.invariants) {
    if (inv.state != "*") known(inv.state, "invariant");
  }
}

void merge_components(Model& m, const Uid& survivor, const Uid& absorbed) {
  if (survivor == absorbed) throw Error(Errc::kInvalidArgument, "cannot merge a component with itself");
  m.component(survivor);
  const core::Component gone = m.component(absorbed);

  // interactions move to the survivor; pairs between the two vanish
  std::vector<core::Interaction> moved;
  for (const auto& i : m.interactions()) {
    if (i.a != absorbed && i.b != absorbed) continue;
    core::Interaction n = i;
    if (n.a == absorbed) n.a = survivor;
    if (n.b == absorbed) n.b = survivor;
    if (n.a == n.b) continue;
    if (!n.directed && n.b < n.a) std::swap(n.a, n.b);
    moved.push_back(std::move(n));
  }
  m.remove_interactions_of(absorbed);
  for (auto& n : moved) m.add_interaction(std::move(n));

  // active traces are re-pointed the same way
  std::vector<core::TraceEdge> touching = m.outgoing(absorbed);
  for (const auto& e : m.incoming(absorbed)) touching.push_back(e);
  for (const auto& e : touching) {
    if (!m.has_trace(e)) continue;
    m.remove_trace(e);
    core::TraceEdge n = e;
    if (n.src == absorbed) n.src = survivor;
    if (n.dst == absorbed) n.dst = survivor;
    if (n.src != n.dst && !m.has_trace(n)) m.add_trace(n.src, n.kind, n.dst);
  }

  core::Component& keep = m.component(survivor);
  keep.function_tags.insert(gone.function_tags.begin(), gone.function_tags.end());
  for (const auto& [name, q] : gone.attributes) keep.attributes.emplace(name, q);

  for (auto modality : {core::Modality::kDocument, core::Modality::kGeometry}) {
    auto loc = m.locator(absorbed, modality);
    if (loc && !m.locator(survivor, modality)) m.bind(survivor, modality, *loc);
  }
  std::vector<Uid> children;
  for (const auto& [uid, c] : m.components()) {
    if (c.parent == absorbed) children.push_back(uid);
  }
  for (const auto& child : children) m.set_parent(child, survivor);
  for (const auto& [uid, sm] : m.state_machines()) {
    if (sm.owner == absorbed) m.state_machine(uid).owner = survivor;
  }
  m.flag_traces_of(absorbed);
  m.retire(absorbed);
}

void remove_component(Model& m, const Uid& uid) {
  m.component(uid);
  for (const auto& [child, c] : m.components()) {
    if (c.parent == uid) throw Error(Errc::kConflict, uid.str() + " still has child component " + child.str());
  }
  std::vector<Uid> machines;
  for (const auto& [sm_uid, sm] : m.state_machines()) {
    if (sm.owner == uid) machines.push_back(sm_uid);
  }
  for (const auto& sm : machines) {
    m.flag_traces_of(sm);
    m.retire(sm);
  }
  m.remove_interactions_of(uid);
  m.flag_traces_of(uid);
  m.retire(uid);
}

bool cell_has(const Model& m, const Uid& row, const Uid& col, core::InteractionKind kind) {
  return std::any_of(m.interactions().begin(), m.interactions().end(), [&](const core::Interaction& i) {
    if (i.kind != kind) return false;
    if (i.a == col && i.b == row) return true;
    return !i.directed && i.a == row && i.b == col;
  });
}

void apply_payload(Model& m, const EditPayload& payload) {
  std::visit(
      Overloaded{
          [&](const op::AddComponent& p) {
            check_tags(p.function_tags);
            core::Component c;
            c.name = p.name;
            c.parent = p.parent;
            c.function_tags = p.function_tags;
            m.add_component(std::move(c));
          },
          [&](const op::RemoveComponent& p) { remove_component(m, p.uid); },
          [&](const op::RenameComponent& p) {
            m.component(p.uid);
            m.rename_component(p.uid, p.name);
          },
          [&](const op::MergeComponents& p) { merge_components(m, p.survivor, p.absorbed); },
          [&](const op::SetCell& p) {
            m.component(p.row);
            m.component(p.col);
            if (p.row == p.col) throw Error(Errc::kInvalidArgument, "DSM diagonal cells cannot be set");
            if (cell_has(m, p.row, p.col, p.kind)) {
              throw Error(Errc::kConflict, "cell (" + p.row.str() + ", " + p.col.str() + ") already holds " +
                                               std::string(to_string(p.kind)));
            }
            std::vector<Uid> rationale = p.rationale;
            std::sort(rationale.begin(), rationale.end());
            rationale.erase(std::unique(rationale.begin(), rationale.end()), rationale.end());
            m.add_interaction({p.col, p.row, p.kind, true, std::move(rationale)});
          },
          [&](const op::ClearCell& p) {
            m.component(p.row);
            m.component(p.col);
            if (!cell_has(m, p.row, p.col, p.kind) || !m.remove_directed(p.col, p.row, p.kind)) {
              throw Error(Errc::kConflict, "cell (" + p.row.str() + ", " + p.col.str() + ") does not hold " +
                                               std::string(to_string(p.kind)));
            }
          },
          [&](const op::AcceptRequirement& p) { m.requirement(p.uid).status = core::ReqStatus::kAccepted; },
          [&](const op::RejectRequirement& p) { m.requirement(p.uid).status = core::ReqStatus::kRejected; },
          [&](const op::EditRequirementText& p) {
            if (p.text.empty()) throw Error(Errc::kInvalidArgument, "requirement text must not be empty");
            auto& r = m.requirement(p.uid);
            r.text = p.text;
            r.status = core::ReqStatus::kModified;
          },
          [&](const op::AddRequirement& p) {
            if (p.text.empty()) throw Error(Errc::kInvalidArgument, "requirement text must not be empty");
            core::Requirement r;
            r.text = p.text;
            r.type = p.type;
            r.priority = p.priority;
            r.status = core::ReqStatus::kAccepted;
            m.add_requirement(std::move(r));
          },
          [&](const op::SetAttribute& p) {
            auto& c = m.component(p.uid);
            if (p.name.empty()) throw Error(Errc::kInvalidArgument, "attribute name must not be empty");
            if (!p.value) {
              c.attributes.erase(p.name);
              return;
            }
            auto dim = attribute_dimension(p.name);
            if (dim && *dim != p.value->dimension()) {
              throw Error(Errc::kUnitMismatch, "attribute '" + p.name + "' cannot carry unit " + p.value->unit);
            }
            c.attributes[p.name] = *p.value;
          },
          [&](const op::SetFunctionTags& p) {
            check_tags(p.tags);
            m.component(p.uid).function_tags = p.tags;
          },
          [&](const op::SetParent& p) { m.set_parent(p.uid, p.parent); },
          [&](const op::AddConstraint& p) {
            if (p.text.empty()) throw Error(Errc::kInvalidArgument, "constraint text must not be empty");
            m.add_constraint({Uid{}, p.text, p.origin});
          },
          [&](const op::AddStateMachine& p) {
            check_state_machine(p.machine);
            m.add_state_machine(p.machine);
          },
      },
      payload);
}

}  // namespace

std::string_view op_name(const EditPayload& payload) {
  static constexpr std::string_view names[] = {
      "AddComponent",        "RemoveComponent", "RenameComponent", "MergeComponents", "SetCell",
      "ClearCell",           "AcceptRequirement", "RejectRequirement", "EditRequirementText", "AddRequirement",
      "SetAttribute",        "SetFunctionTags", "SetParent",       "AddConstraint",   "AddStateMachine"};
  static_assert(std::size(names) == std::variant_size_v<EditPayload>);
  return names[payload.index()];
}

Model apply_edit(const Model& model, const RefinementEdit& edit) {
  Model next = model;
  apply_payload(next, edit.payload);
  return next;
}

void apply_edit_in_place(Model& model, const RefinementEdit& edit) {
  Model next = model;
  apply_payload(next, edit.payload);
  model = std::move(next);
}

// --- JSON ---------------------------------------------------------------------

json state_machine_to_json(const core::StateMachineDef& sm) {
  json vars = json::array();
  for (const auto& v : sm.variables) vars.push_back({{"name", v.name}, {"initial", v.initial}, {"min", v.min}, {"max", v.max}});
  json transitions = json::array();
  for (const auto& t : sm.transitions) {
    json assigns = json::array();
    for (const auto& a : t.assigns) assigns.push_back({{"variable", a.variable}, {"expr", a.expr}});
    transitions.push_back(
        {{"from", t.from}, {"event", t.event}, {"guard", t.guard}, {"assigns", std::move(assigns)}, {"to", t.to}});
  }
  json invariants = json::array();
  for (const auto& inv : sm.invariants) invariants.push_back({{"state", inv.state}, {"expr", inv.expr}});
  return {{"uid", sm.uid.str()},
          {"owner", sm.owner.str()},
          {"name", sm.name},
          {"states", sm.states},
          {"initial", sm.initial},
          {"final_states", sm.final_states},
          {"variables", std::move(vars)},
          {"transitions", std::move(transitions)},
          {"invariants", std::move(invariants)}};
}

namespace {

struct Reader {
  const Model* model;

  Uid uid(const json& j, const char* field) const {
    const std::string text = j.at(field).get<std::string>();
    if (!text.empty() && text[0] == '@') {
      if (model == nullptr) throw Error(Errc::kSchema, std::string(field) + ": name references need a model");
      const auto* c = model->find_component_by_name(std::string_view(text).substr(1));
      if (c == nullptr) throw Error(Errc::kUnresolvedReference, std::string(field) + ": no component named '" + text.substr(1) + "'");
      return c->uid;
    }
    return Uid::parse(text);
  }

  std::optional<Uid> opt_uid(const json& j, const char* field) const {
    if (!j.contains(field) || j.at(field).is_null()) return std::nullopt;
    return uid(j, field);
  }
};

std::set<std::string> string_set(const json& j, const char* field) {
  std::set<std::string> out;
  if (!j.contains(field)) return out;
  for (const auto& v : j.at(field)) out.insert(v.get<std::string>());
  return out;
}

core::StateMachineDef read_state_machine(const json& j, const Reader& r) {
  core::StateMachineDef sm;
  if (j.contains("uid") && !j.at("uid").get<std::string>().empty()) sm.uid = Uid::parse(j.at("uid").get<std::string>());
  sm.owner = r.uid(j, "owner");
  sm.name = j.at("name").get<std::string>();
  sm.states = j.at("states").get<std::vector<std::string>>();
  sm.initial = j.at("initial").get<std::string>();
  if (j.contains("final_states")) sm.final_states = j.at("final_states").get<std::vector<std::string>>();
  if (j.contains("variables")) {
    for (const auto& v : j.at("variables")) {
      sm.variables.push_back({v.at("name").get<std::string>(), v.at("initial").get<std::int64_t>(),
                              v.at("min").get<std::int64_t>(), v.at("max").get<std::int64_t>()});
    }
  }
  if (j.contains("transitions")) {
    for (const auto& t : j.at("transitions")) {
      core::TransitionDef td;
      td.from = t.at("from").get<std::string>();
      td.event = t.value("event", std::string());
      td.guard = t.value("guard", std::string());
      if (t.contains("assigns")) {
        for (const auto& a : t.at("assigns")) td.assigns.push_back({a.at("variable").get<std::string>(), a.at("expr").get<std::string>()});
      }
      td.to = t.at("to").get<std::string>();
      sm.transitions.push_back(std::move(td));
    }
  }
  if (j.contains("invariants")) {
    for (const auto& inv : j.at("invariants")) sm.invariants.push_back({inv.at("state").get<std::string>(), inv.at("expr").get<std::string>()});
  }
  return sm;
}

}  // namespace

core::StateMachineDef state_machine_from_json(const json& j) {
  try {
    return read_state_machine(j, Reader{nullptr});
  } catch (const json::exception& e) {
    throw Error(Errc::kSchema, std::string("malformed state machine: ") + e.what());
  }
}

json edit_to_json(const RefinementEdit& edit) {
  json j = {{"op", std::string(op_name(edit.payload))}, {"author", edit.author}, {"timestamp", edit.timestamp}};
  auto opt = [](const std::optional<Uid>& u) { return u ? json(u->str()) : json(nullptr); };
  auto uids = [](const std::vector<Uid>& v) {
    json a = json::array();
    for (const auto& u : v) a.push_back(u.str());
    return a;
  };
  std::visit(Overloaded{
                 [&](const op::AddComponent& p) {
                   j["name"] = p.name;
                   j["parent"] = opt(p.parent);
                   j["function_tags"] = p.function_tags;
                 },
                 [&](const op::RemoveComponent& p) { j["uid"] = p.uid.str(); },
                 [&](const op::RenameComponent& p) {
                   j["uid"] = p.uid.str();
                   j["name"] = p.name;
                 },
                 [&](const op::MergeComponents& p) {
                   j["survivor"] = p.survivor.str();
                   j["absorbed"] = p.absorbed.str();
                 },
                 [&](const op::SetCell& p) {
                   j["row"] = p.row.str();
                   j["col"] = p.col.str();
                   j["kind"] = std::string(to_string(p.kind));
                   j["rationale"] = uids(p.rationale);
                 },
                 [&](const op::ClearCell& p) {
                   j["row"] = p.row.str();
                   j["col"] = p.col.str();
                   j["kind"] = std::string(to_string(p.kind));
                 },
                 [&](const op::AcceptRequirement& p) { j["uid"] = p.uid.str(); },
                 [&](const op::RejectRequirement& p) { j["uid"] = p.uid.str(); },
                 [&](const op::EditRequirementText& p) {
                   j["uid"] = p.uid.str();
                   j["text"] = p.text;
                 },
                 [&](const op::AddRequirement& p) {
                   j["text"] = p.text;
                   j["type"] = std::string(to_string(p.type));
                   j["priority"] = std::string(to_string(p.priority));
                 },
                 [&](const op::SetAttribute& p) {
                   j["uid"] = p.uid.str();
                   j["name"] = p.name;
                   j["value"] = p.value ? json(p.value->to_string()) : json(nullptr);
                 },
                 [&](const op::SetFunctionTags& p) {
                   j["uid"] = p.uid.str();
                   j["tags"] = p.tags;
                 },
                 [&](const op::SetParent& p) {
                   j["uid"] = p.uid.str();
                   j["parent"] = opt(p.parent);
                 },
                 [&](const op::AddConstraint& p) {
                   j["text"] = p.text;
                   j["origin"] = opt(p.origin);
                 },
                 [&](const op::AddStateMachine& p) {
                   json sm = state_machine_to_json(p.machine);
                   sm.erase("uid");
                   j["machine"] = std::move(sm);
                 },
             },
             edit.payload);
  return j;
}

RefinementEdit edit_from_json(const json& j, const Model* model, const std::string& default_author,
                              std::int64_t default_timestamp) {
  const Reader r{model};
  try {
    RefinementEdit edit;
    edit.author = j.contains("author") ? j.at("author").get<std::string>() : default_author;
    edit.timestamp = j.contains("timestamp") ? j.at("timestamp").get<std::int64_t>() : default_timestamp;
    const std::string name = j.at("op").get<std::string>();
    const std::string key = docpipe::to_lower(name);
    auto kind = [&] { return core::parse_enum<core::InteractionKind>(j.at("kind").get<std::string>()); };
    if (key == "addcomponent") {
      edit.payload = op::AddComponent{j.at("name").get<std::string>(), r.opt_uid(j, "parent"), string_set(j, "function_tags")};
    } else if (key == "removecomponent") {
      edit.payload = op::RemoveComponent{r.uid(j, "uid")};
    } else if (key == "renamecomponent") {
      edit.payload = op::RenameComponent{r.uid(j, "uid"), j.at("name").get<std::string>()};
    } else if (key == "mergecomponents") {
      edit.payload = op::MergeComponents{r.uid(j, "survivor"), r.uid(j, "absorbed")};
    } else if (key == "setcell") {
      op::SetCell p{r.uid(j, "row"), r.uid(j, "col"), kind(), {}};
      if (j.contains("rationale")) {
        for (const auto& u : j.at("rationale")) p.rationale.push_back(Uid::parse(u.get<std::string>()));
      }
      edit.payload = std::move(p);
    } else if (key == "clearcell") {
      edit.payload = op::ClearCell{r.uid(j, "row"), r.uid(j, "col"), kind()};
    } else if (key == "acceptrequirement") {
      edit.payload = op::AcceptRequirement{r.uid(j, "uid")};
    } else if (key == "rejectrequirement") {
      edit.payload = op::RejectRequirement{r.uid(j, "uid")};
    } else if (key == "editrequirementtext") {
      edit.payload = op::EditRequirementText{r.uid(j, "uid"), j.at("text").get<std::string>()};
    } else if (key == "addrequirement") {
      op::AddRequirement p;
      p.text = j.at("text").get<std::string>();
      if (j.contains("type")) p.type = core::parse_enum<core::ReqType>(j.at("type").get<std::string>());
      if (j.contains("priority")) p.priority = core::parse_enum<core::Priority>(j.at("priority").get<std::string>());
      edit.payload = std::move(p);
    } else if (key == "setattribute") {
      std::optional<Quantity> value;
      if (j.contains("value") && !j.at("value").is_null()) value = Quantity::parse(j.at("value").get<std::string>());
      edit.payload = op::SetAttribute{r.uid(j, "uid"), j.at("name").get<std::string>(), value};
    } else if (key == "setfunctiontags") {
      edit.payload = op::SetFunctionTags{r.uid(j, "uid"), string_set(j, "tags")};
    } else if (key == "setparent") {
      edit.payload = op::SetParent{r.uid(j, "uid"), r.opt_uid(j, "parent")};
    } else if (key == "addconstraint") {
      edit.payload = op::AddConstraint{j.at("text").get<std::string>(), r.opt_uid(j, "origin")};
    } else if (key == "addstatemachine") {
      edit.payload = op::AddStateMachine{read_state_machine(j.at("machine"), r)};
    } else {
      throw Error(Errc::kSchema, "unknown edit op '" + name + "'");
    }
    return edit;
  } catch (const json::exception& e) {
    throw Error(Errc::kSchema, std::string("malformed edit: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == Errc::kSchema || e.code() == Errc::kUnresolvedReference) throw;
    throw Error(Errc::kSchema, std::string("malformed edit: ") + e.what());
  }
}

}  // namespace dthread::synth
