#include "dthread/core/model.hpp"

#include <algorithm>
#include <cctype>
#include <deque>
#include <tuple>

#include "dthread/core/error.hpp"
#include "dthread/core/interaction_set.hpp"

namespace dthread::core {
namespace {

std::string lower(std::string_view text) {
  std::string out(text);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::optional<std::pair<Uid, std::optional<Span>>> parse_document_locator(std::string_view locator) {
  try {
    const auto hash = locator.find('#');
    Uid doc = Uid::parse(locator.substr(0, hash));
    if (hash == std::string_view::npos) return std::pair{doc, std::optional<Span>{}};
    const auto range = locator.substr(hash + 1);
    const auto dash = range.find('-');
    if (dash == std::string_view::npos) return std::nullopt;
    Span span{std::stoull(std::string(range.substr(0, dash))), std::stoull(std::string(range.substr(dash + 1)))};
    return std::pair{doc, std::optional<Span>{span}};
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

}  // namespace

std::string document_locator(const Uid& doc, std::optional<Span> span) {
  std::string out = doc.str();
  if (span) out += "#" + std::to_string(span->start) + "-" + std::to_string(span->end);
  return out;
}

std::string product_locator(std::string_view file, std::string_view product) {
  return std::string(file) + "#PRODUCT'" + std::string(product) + "'";
}

std::optional<ProductLocator> parse_product_locator(std::string_view locator) {
  const auto hash = locator.find('#');
  if (hash == std::string_view::npos) {
    if (locator.empty()) return std::nullopt;
    return ProductLocator{std::string(locator), {}};
  }
  constexpr std::string_view kPrefix = "PRODUCT'";
  auto rest = locator.substr(hash + 1);
  if (hash == 0 || rest.substr(0, kPrefix.size()) != kPrefix || rest.size() < kPrefix.size() + 1 || rest.back() != '\'') {
    return std::nullopt;
  }
  return ProductLocator{std::string(locator.substr(0, hash)),
                        std::string(rest.substr(kPrefix.size(), rest.size() - kPrefix.size() - 1))};
}

// --- UID registry -------------------------------------------------------------

Uid Model::register_uid(std::string_view ns) {
  if (!is_known_namespace(ns)) throw Error(Errc::kUnknownNamespace, "unknown uid namespace '" + std::string(ns) + "'");
  auto& next = next_serial_[std::string(ns)];
  Uid uid{std::string(ns), next++};
  live_.insert(uid);
  return uid;
}

void Model::require_live(const Uid& uid) const {
  if (!live_.contains(uid)) throw Error(Errc::kUnregisteredUid, "unregistered uid " + uid.str());
}

void Model::retire(const Uid& uid) {
  require_live(uid);
  for (const auto& [child, c] : components_) {
    if (c.parent == uid) {
      throw Error(Errc::kInvalidArgument, uid.str() + " still has child component " + child.str());
    }
  }
  components_.erase(uid);
  requirements_.erase(uid);
  documents_.erase(uid);
  geometry_.erase(uid);
  constraints_.erase(uid);
  machines_.erase(uid);
  bindings_.erase(uid);
  remove_interactions_of(uid);
  for (auto& i : interactions_) std::erase(i.rationale, uid);
  live_.erase(uid);
  retired_.insert(uid);
}

// --- multimodal index ---------------------------------------------------------

ModalityBinding Model::bind(const Uid& uid, Modality modality, std::string locator) {
  require_live(uid);
  auto& slots = bindings_[uid];
  if (slots.contains(modality)) {
    throw Error(Errc::kDuplicateBinding,
                "uid " + uid.str() + " already has a " + std::string(to_string(modality)) + " binding");
  }
  slots.emplace(modality, locator);
  return ModalityBinding{uid, modality, std::move(locator)};
}

void Model::unbind(const Uid& uid, Modality modality) {
  require_live(uid);
  auto it = bindings_.find(uid);
  if (it == bindings_.end() || it->second.erase(modality) == 0) {
    throw Error(Errc::kInvalidArgument, "uid " + uid.str() + " has no " + std::string(to_string(modality)) + " binding");
  }
  if (it->second.empty()) bindings_.erase(it);
}

std::optional<std::string> Model::locator(const Uid& uid, Modality modality) const {
  auto it = bindings_.find(uid);
  if (it == bindings_.end()) return std::nullopt;
  auto slot = it->second.find(modality);
  if (slot == it->second.end()) return std::nullopt;
  return slot->second;
}

std::vector<ModalityBinding> Model::all_bindings() const {
  std::vector<ModalityBinding> out;
  for (const auto& [uid, slots] : bindings_) {
    for (const auto& [modality, loc] : slots) out.push_back({uid, modality, loc});
  }
  return out;
}

Resolution Model::resolve(const Uid& uid) const {
  require_live(uid);
  Resolution r;
  r.uid = uid;
  if (auto it = bindings_.find(uid); it != bindings_.end()) {
    for (const auto& [modality, loc] : it->second) r.bindings.push_back({uid, modality, loc});
  }
  if (auto it = components_.find(uid); it != components_.end()) r.node = it->second;
  else if (auto it = requirements_.find(uid); it != requirements_.end()) r.node = it->second;
  else if (auto it = documents_.find(uid); it != documents_.end()) r.node = it->second;
  else if (auto it = geometry_.find(uid); it != geometry_.end()) r.node = it->second;
  else if (auto it = constraints_.find(uid); it != constraints_.end()) r.node = it->second;
  else if (auto it = machines_.find(uid); it != machines_.end()) r.node = it->second;
  return r;
}

bool Model::has_node(const Uid& uid) const {
  return components_.contains(uid) || requirements_.contains(uid) || documents_.contains(uid) ||
         geometry_.contains(uid) || constraints_.contains(uid) || machines_.contains(uid);
}

bool Model::locator_resolves(const ModalityBinding& binding) const {
  switch (binding.modality) {
    case Modality::kDocument: {
      auto parsed = parse_document_locator(binding.locator);
      if (!parsed) return false;
      auto doc = documents_.find(parsed->first);
      if (doc == documents_.end()) return false;
      if (!parsed->second) return true;
      const Span s = *parsed->second;
      return s.start < s.end && s.end <= doc->second.text.size();
    }
    case Modality::kGeometry: {
      auto parsed = parse_product_locator(binding.locator);
      if (!parsed) return false;
      for (const auto& [_, g] : geometry_) {
        if (g.path != parsed->file) continue;
        if (parsed->product.empty()) return true;
        return std::find(g.products.begin(), g.products.end(), parsed->product) != g.products.end();
      }
      return false;
    }
    case Modality::kGraph: {
      try {
        return has_node(Uid::parse(binding.locator));
      } catch (const Error&) {
        return false;
      }
    }
  }
  return false;
}

// --- trace graph --------------------------------------------------------------

const TraceEdge& Model::add_trace(const Uid& src, TraceKind kind, const Uid& dst) {
  for (const Uid* end : {&src, &dst}) {
    if (!live_.contains(*end)) throw Error(Errc::kDanglingEndpoint, "trace endpoint " + end->str() + " is not registered");
  }
  TraceEdge edge{src, kind, dst};
  auto [it, inserted] = edges_.insert(edge);
  if (!inserted) {
    throw Error(Errc::kDuplicateEdge,
                "trace " + src.str() + " " + std::string(to_string(kind)) + " " + dst.str() + " already exists");
  }
  flagged_.erase(edge);
  out_[src].insert(edge);
  in_[dst].insert(edge);
  return *it;
}

void Model::remove_trace(const TraceEdge& edge) {
  if (edges_.erase(edge) == 0) throw Error(Errc::kInvalidArgument, "no such trace edge");
  out_[edge.src].erase(edge);
  if (out_[edge.src].empty()) out_.erase(edge.src);
  in_[edge.dst].erase(edge);
  if (in_[edge.dst].empty()) in_.erase(edge.dst);
}

std::vector<TraceEdge> Model::outgoing(const Uid& uid) const {
  auto it = out_.find(uid);
  if (it == out_.end()) return {};
  return {it->second.begin(), it->second.end()};
}

std::vector<TraceEdge> Model::incoming(const Uid& uid) const {
  auto it = in_.find(uid);
  if (it == in_.end()) return {};
  return {it->second.begin(), it->second.end()};
}

void Model::flag_traces_of(const Uid& uid) {
  std::vector<TraceEdge> touching;
  for (const auto& e : edges_) {
    if (e.src == uid || e.dst == uid) touching.push_back(e);
  }
  for (const auto& e : touching) {
    remove_trace(e);
    flagged_.insert(e);
  }
}

std::set<Uid> Model::impact_set(const Uid& start, const std::set<TraceKind>& kinds, Direction direction) const {
  require_live(start);
  std::set<Uid> seen{start};
  std::deque<Uid> frontier{start};
  while (!frontier.empty()) {
    const Uid current = frontier.front();
    frontier.pop_front();
    auto visit = [&](const std::map<Uid, std::set<TraceEdge>>& adjacency, bool forward) {
      auto it = adjacency.find(current);
      if (it == adjacency.end()) return;
      for (const auto& e : it->second) {
        if (!kinds.contains(e.kind)) continue;
        const Uid& next = forward ? e.dst : e.src;
        if (seen.insert(next).second) frontier.push_back(next);
      }
    };
    if (direction != Direction::kBackward) visit(out_, true);
    if (direction != Direction::kForward) visit(in_, false);
  }
  seen.erase(start);
  return seen;
}

IntegrityReport Model::validate_integrity() const {
  IntegrityReport report;
  for (const auto& [uid, slots] : bindings_) {
    for (const auto& [modality, loc] : slots) {
      ModalityBinding b{uid, modality, loc};
      if (!locator_resolves(b)) report.dangling_bindings.push_back(std::move(b));
    }
  }
  for (const auto& e : edges_) {
    if (!live_.contains(e.src) || !live_.contains(e.dst)) report.dangling_edges.push_back(e);
  }
  for (const auto& uid : live_) {
    auto it = bindings_.find(uid);
    if (it == bindings_.end() || it->second.empty()) report.orphan_uids.push_back(uid);
  }
  return report;
}

// --- typed nodes --------------------------------------------------------------

void Model::check_sibling_name(const std::optional<Uid>& parent, std::string_view name, const Uid* self) const {
  if (name.empty()) throw Error(Errc::kInvalidArgument, "component name must not be empty");
  const std::string key = lower(name);
  for (const auto& [uid, c] : components_) {
    if (self != nullptr && uid == *self) continue;
    if (c.parent == parent && lower(c.name) == key) {
      throw Error(Errc::kDuplicateName, "a sibling component named '" + c.name + "' already exists (" + uid.str() + ")");
    }
  }
}

Uid Model::add_component(Component component) {
  if (component.parent && !components_.contains(*component.parent)) {
    throw Error(Errc::kDanglingEndpoint, "parent " + component.parent->str() + " is not a component");
  }
  check_sibling_name(component.parent, component.name, nullptr);
  for (const auto& [name, q] : component.attributes) {
    auto dim = attribute_dimension(name);
    if (dim && *dim != q.dimension()) {
      throw Error(Errc::kUnitMismatch, "attribute '" + name + "' cannot carry unit " + q.unit);
    }
  }
  component.uid = register_uid(kNsComponent);
  const Uid uid = component.uid;
  components_.emplace(uid, std::move(component));
  bind_graph(uid);
  return uid;
}

Uid Model::add_requirement(Requirement requirement) {
  if (requirement.source) {
    auto doc = documents_.find(requirement.source->doc);
    const Span s = requirement.source->span;
    if (doc == documents_.end()) {
      throw Error(Errc::kDanglingEndpoint, "requirement source " + requirement.source->doc.str() + " is not a document");
    }
    if (s.start >= s.end || s.end > doc->second.text.size()) {
      throw Error(Errc::kInvalidArgument, "requirement source span is empty or out of bounds");
    }
  }
  requirement.uid = register_uid(kNsRequirement);
  const Uid uid = requirement.uid;
  if (requirement.source) {
    bind(uid, Modality::kDocument, document_locator(requirement.source->doc, requirement.source->span));
  }
  requirements_.emplace(uid, std::move(requirement));
  bind_graph(uid);
  return uid;
}

Uid Model::add_document(DocumentArtifact document) {
  document.uid = register_uid(kNsDocument);
  const Uid uid = document.uid;
  documents_.emplace(uid, std::move(document));
  bind(uid, Modality::kDocument, document_locator(uid));
  bind_graph(uid);
  return uid;
}

Uid Model::add_geometry(GeometryArtifact geometry) {
  for (const auto& [_, g] : geometry_) {
    if (g.path == geometry.path) throw Error(Errc::kDuplicateBinding, "geometry file '" + g.path + "' already linked");
  }
  geometry.uid = register_uid(kNsGeometry);
  const Uid uid = geometry.uid;
  const std::string path = geometry.path;
  geometry_.emplace(uid, std::move(geometry));
  bind(uid, Modality::kGeometry, path);
  bind_graph(uid);
  return uid;
}

Uid Model::add_constraint(ConstraintRecord constraint) {
  if (constraint.origin && !requirements_.contains(*constraint.origin)) {
    throw Error(Errc::kDanglingEndpoint, "constraint origin " + constraint.origin->str() + " is not a requirement");
  }
  constraint.uid = register_uid(kNsConstraint);
  const Uid uid = constraint.uid;
  constraints_.emplace(uid, std::move(constraint));
  bind_graph(uid);
  return uid;
}

Uid Model::add_state_machine(StateMachineDef machine) {
  if (!components_.contains(machine.owner)) {
    throw Error(Errc::kDanglingEndpoint, "state machine owner " + machine.owner.str() + " is not a component");
  }
  machine.uid = register_uid(kNsStateMachine);
  const Uid uid = machine.uid;
  machines_.emplace(uid, std::move(machine));
  bind_graph(uid);
  return uid;
}

namespace {
template <typename Map>
auto& lookup_node(Map& map, const Uid& uid, const char* what) {
  auto it = map.find(uid);
  if (it == map.end()) throw Error(Errc::kUnregisteredUid, uid.str() + " is not a " + what);
  return it->second;
}
}  // namespace

const Component& Model::component(const Uid& uid) const { return lookup_node(components_, uid, "component"); }
Component& Model::component(const Uid& uid) { return lookup_node(components_, uid, "component"); }
const Requirement& Model::requirement(const Uid& uid) const { return lookup_node(requirements_, uid, "requirement"); }
Requirement& Model::requirement(const Uid& uid) { return lookup_node(requirements_, uid, "requirement"); }
const DocumentArtifact& Model::document(const Uid& uid) const { return lookup_node(documents_, uid, "document"); }
StateMachineDef& Model::state_machine(const Uid& uid) { return lookup_node(machines_, uid, "state machine"); }

const Component* Model::find_component_by_name(std::string_view name) const {
  const std::string key = lower(name);
  for (const auto& [_, c] : components_) {
    if (lower(c.name) == key) return &c;
  }
  return nullptr;
}

void Model::rename_component(const Uid& uid, std::string name) {
  Component& c = component(uid);
  check_sibling_name(c.parent, name, &uid);
  c.name = std::move(name);
}

void Model::set_parent(const Uid& uid, std::optional<Uid> parent) {
  Component& c = component(uid);
  if (parent) {
    if (!components_.contains(*parent)) throw Error(Errc::kDanglingEndpoint, parent->str() + " is not a component");
    for (std::optional<Uid> p = parent; p; p = components_.at(*p).parent) {
      if (*p == uid) throw Error(Errc::kInvalidArgument, "parent chain of " + uid.str() + " would be cyclic");
    }
  }
  check_sibling_name(parent, c.name, &uid);
  c.parent = std::move(parent);
}

// --- interactions -------------------------------------------------------------

const Interaction& Model::add_interaction(Interaction interaction) {
  if (interaction.a == interaction.b) throw Error(Errc::kInvalidArgument, "interaction endpoints must differ");
  for (const Uid* end : {&interaction.a, &interaction.b}) {
    if (!components_.contains(*end)) throw Error(Errc::kDanglingEndpoint, end->str() + " is not a component");
  }
  for (const Uid& r : interaction.rationale) {
    if (!requirements_.contains(r)) throw Error(Errc::kDanglingEndpoint, "rationale " + r.str() + " is not a requirement");
  }
  return merge_interaction(interactions_, std::move(interaction));
}

bool Model::remove_directed(const Uid& source, const Uid& receiver, InteractionKind kind) {
  for (auto it = interactions_.begin(); it != interactions_.end(); ++it) {
    Interaction& i = *it;
    if (i.kind != kind) continue;
    const bool forward = i.a == source && i.b == receiver;
    const bool reverse = i.a == receiver && i.b == source;
    if (!forward && !reverse) continue;
    if (i.directed) {
      if (!forward) return false;
      interactions_.erase(it);
      return true;
    }
    i.directed = true;
    i.a = receiver;
    i.b = source;
    return true;
  }
  return false;
}

void Model::remove_interactions_of(const Uid& uid) {
  std::erase_if(interactions_, [&](const Interaction& i) { return i.a == uid || i.b == uid; });
}

bool Model::spatially_connected(const Uid& a, const Uid& b) const {
  return std::any_of(interactions_.begin(), interactions_.end(), [&](const Interaction& i) {
    return i.kind == InteractionKind::kSpatial && ((i.a == a && i.b == b) || (i.a == b && i.b == a));
  });
}

// --- restore ------------------------------------------------------------------

Model Model::restore(RawState state) {
  Model m;
  for (const auto& uid : state.live) {
    if (state.retired.contains(uid)) throw Error(Errc::kSchema, uid.str() + " is both live and retired");
  }
  for (const auto* set : {&state.live, &state.retired}) {
    for (const auto& uid : *set) {
      auto it = state.next_serial.find(uid.ns);
      if (!is_known_namespace(uid.ns)) throw Error(Errc::kSchema, "unknown namespace in " + uid.str());
      if (it == state.next_serial.end() || uid.serial >= it->second) {
        throw Error(Errc::kSchema, uid.str() + " is not below its namespace counter");
      }
    }
  }
  m.next_serial_ = std::move(state.next_serial);
  m.live_ = std::move(state.live);
  m.retired_ = std::move(state.retired);
  for (auto& b : state.bindings) {
    if (!m.live_.contains(b.uid)) throw Error(Errc::kSchema, "binding for non-live uid " + b.uid.str());
    if (!m.bindings_[b.uid].emplace(b.modality, std::move(b.locator)).second) {
      throw Error(Errc::kSchema, "duplicate binding for " + b.uid.str());
    }
  }
  m.components_ = std::move(state.components);
  m.requirements_ = std::move(state.requirements);
  m.documents_ = std::move(state.documents);
  m.geometry_ = std::move(state.geometry);
  m.constraints_ = std::move(state.constraints);
  m.machines_ = std::move(state.machines);
  m.interactions_ = std::move(state.interactions);
  std::sort(m.interactions_.begin(), m.interactions_.end(), interaction_less);
  m.edges_ = std::move(state.edges);
  m.flagged_ = std::move(state.flagged);
  for (const auto& e : m.edges_) {
    m.out_[e.src].insert(e);
    m.in_[e.dst].insert(e);
  }
  return m;
}

}  // namespace dthread::core
