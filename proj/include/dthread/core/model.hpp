#pragma once

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "dthread/core/types.hpp"
#include "dthread/core/uid.hpp"

namespace dthread::core {

using NodePayload = std::variant<std::monostate, Component, Requirement, DocumentArtifact, GeometryArtifact,
                                 ConstraintRecord, StateMachineDef>;

struct Resolution {
  Uid uid;
  std::vector<ModalityBinding> bindings;  // ordered Document, Geometry, Graph
  NodePayload node;
};

// Locator helpers. Document locators are `doc-N` or `doc-N#start-end`;
// component geometry locators are `<file>#PRODUCT'<name>'`; graph locators
// are the node's rendered uid.
std::string document_locator(const Uid& doc, std::optional<Span> span = std::nullopt);
std::string product_locator(std::string_view file, std::string_view product);

struct ProductLocator {
  std::string file;
  std::string product;  // empty when the locator names the whole file
};
std::optional<ProductLocator> parse_product_locator(std::string_view locator);

/// The Systems Hub: UID registry, multimodal index and typed model graph.
///
/// A Model is a plain value. Mutation is single-writer; concurrent readers
/// must work on their own copy or hold the owner's read lock.
class Model {
 public:
  // --- UID registry -------------------------------------------------------
  Uid register_uid(std::string_view ns);
  bool is_live(const Uid& uid) const { return live_.contains(uid); }
  bool is_retired(const Uid& uid) const { return retired_.contains(uid); }
  const std::set<Uid>& live_uids() const { return live_; }
  const std::set<Uid>& retired_uids() const { return retired_; }
  const std::map<std::string, std::uint64_t>& next_serials() const { return next_serial_; }

  /// Tombstones `uid`: drops its payload, its own bindings and interactions
  /// touching it. Trace edges and other uids' bindings that point at it are
  /// left in place so validate_integrity can report them.
  void retire(const Uid& uid);

  // --- multimodal index ---------------------------------------------------
  ModalityBinding bind(const Uid& uid, Modality modality, std::string locator);
  void unbind(const Uid& uid, Modality modality);
  Resolution resolve(const Uid& uid) const;
  std::optional<std::string> locator(const Uid& uid, Modality modality) const;
  std::vector<ModalityBinding> all_bindings() const;

  // --- trace graph ---------------------------------------------------------
  const TraceEdge& add_trace(const Uid& src, TraceKind kind, const Uid& dst);
  void remove_trace(const TraceEdge& edge);
  bool has_trace(const TraceEdge& edge) const { return edges_.contains(edge); }
  const std::set<TraceEdge>& traces() const { return edges_; }
  std::vector<TraceEdge> outgoing(const Uid& uid) const;
  std::vector<TraceEdge> incoming(const Uid& uid) const;

  /// Moves every active edge touching `uid` to the flagged set. Flagged
  /// edges are kept for review but ignored by traversal and integrity.
  void flag_traces_of(const Uid& uid);
  const std::set<TraceEdge>& flagged_traces() const { return flagged_; }

  /// Uids reachable from `start` over edges whose kind is in `kinds`.
  /// Forward follows src->dst, Backward dst->src. `start` is excluded.
  std::set<Uid> impact_set(const Uid& start, const std::set<TraceKind>& kinds, Direction direction) const;

  IntegrityReport validate_integrity() const;

  // --- typed nodes ---------------------------------------------------------
  // Each add_* registers a fresh uid (any uid on the argument is ignored),
  // records the node and binds its Graph locator.
  Uid add_component(Component component);
  Uid add_requirement(Requirement requirement);
  Uid add_document(DocumentArtifact document);
  Uid add_geometry(GeometryArtifact geometry);
  Uid add_constraint(ConstraintRecord constraint);
  Uid add_state_machine(StateMachineDef machine);

  const std::map<Uid, Component>& components() const { return components_; }
  const std::map<Uid, Requirement>& requirements() const { return requirements_; }
  const std::map<Uid, DocumentArtifact>& documents() const { return documents_; }
  const std::map<Uid, GeometryArtifact>& geometry() const { return geometry_; }
  const std::map<Uid, ConstraintRecord>& constraints() const { return constraints_; }
  const std::map<Uid, StateMachineDef>& state_machines() const { return machines_; }

  const Component& component(const Uid& uid) const;
  Component& component(const Uid& uid);
  const Requirement& requirement(const Uid& uid) const;
  Requirement& requirement(const Uid& uid);
  const DocumentArtifact& document(const Uid& uid) const;
  StateMachineDef& state_machine(const Uid& uid);

  const Component* find_component_by_name(std::string_view name) const;  // case-insensitive
  void rename_component(const Uid& uid, std::string name);
  void set_parent(const Uid& uid, std::optional<Uid> parent);

  // --- interactions --------------------------------------------------------
  /// Adds or merges. An existing interaction over the same unordered pair
  /// and kind absorbs the rationale; opposite or undirected additions make
  /// it undirected.
  const Interaction& add_interaction(Interaction interaction);
  /// Removes the (source -> receiver, kind) cell contribution. An undirected
  /// interaction degrades to the reverse direction.
  bool remove_directed(const Uid& source, const Uid& receiver, InteractionKind kind);
  void remove_interactions_of(const Uid& uid);
  const std::vector<Interaction>& interactions() const { return interactions_; }
  bool spatially_connected(const Uid& a, const Uid& b) const;

  // --- raw restore (used by persistence) ------------------------------------
  struct RawState {
    std::map<std::string, std::uint64_t> next_serial;
    std::set<Uid> live;
    std::set<Uid> retired;
    std::vector<ModalityBinding> bindings;
    std::map<Uid, Component> components;
    std::map<Uid, Requirement> requirements;
    std::map<Uid, DocumentArtifact> documents;
    std::map<Uid, GeometryArtifact> geometry;
    std::map<Uid, ConstraintRecord> constraints;
    std::map<Uid, StateMachineDef> machines;
    std::vector<Interaction> interactions;
    std::set<TraceEdge> edges;
    std::set<TraceEdge> flagged;
  };
  /// Rebuilds a model from stored parts without re-validating references;
  /// callers run validate_integrity afterwards. Throws Errc::kSchema on
  /// structurally impossible input (duplicate bindings, serial reuse).
  static Model restore(RawState state);

  friend bool operator==(const Model&, const Model&) = default;

 private:
  void require_live(const Uid& uid) const;
  bool locator_resolves(const ModalityBinding& binding) const;
  bool has_node(const Uid& uid) const;
  void check_sibling_name(const std::optional<Uid>& parent, std::string_view name, const Uid* self) const;
  void bind_graph(const Uid& uid) { bind(uid, Modality::kGraph, uid.str()); }

  std::map<std::string, std::uint64_t> next_serial_;
  std::set<Uid> live_;
  std::set<Uid> retired_;
  std::map<Uid, std::map<Modality, std::string>> bindings_;
  std::map<Uid, Component> components_;
  std::map<Uid, Requirement> requirements_;
  std::map<Uid, DocumentArtifact> documents_;
  std::map<Uid, GeometryArtifact> geometry_;
  std::map<Uid, ConstraintRecord> constraints_;
  std::map<Uid, StateMachineDef> machines_;
  std::vector<Interaction> interactions_;  // sorted by (min uid, max uid, kind)
  std::set<TraceEdge> edges_;
  std::set<TraceEdge> flagged_;
  std::map<Uid, std::set<TraceEdge>> out_;
  std::map<Uid, std::set<TraceEdge>> in_;
};

}  // namespace dthread::core
