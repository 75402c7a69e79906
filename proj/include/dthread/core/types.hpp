#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "dthread/core/uid.hpp"
#include "dthread/core/units.hpp"

namespace dthread::core {

enum class Modality { kDocument, kGeometry, kGraph };
enum class TraceKind { kRefines, kImplements, kTests, kSatisfies, kAllocates, kDerivedFrom };
enum class Direction { kForward, kBackward, kBoth };
enum class InteractionKind { kSpatial, kEnergy, kInformation, kMaterial };
enum class ReqType { kFunctional, kPerformance, kInterface, kConstraint, kOther };
enum class Priority { kLow, kMed, kHigh };
enum class ReqStatus { kProposed, kAccepted, kRejected, kModified };
enum class DocFormat { kPlainText, kMarkdown };

// Canonical names are the capitalized enumerator names ("DerivedFrom",
// "Information", ...). Parsing is case-insensitive and ignores '-' and '_',
// so "derived-from" and "derivedfrom" are accepted too. Parse failures throw
// Errc::kInvalidArgument.
std::string_view to_string(Modality v);
std::string_view to_string(TraceKind v);
std::string_view to_string(Direction v);
std::string_view to_string(InteractionKind v);
std::string_view to_string(ReqType v);
std::string_view to_string(Priority v);
std::string_view to_string(ReqStatus v);
std::string_view to_string(DocFormat v);

template <typename Enum>
Enum parse_enum(std::string_view text);

/// DSM cell letter: S, E, I or M.
char kind_letter(InteractionKind kind);
InteractionKind kind_from_letter(char letter);

struct Span {
  std::size_t start = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - start; }
  friend auto operator<=>(const Span&, const Span&) = default;
};

struct ModalityBinding {
  Uid uid;
  Modality modality = Modality::kGraph;
  std::string locator;

  friend bool operator==(const ModalityBinding&, const ModalityBinding&) = default;
};

struct Component {
  Uid uid;
  std::string name;
  std::set<std::string> function_tags;
  std::map<std::string, Quantity> attributes;
  std::optional<Uid> parent;

  friend bool operator==(const Component&, const Component&) = default;
};

struct SourceRef {
  Uid doc;
  Span span;

  friend bool operator==(const SourceRef&, const SourceRef&) = default;
};

struct Requirement {
  Uid uid;
  std::string text;
  ReqType type = ReqType::kFunctional;
  Priority priority = Priority::kMed;
  ReqStatus status = ReqStatus::kProposed;
  // Absent only for requirements a reviewer added by hand.
  std::optional<SourceRef> source;
  std::map<std::string, std::string> custom;

  friend bool operator==(const Requirement&, const Requirement&) = default;
};

struct DocumentArtifact {
  Uid uid;
  std::string title;
  std::string text;
  DocFormat format = DocFormat::kPlainText;
  std::vector<Span> sentences;

  std::string_view slice(Span s) const { return std::string_view(text).substr(s.start, s.size()); }
  friend bool operator==(const DocumentArtifact&, const DocumentArtifact&) = default;
};

struct GeometryArtifact {
  Uid uid;
  std::string path;    // relative to the project file
  std::string digest;  // sha256 of the file bytes
  std::vector<std::string> products;

  friend bool operator==(const GeometryArtifact&, const GeometryArtifact&) = default;
};

struct ConstraintRecord {
  Uid uid;
  std::string text;
  std::optional<Uid> origin;

  friend bool operator==(const ConstraintRecord&, const ConstraintRecord&) = default;
};

struct VariableDecl {
  std::string name;
  std::int64_t initial = 0;
  std::int64_t min = 0;
  std::int64_t max = 0;

  friend bool operator==(const VariableDecl&, const VariableDecl&) = default;
};

struct Assignment {
  std::string variable;
  std::string expr;

  friend bool operator==(const Assignment&, const Assignment&) = default;
};

struct TransitionDef {
  std::string from;
  std::string event;
  std::string guard;  // empty means always enabled
  std::vector<Assignment> assigns;
  std::string to;

  friend bool operator==(const TransitionDef&, const TransitionDef&) = default;
};

struct StateInvariant {
  std::string state;
  std::string expr;

  friend bool operator==(const StateInvariant&, const StateInvariant&) = default;
};

/// Behavior model attached to a component. Expressions are kept as source
/// text; the verifier compiles them.
struct StateMachineDef {
  Uid uid;
  Uid owner;
  std::string name;
  std::vector<std::string> states;
  std::string initial;
  std::vector<std::string> final_states;
  std::vector<VariableDecl> variables;
  std::vector<TransitionDef> transitions;
  std::vector<StateInvariant> invariants;

  friend bool operator==(const StateMachineDef&, const StateMachineDef&) = default;
};

struct TraceEdge {
  Uid src;
  TraceKind kind = TraceKind::kDerivedFrom;
  Uid dst;

  friend auto operator<=>(const TraceEdge&, const TraceEdge&) = default;
};

/// Pairwise component interaction. Undirected interactions are stored with
/// a < b.
struct Interaction {
  Uid a;
  Uid b;
  InteractionKind kind = InteractionKind::kSpatial;
  bool directed = false;
  std::vector<Uid> rationale;  // sorted, unique requirement uids

  friend bool operator==(const Interaction&, const Interaction&) = default;
};

struct IntegrityReport {
  std::vector<ModalityBinding> dangling_bindings;
  std::vector<TraceEdge> dangling_edges;
  std::vector<Uid> orphan_uids;

  bool empty() const { return dangling_bindings.empty() && dangling_edges.empty() && orphan_uids.empty(); }
};

}  // namespace dthread::core

namespace dthread::core {
template <> Modality parse_enum<Modality>(std::string_view);
template <> TraceKind parse_enum<TraceKind>(std::string_view);
template <> Direction parse_enum<Direction>(std::string_view);
template <> InteractionKind parse_enum<InteractionKind>(std::string_view);
template <> ReqType parse_enum<ReqType>(std::string_view);
template <> Priority parse_enum<Priority>(std::string_view);
template <> ReqStatus parse_enum<ReqStatus>(std::string_view);
template <> DocFormat parse_enum<DocFormat>(std::string_view);
}  // namespace dthread::core
