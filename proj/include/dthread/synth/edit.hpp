#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

#include "dthread/core/model.hpp"

namespace dthread::synth {

namespace op {

struct AddComponent {
  std::string name;
  std::optional<core::Uid> parent;
  std::set<std::string> function_tags;
  friend bool operator==(const AddComponent&, const AddComponent&) = default;
};
struct RemoveComponent {
  core::Uid uid;
  friend bool operator==(const RemoveComponent&, const RemoveComponent&) = default;
};
struct RenameComponent {
  core::Uid uid;
  std::string name;
  friend bool operator==(const RenameComponent&, const RenameComponent&) = default;
};
struct MergeComponents {
  core::Uid survivor;
  core::Uid absorbed;
  friend bool operator==(const MergeComponents&, const MergeComponents&) = default;
};
/// Row = receiver, col = source.
struct SetCell {
  core::Uid row;
  core::Uid col;
  core::InteractionKind kind = core::InteractionKind::kInformation;
  std::vector<core::Uid> rationale;
  friend bool operator==(const SetCell&, const SetCell&) = default;
};
struct ClearCell {
  core::Uid row;
  core::Uid col;
  core::InteractionKind kind = core::InteractionKind::kInformation;
  friend bool operator==(const ClearCell&, const ClearCell&) = default;
};
struct AcceptRequirement {
  core::Uid uid;
  friend bool operator==(const AcceptRequirement&, const AcceptRequirement&) = default;
};
struct RejectRequirement {
  core::Uid uid;
  friend bool operator==(const RejectRequirement&, const RejectRequirement&) = default;
};
struct EditRequirementText {
  core::Uid uid;
  std::string text;
  friend bool operator==(const EditRequirementText&, const EditRequirementText&) = default;
};
struct AddRequirement {
  std::string text;
  core::ReqType type = core::ReqType::kFunctional;
  core::Priority priority = core::Priority::kMed;
  friend bool operator==(const AddRequirement&, const AddRequirement&) = default;
};
/// Absent value removes the attribute.
struct SetAttribute {
  core::Uid uid;
  std::string name;
  std::optional<Quantity> value;
  friend bool operator==(const SetAttribute&, const SetAttribute&) = default;
};
struct SetFunctionTags {
  core::Uid uid;
  std::set<std::string> tags;
  friend bool operator==(const SetFunctionTags&, const SetFunctionTags&) = default;
};
struct SetParent {
  core::Uid uid;
  std::optional<core::Uid> parent;
  friend bool operator==(const SetParent&, const SetParent&) = default;
};
struct AddConstraint {
  std::string text;
  std::optional<core::Uid> origin;
  friend bool operator==(const AddConstraint&, const AddConstraint&) = default;
};
struct AddStateMachine {
  core::StateMachineDef machine;  // uid ignored
  friend bool operator==(const AddStateMachine&, const AddStateMachine&) = default;
};

}  // namespace op

using EditPayload = std::variant<op::AddComponent, op::RemoveComponent, op::RenameComponent, op::MergeComponents,
                                 op::SetCell, op::ClearCell, op::AcceptRequirement, op::RejectRequirement,
                                 op::EditRequirementText, op::AddRequirement, op::SetAttribute,
                                 op::SetFunctionTags, op::SetParent, op::AddConstraint, op::AddStateMachine>;

struct RefinementEdit {
  EditPayload payload;
  std::string author;
  std::int64_t timestamp = 0;  // unix seconds
  friend bool operator==(const RefinementEdit&, const RefinementEdit&) = default;
};

std::string_view op_name(const EditPayload& payload);

/// Applies one edit and returns the changed model; `model` is untouched
/// when the edit fails. Throws Errc::kUnregisteredUid / kDanglingEndpoint
/// for unknown references, kDuplicateName for sibling name clashes,
/// kConflict for cells that are already set (SetCell) or empty (ClearCell)
/// and kInvalidArgument for other payload problems.
core::Model apply_edit(const core::Model& model, const RefinementEdit& edit);

/// In-place variant with the same all-or-nothing guarantee.
void apply_edit_in_place(core::Model& model, const RefinementEdit& edit);

/// Journal form: {"op", "author", "timestamp", ...payload}. Uids are
/// rendered strings.
nlohmann::json edit_to_json(const RefinementEdit& edit);

/// Parses the journal form. With a model, uid fields may instead be written
/// `@<component name>` (case-insensitive), resolved here. Missing author
/// and timestamp default to the given values. Throws Errc::kSchema.
RefinementEdit edit_from_json(const nlohmann::json& j, const core::Model* model = nullptr,
                              const std::string& default_author = "", std::int64_t default_timestamp = 0);

nlohmann::json state_machine_to_json(const core::StateMachineDef& sm);
core::StateMachineDef state_machine_from_json(const nlohmann::json& j);

}  // namespace dthread::synth
