#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dthread/core/model.hpp"
#include "dthread/synth/verbs.hpp"

namespace dthread::synth {

struct ComponentCandidate {
  core::Component component;          // uid unset
  std::string key;                    // dedup key: lowercase, head singularized
  std::vector<core::Uid> requirements;  // contributing, first-occurrence order
  std::vector<core::Uid> subject_of;    // requirements whose subject it is
  std::optional<core::SourceRef> first_mention;
  friend bool operator==(const ComponentCandidate&, const ComponentCandidate&) = default;
};

/// Dedup key of a component name ("Processing Units" -> "processing unit").
std::string component_key(std::string_view name);

/// Part-like noun phrases introduced by a determiner, deduplicated by key,
/// in order of first occurrence. Rejected requirements are skipped.
/// Mentions inside requirement text map back to document offsets when the
/// requirement still carries its verbatim source text.
std::vector<ComponentCandidate> identify_components(const std::vector<core::Requirement>& reqs);

/// A component mention inside one sentence.
struct Mention {
  core::Uid component;
  std::size_t offset = 0;  // within the sentence
};

/// Interactions implied by requirement sentences that mention at least two
/// of `components` and contain a verb from `verbs`. The sentence subject
/// (or the agent after "by" in a passive sentence) is the source of
/// directed kinds.
std::vector<core::Interaction> infer_interactions(const std::vector<core::Requirement>& reqs,
                                                  const std::vector<core::Component>& components,
                                                  const VerbTable& verbs);

struct SynthesisSummary {
  std::vector<core::Uid> new_components;
  std::size_t interactions = 0;
  std::size_t traces_added = 0;
};

/// Runs identification and inference over the model's requirements and
/// records the result: new components (Document binding at their first
/// mention), DerivedFrom traces component -> requirement, Satisfies traces
/// from each sentence subject, and merged interactions. Components that
/// already exist (by key) are reused, so repeated runs add nothing.
SynthesisSummary synthesize(core::Model& model, const VerbTable& verbs);

}  // namespace dthread::synth
