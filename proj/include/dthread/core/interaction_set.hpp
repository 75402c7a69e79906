#pragma once

#include <vector>

#include "dthread/core/types.hpp"

namespace dthread::core {

/// Strict order on (min endpoint, max endpoint, kind); direction and
/// rationale do not participate.
bool interaction_less(const Interaction& l, const Interaction& r);
bool same_interaction_key(const Interaction& l, const Interaction& r);

/// Inserts into a vector kept sorted by interaction_less. An existing entry
/// with the same key absorbs the rationale; a reverse-direction or
/// undirected addition turns it undirected. No endpoint validation.
const Interaction& merge_interaction(std::vector<Interaction>& sorted, Interaction interaction);

}  // namespace dthread::core
