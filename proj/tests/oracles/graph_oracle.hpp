#pragma once

// Test-only reference implementations. These deliberately avoid the
// production adjacency maps and traversal code.

#include <set>
#include <vector>

#include "dthread/core/types.hpp"

namespace dthread::oracle {

/// Level-synchronous reachability over a flat edge list.
inline std::set<core::Uid> reachable(const std::vector<core::TraceEdge>& edges, const core::Uid& start,
                                     const std::set<core::TraceKind>& kinds, core::Direction direction) {
  std::set<core::Uid> visited{start};
  std::vector<core::Uid> level{start};
  while (!level.empty()) {
    std::vector<core::Uid> next;
    for (const auto& node : level) {
      for (const auto& e : edges) {
        if (kinds.count(e.kind) == 0) continue;
        if (direction != core::Direction::kBackward && e.src == node && visited.insert(e.dst).second) {
          next.push_back(e.dst);
        }
        if (direction != core::Direction::kForward && e.dst == node && visited.insert(e.src).second) {
          next.push_back(e.src);
        }
      }
    }
    level = std::move(next);
  }
  visited.erase(start);
  return visited;
}

}  // namespace dthread::oracle
