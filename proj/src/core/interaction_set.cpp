#include "dthread/core/interaction_set.hpp"

#include <algorithm>
#include <tuple>

namespace dthread::core {
namespace {

auto key(const Interaction& i) {
  const Uid& lo = std::min(i.a, i.b);
  const Uid& hi = std::max(i.a, i.b);
  return std::tie(lo, hi, i.kind);
}

void normalize_rationale(std::vector<Uid>& r) {
  std::sort(r.begin(), r.end());
  r.erase(std::unique(r.begin(), r.end()), r.end());
}

}  // namespace

bool interaction_less(const Interaction& l, const Interaction& r) { return key(l) < key(r); }
bool same_interaction_key(const Interaction& l, const Interaction& r) { return key(l) == key(r); }

const Interaction& merge_interaction(std::vector<Interaction>& sorted, Interaction interaction) {
  normalize_rationale(interaction.rationale);
  if (!interaction.directed && interaction.b < interaction.a) std::swap(interaction.a, interaction.b);
  auto pos = std::lower_bound(sorted.begin(), sorted.end(), interaction, interaction_less);
  if (pos != sorted.end() && same_interaction_key(*pos, interaction)) {
    Interaction& existing = *pos;
    existing.rationale.insert(existing.rationale.end(), interaction.rationale.begin(), interaction.rationale.end());
    normalize_rationale(existing.rationale);
    if (existing.directed && (!interaction.directed || existing.a != interaction.a)) {
      existing.directed = false;
      if (existing.b < existing.a) std::swap(existing.a, existing.b);
    }
    return existing;
  }
  return *sorted.insert(pos, std::move(interaction));
}

}  // namespace dthread::core
