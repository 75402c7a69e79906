#include "dthread/docpipe/glossary.hpp"

#include "dthread/docpipe/text.hpp"

namespace dthread::docpipe {

Glossary build_glossary(const std::vector<const core::DocumentArtifact*>& docs) {
  Glossary glossary;
  for (const auto* doc : docs) {
    for (const auto& sentence : doc->sentences) {
      for (const auto& np : noun_phrases(doc->slice(sentence))) {
        auto& entry = glossary.entries[np.term];
        entry.occurrences.push_back({doc->uid, {sentence.start + np.span.start, sentence.start + np.span.end}});
        entry.count = entry.occurrences.size();
      }
    }
  }
  return glossary;
}

Glossary build_glossary(const std::vector<core::DocumentArtifact>& docs) {
  std::vector<const core::DocumentArtifact*> ptrs;
  ptrs.reserve(docs.size());
  for (const auto& d : docs) ptrs.push_back(&d);
  return build_glossary(ptrs);
}

}  // namespace dthread::docpipe
