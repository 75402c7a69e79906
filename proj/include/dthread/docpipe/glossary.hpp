#pragma once

#include <map>
#include <string>
#include <vector>

#include "dthread/core/types.hpp"

namespace dthread::docpipe {

struct GlossaryEntry {
  std::size_t count = 0;
  std::vector<core::SourceRef> occurrences;  // document order
  friend bool operator==(const GlossaryEntry&, const GlossaryEntry&) = default;
};

struct Glossary {
  std::map<std::string, GlossaryEntry> entries;  // lowercase noun-phrase term
  friend bool operator==(const Glossary&, const Glossary&) = default;
};

/// Noun-phrase terms over every sentence of every document. Spans are
/// absolute offsets into the document text.
Glossary build_glossary(const std::vector<const core::DocumentArtifact*>& docs);
Glossary build_glossary(const std::vector<core::DocumentArtifact>& docs);

}  // namespace dthread::docpipe
