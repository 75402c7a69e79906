#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "dthread/core/model.hpp"
#include "dthread/core/types.hpp"

namespace dthread::docpipe {

/// UTF-8 validation, BOM removal, NFC normalization and LF line endings.
/// Throws Errc::kInvalidEncoding.
std::string normalize_text(std::string_view raw);

/// Sentence spans over normalized text. Sentences end at '.', '?' or '!'
/// followed by whitespace or end of block; blank lines end blocks. "e.g.",
/// "i.e." and "etc." never end a sentence. In Markdown, headings, list items
/// and block quotes start their own block and the structure marker is left
/// outside the span; fenced code and horizontal rules are skipped.
std::vector<core::Span> segment_sentences(std::string_view text, core::DocFormat format);

/// Normalizes and segments without touching any model. Throws
/// Errc::kInvalidEncoding or Errc::kEmptyDocument.
core::DocumentArtifact prepare_document(std::string title, std::string_view raw, core::DocFormat format);

/// prepare_document + registration in the model (uid, Document and Graph
/// bindings). Returns the stored artifact.
core::DocumentArtifact ingest_document(core::Model& model, std::string title, std::string_view raw,
                                       core::DocFormat format);

/// ".md"/".markdown" -> Markdown, anything else -> PlainText.
core::DocFormat format_from_path(const std::filesystem::path& path);

}  // namespace dthread::docpipe
