#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dthread/core/types.hpp"

namespace dthread::docpipe {

enum class TokenClass { kWord, kNumber, kPunct };

struct Token {
  std::string_view text;
  std::size_t offset = 0;  // relative to the tokenized string
  TokenClass cls = TokenClass::kWord;
};

/// Splits into words ([A-Za-z0-9][A-Za-z0-9'-]* with at least one letter),
/// numbers (digits with an optional fraction) and single punctuation
/// characters. Whitespace is dropped. Non-ASCII bytes are punctuation.
std::vector<Token> tokenize(std::string_view text);

std::string to_lower(std::string_view text);

bool is_stopword(std::string_view lowered);
bool is_determiner(std::string_view lowered);
bool is_modal(std::string_view lowered);

/// Base form of an inflected verb when it belongs to the verb lexicon
/// ("supplies" -> "supply", "mounted" -> "mount"), else nullopt.
std::optional<std::string> verb_base(std::string_view lowered);

/// Singular form of a lowercase English noun ("cameras" -> "camera",
/// "batteries" -> "battery"). Words that do not look plural are returned
/// unchanged.
std::string singularize(std::string_view lowered);

/// Normalized key of a head noun: acronyms lowercased as-is ("ADCS" ->
/// "adcs", "OBCs" -> "obc"), other words singularized.
std::string head_key(std::string_view word);

struct NounPhrase {
  core::Span span;                 // offsets relative to the analysed text
  std::vector<std::string> words;  // original spelling
  std::string term;                // lowercase, single-spaced
  std::string key;                 // term with the head word singularized
  bool determined = false;         // directly preceded by a determiner
};

/// Maximal runs of noun tokens after stopword, verb and modifier removal.
/// A verb-lexicon word counts as a noun when it follows a determiner or
/// another noun ("the power subsystem").
std::vector<NounPhrase> noun_phrases(std::string_view text);

/// True when the phrase's head word names a quantity or property rather
/// than a part ("mass", "data", "temperature", ...).
bool is_abstract_head(const NounPhrase& phrase);

/// Display name for a component key: words capitalized, acronyms and
/// mixed-case words kept as written, head word singularized.
std::string display_name(const NounPhrase& phrase);

}  // namespace dthread::docpipe
