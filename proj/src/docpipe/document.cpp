#include "dthread/docpipe/document.hpp"

#include <unicode/normalizer2.h>
#include <unicode/unistr.h>
#include <unicode/ustring.h>

#include <algorithm>
#include <cctype>

#include "dthread/core/error.hpp"
#include "dthread/docpipe/text.hpp"

namespace dthread::docpipe {
namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

bool valid_utf8(std::string_view bytes) {
  UErrorCode status = U_ZERO_ERROR;
  int32_t needed = 0;
  u_strFromUTF8(nullptr, 0, &needed, bytes.data(), static_cast<int32_t>(bytes.size()), &status);
  return status == U_BUFFER_OVERFLOW_ERROR || U_SUCCESS(status) || status == U_STRING_NOT_TERMINATED_WARNING;
}

struct Block {
  std::size_t start;
  std::size_t end;
};

// Length of a Markdown structure marker at the start of `line` (after
// indentation), or 0. Sets `heading` for ATX headings.
std::size_t marker_length(std::string_view line, bool& heading) {
  heading = false;
  std::size_t i = 0;
  while (i < line.size() && i < 4 && line[i] == ' ') ++i;
  const std::string_view rest = line.substr(i);
  if (!rest.empty() && rest[0] == '#') {
    std::size_t n = 0;
    while (n < rest.size() && rest[n] == '#') ++n;
    if (n <= 6 && (n == rest.size() || rest[n] == ' ')) {
      heading = true;
      return i + n;
    }
    return 0;
  }
  if (rest.size() >= 2 && (rest[0] == '-' || rest[0] == '*' || rest[0] == '+' || rest[0] == '>') && rest[1] == ' ') {
    return i + 2;
  }
  std::size_t d = 0;
  while (d < rest.size() && std::isdigit(static_cast<unsigned char>(rest[d]))) ++d;
  if (d > 0 && d + 1 < rest.size() && (rest[d] == '.' || rest[d] == ')') && rest[d + 1] == ' ') return i + d + 2;
  return 0;
}

bool is_fence(std::string_view line) {
  std::size_t i = 0;
  while (i < line.size() && i < 4 && line[i] == ' ') ++i;
  const auto rest = line.substr(i);
  return rest.rfind("```", 0) == 0 || rest.rfind("~~~", 0) == 0;
}

bool is_rule(std::string_view line) {
  char mark = 0;
  int count = 0;
  for (char c : line) {
    if (c == ' ' || c == '\t') continue;
    if (c != '-' && c != '*' && c != '_') return false;
    if (mark != 0 && c != mark) return false;
    mark = c;
    ++count;
  }
  return count >= 3;
}

bool abbreviation_before(std::string_view text, std::size_t dot) {
  std::size_t b = dot;
  while (b > 0 && (std::isalpha(static_cast<unsigned char>(text[b - 1])) || text[b - 1] == '.')) --b;
  const std::string word = to_lower(text.substr(b, dot - b));
  return word == "e.g" || word == "i.e" || word == "etc" || word == "eg" || word == "ie";
}

void split_block(std::string_view text, Block block, std::vector<core::Span>& out) {
  auto emit = [&](std::size_t s, std::size_t e) {
    while (s < e && is_space(text[s])) ++s;
    while (e > s && is_space(text[e - 1])) --e;
    if (e > s) out.push_back({s, e});
  };
  std::size_t start = block.start;
  std::size_t i = block.start;
  while (i < block.end) {
    const char c = text[i];
    if (c != '.' && c != '?' && c != '!') {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < block.end && (text[j] == '.' || text[j] == '?' || text[j] == '!')) ++j;
    while (j < block.end && (text[j] == '"' || text[j] == '\'' || text[j] == ')' || text[j] == ']')) ++j;
    const bool at_gap = j == block.end || is_space(text[j]);
    const bool guarded = c == '.' && j == i + 1 && abbreviation_before(text, i);
    if (at_gap && !guarded) {
      emit(start, j);
      start = j;
    }
    i = j;
  }
  emit(start, block.end);
}

}  // namespace

std::string normalize_text(std::string_view raw) {
  if (raw.size() >= 3 && static_cast<unsigned char>(raw[0]) == 0xEF && static_cast<unsigned char>(raw[1]) == 0xBB &&
      static_cast<unsigned char>(raw[2]) == 0xBF) {
    raw.remove_prefix(3);
  }
  if (!valid_utf8(raw)) throw Error(Errc::kInvalidEncoding, "document is not valid UTF-8");
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* nfc = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) throw Error(Errc::kInvalidEncoding, "NFC normalizer unavailable");
  const icu::UnicodeString source = icu::UnicodeString::fromUTF8(icu::StringPiece(raw.data(), static_cast<int32_t>(raw.size())));
  const icu::UnicodeString normalized = nfc->normalize(source, status);
  if (U_FAILURE(status)) throw Error(Errc::kInvalidEncoding, "NFC normalization failed");
  std::string utf8;
  normalized.toUTF8String(utf8);

  std::string out;
  out.reserve(utf8.size());
  for (std::size_t i = 0; i < utf8.size(); ++i) {
    if (utf8[i] == '\r') {
      out += '\n';
      if (i + 1 < utf8.size() && utf8[i + 1] == '\n') ++i;
    } else {
      out += utf8[i];
    }
  }
  return out;
}

std::vector<core::Span> segment_sentences(std::string_view text, core::DocFormat format) {
  const bool markdown = format == core::DocFormat::kMarkdown;
  std::vector<core::Span> out;
  std::optional<Block> block;
  auto close = [&] {
    if (block) split_block(text, *block, out);
    block.reset();
  };
  bool in_fence = false;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    const std::string_view line = text.substr(pos, eol - pos);
    const bool blank = std::all_of(line.begin(), line.end(), is_space);

    if (markdown && is_fence(line)) {
      close();
      in_fence = !in_fence;
    } else if (in_fence) {
      // code is not prose
    } else if (blank) {
      close();
    } else if (markdown && is_rule(line)) {
      close();
    } else {
      bool heading = false;
      const std::size_t marker = markdown ? marker_length(line, heading) : 0;
      if (marker > 0) {
        close();
        std::size_t content_end = eol;
        if (heading) {
          while (content_end > pos + marker && (text[content_end - 1] == '#' || is_space(text[content_end - 1]))) {
            --content_end;
          }
          split_block(text, {pos + marker, content_end}, out);
        } else {
          block = Block{pos + marker, eol};
        }
      } else if (block) {
        block->end = eol;
      } else {
        block = Block{pos, eol};
      }
    }
    if (eol == text.size()) break;
    pos = eol + 1;
  }
  close();
  return out;
}

core::DocumentArtifact prepare_document(std::string title, std::string_view raw, core::DocFormat format) {
  core::DocumentArtifact doc;
  doc.title = std::move(title);
  doc.text = normalize_text(raw);
  if (std::all_of(doc.text.begin(), doc.text.end(), is_space)) {
    throw Error(Errc::kEmptyDocument, "document '" + doc.title + "' has no content");
  }
  doc.format = format;
  doc.sentences = segment_sentences(doc.text, format);
  return doc;
}

core::DocumentArtifact ingest_document(core::Model& model, std::string title, std::string_view raw,
                                       core::DocFormat format) {
  core::DocumentArtifact doc = prepare_document(std::move(title), raw, format);
  const core::Uid uid = model.add_document(std::move(doc));
  return model.document(uid);
}

core::DocFormat format_from_path(const std::filesystem::path& path) {
  const std::string ext = to_lower(path.extension().string());
  return ext == ".md" || ext == ".markdown" ? core::DocFormat::kMarkdown : core::DocFormat::kPlainText;
}

}  // namespace dthread::docpipe
