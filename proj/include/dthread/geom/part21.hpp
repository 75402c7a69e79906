#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "dthread/core/error.hpp"

namespace dthread::geom {

/// Lexical or syntactic failure at a 1-based line/column of the input.
class StepSyntaxError : public Error {
 public:
  StepSyntaxError(std::size_t line, std::size_t column, const std::string& what)
      : Error(Errc::kSyntax, "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what),
        line_(line),
        column_(column) {}
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

enum class TokenKind {
  kKeyword,     // entity or section name, also ISO-10303-21 / END-ISO-10303-21
  kInstance,    // #12 used as an instance name or reference
  kInteger,
  kReal,
  kString,      // raw lexeme including quotes
  kEnum,        // .T.
  kBinary,      // "0F"
  kPunct,       // ( ) , ; = $ *
};

struct StepToken {
  TokenKind kind = TokenKind::kPunct;
  std::string raw;  // exact source bytes
  std::size_t offset = 0;
  std::size_t line = 1;
  std::size_t column = 1;
};

/// Full token stream. Whitespace and /* comments */ are dropped; every
/// other byte belongs to exactly one token.
std::vector<StepToken> tokenize_step(std::string_view text);

/// Decodes a Part 21 string lexeme (with quotes) to UTF-8: '' quotes,
/// \\ backslash, \S\ high half, \X\hh Latin-1, \X2\...\X0\ UCS-2 and
/// \X4\...\X0\ UCS-4. \P?\ page switches are accepted and ignored.
std::string decode_step_string(std::string_view lexeme);

struct Param;
using ParamList = std::vector<Param>;

struct Typed {
  std::string type;
  std::shared_ptr<Param> value;
};

struct Unset {
  friend bool operator==(Unset, Unset) = default;
};     // $
struct Derived {
  friend bool operator==(Derived, Derived) = default;
};   // *
struct EnumValue {
  std::string name;  // without dots
};
struct Ref {
  std::uint64_t id = 0;
};
struct Binary {
  std::string hex;
};

struct Param {
  std::variant<Unset, Derived, std::int64_t, double, std::string, EnumValue, Ref, Binary, ParamList, Typed> value;

  bool is_unset() const { return std::holds_alternative<Unset>(value); }
  const Ref* ref() const { return std::get_if<Ref>(&value); }
  const ParamList* list() const { return std::get_if<ParamList>(&value); }
  const std::string* string() const { return std::get_if<std::string>(&value); }
  const EnumValue* enumeration() const { return std::get_if<EnumValue>(&value); }
  const Typed* typed() const { return std::get_if<Typed>(&value); }
  /// Integer or real as double.
  std::optional<double> number() const;
};

struct EntityPart {
  std::string type;  // uppercase
  ParamList params;
};

/// One instance. Simple instances have one part; complex instances
/// `(A(..) B(..))` keep every part in source order.
struct EntityInstance {
  std::uint64_t id = 0;
  std::vector<EntityPart> parts;
  bool complex = false;
  std::size_t line = 0;

  const EntityPart* part(std::string_view type) const;
  const std::string& type() const { return parts.front().type; }
  bool is(std::string_view type) const { return part(type) != nullptr; }
};

struct StepHeader {
  std::string file_name;
  std::string time_stamp;
  std::vector<std::string> schemas;
  std::map<std::string, ParamList> records;  // every header entity by name
};

struct StepFile {
  StepHeader header;
  std::map<std::uint64_t, EntityInstance> entities;
  std::string encoding;  // "UTF-8" or "ISO-8859-1"
};

/// Syntactic parse. Bytes that are not valid UTF-8 are read as Latin-1.
/// Throws StepSyntaxError, Error(kMissingHeader) and
/// Error(kUnresolvedReference) naming the first dangling `#n`.
StepFile parse_part21(std::string_view bytes);

/// Data-section token range of a parsed token stream (tokens after `DATA;`
/// up to, excluding, `ENDSEC;`).
std::pair<std::size_t, std::size_t> data_section_range(const std::vector<StepToken>& tokens);

}  // namespace dthread::geom
