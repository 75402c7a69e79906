#include "dthread/geom/part21.hpp"

#include <cctype>
#include <set>

namespace dthread::geom {
namespace {

bool is_upper_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0 || c == '_' || c == '!'; }
bool is_keyword_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_' || c == '-'; }
bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }

class Lexer {
 public:
  explicit Lexer(std::string_view text) : text_(text) {}

  std::vector<StepToken> run() {
    std::vector<StepToken> out;
    while (true) {
      skip_blank();
      if (pos_ >= text_.size()) break;
      out.push_back(next());
    }
    return out;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const { throw StepSyntaxError(line_, col_, what); }

  void advance(std::size_t n = 1) {
    for (std::size_t i = 0; i < n && pos_ < text_.size(); ++i) {
      if (text_[pos_] == '\n') {
        ++line_;
        col_ = 1;
      } else {
        ++col_;
      }
      ++pos_;
    }
  }

  char peek(std::size_t ahead = 0) const { return pos_ + ahead < text_.size() ? text_[pos_ + ahead] : '\0'; }

  void skip_blank() {
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else if (c == '/' && peek(1) == '*') {
        const std::size_t line = line_, col = col_;
        const auto end = text_.find("*/", pos_ + 2);
        if (end == std::string_view::npos) throw StepSyntaxError(line, col, "unterminated comment");
        advance(end + 2 - pos_);
      } else {
        break;
      }
    }
  }

  StepToken next() {
    StepToken t;
    t.offset = pos_;
    t.line = line_;
    t.column = col_;
    const char c = peek();
    std::size_t end = pos_;
    if (c == '#') {
      end = pos_ + 1;
      while (end < text_.size() && is_digit(text_[end])) ++end;
      if (end == pos_ + 1) fail("expected digits after '#'");
      t.kind = TokenKind::kInstance;
    } else if (c == '\'') {
      end = pos_ + 1;
      while (true) {
        if (end >= text_.size()) fail("unterminated string");
        if (text_[end] == '\'') {
          if (end + 1 < text_.size() && text_[end + 1] == '\'') {
            end += 2;
            continue;
          }
          ++end;
          break;
        }
        ++end;
      }
      t.kind = TokenKind::kString;
    } else if (c == '"') {
      end = pos_ + 1;
      while (end < text_.size() && std::isxdigit(static_cast<unsigned char>(text_[end]))) ++end;
      if (end >= text_.size() || text_[end] != '"' || end == pos_ + 1) fail("malformed binary literal");
      ++end;
      t.kind = TokenKind::kBinary;
    } else if (c == '.' && (std::isalpha(static_cast<unsigned char>(peek(1))) || peek(1) == '_')) {
      end = pos_ + 1;
      while (end < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[end])) || text_[end] == '_')) ++end;
      if (end >= text_.size() || text_[end] != '.') fail("malformed enumeration");
      ++end;
      t.kind = TokenKind::kEnum;
    } else if (is_digit(c) || ((c == '-' || c == '+') && (is_digit(peek(1)) || peek(1) == '.'))) {
      end = pos_ + 1;
      while (end < text_.size() && is_digit(text_[end])) ++end;
      t.kind = TokenKind::kInteger;
      if (end < text_.size() && text_[end] == '.') {
        t.kind = TokenKind::kReal;
        ++end;
        while (end < text_.size() && is_digit(text_[end])) ++end;
        if (end < text_.size() && (text_[end] == 'E' || text_[end] == 'e')) {
          std::size_t e = end + 1;
          if (e < text_.size() && (text_[e] == '+' || text_[e] == '-')) ++e;
          if (e >= text_.size() || !is_digit(text_[e])) fail("malformed exponent");
          while (e < text_.size() && is_digit(text_[e])) ++e;
          end = e;
        }
      }
      if (end == pos_ + 1 && !is_digit(c)) fail("malformed number");
    } else if (is_upper_start(c)) {
      end = pos_ + 1;
      while (end < text_.size() && is_keyword_char(text_[end])) ++end;
      t.kind = TokenKind::kKeyword;
    } else if (c == '(' || c == ')' || c == ',' || c == ';' || c == '=' || c == '$' || c == '*') {
      end = pos_ + 1;
      t.kind = TokenKind::kPunct;
    } else {
      fail(std::string("unexpected character '") + c + "'");
    }
    t.raw = std::string(text_.substr(pos_, end - pos_));
    advance(end - pos_);
    return t;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t col_ = 1;
};

void append_utf8(std::string& out, std::uint32_t cp) {
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
}

bool valid_utf8(std::string_view s) {
  std::size_t i = 0;
  while (i < s.size()) {
    const auto c = static_cast<unsigned char>(s[i]);
    std::size_t n = 0;
    if (c < 0x80) {
      n = 0;
    } else if ((c & 0xE0) == 0xC0 && c >= 0xC2) {
      n = 1;
    } else if ((c & 0xF0) == 0xE0) {
      n = 2;
    } else if ((c & 0xF8) == 0xF0 && c <= 0xF4) {
      n = 3;
    } else {
      return false;
    }
    if (n > 0 && i + n >= s.size()) return false;
    for (std::size_t k = 1; k <= n; ++k) {
      if ((static_cast<unsigned char>(s[i + k]) & 0xC0) != 0x80) return false;
    }
    i += n + 1;
  }
  return true;
}

std::string latin1_to_utf8(std::string_view s) {
  std::string out;
  out.reserve(s.size() * 2);
  for (char c : s) append_utf8(out, static_cast<unsigned char>(c));
  return out;
}

std::uint32_t hex_value(std::string_view hex) {
  std::uint32_t v = 0;
  for (char c : hex) {
    if (!std::isxdigit(static_cast<unsigned char>(c))) throw Error(Errc::kSyntax, "bad hex digit in string escape");
    v = v * 16 + static_cast<std::uint32_t>(std::isdigit(static_cast<unsigned char>(c)) ? c - '0' : (std::toupper(c) - 'A' + 10));
  }
  return v;
}

class Parser {
 public:
  explicit Parser(const std::vector<StepToken>& tokens) : toks_(tokens) {}

  StepFile run() {
    StepFile file;
    if (toks_.empty() || toks_[0].raw != "ISO-10303-21") {
      throw Error(Errc::kMissingHeader, "input does not start with ISO-10303-21;");
    }
    ++i_;
    expect(";");
    if (at_end() || cur().raw != "HEADER") throw Error(Errc::kMissingHeader, "missing HEADER section");
    ++i_;
    expect(";");
    while (!at_end() && cur().raw != "ENDSEC") {
      const std::string name = keyword();
      expect("(");
      ParamList params = param_list_body();
      expect(";");
      file.header.records[name] = std::move(params);
    }
    expect("ENDSEC");
    expect(";");
    read_header(file.header);

    bool any_data = false;
    while (!at_end() && cur().raw == "DATA") {
      any_data = true;
      ++i_;
      if (is(TokenKind::kPunct, "(")) {
        ++i_;
        param_list_body();
      }
      expect(";");
      while (!at_end() && cur().raw != "ENDSEC") instance(file);
      expect("ENDSEC");
      expect(";");
    }
    if (!any_data) fail_here("expected DATA section");
    expect("END-ISO-10303-21");
    expect(";");
    if (!at_end()) fail_here("content after END-ISO-10303-21;");
    return file;
  }

 private:
  const StepToken& cur() const { return toks_[i_]; }
  bool at_end() const { return i_ >= toks_.size(); }
  bool is(TokenKind k, std::string_view raw) const { return !at_end() && cur().kind == k && cur().raw == raw; }

  [[noreturn]] void fail_here(const std::string& what) const {
    if (at_end()) {
      const auto& last = toks_.back();
      throw StepSyntaxError(last.line, last.column + last.raw.size(), what + " at end of input");
    }
    throw StepSyntaxError(cur().line, cur().column, what + ", found '" + cur().raw + "'");
  }

  void expect(std::string_view raw) {
    if (at_end() || cur().raw != raw) fail_here("expected '" + std::string(raw) + "'");
    ++i_;
  }

  std::string keyword() {
    if (at_end() || cur().kind != TokenKind::kKeyword) fail_here("expected a keyword");
    std::string k = cur().raw;
    for (char& c : k) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    ++i_;
    return k;
  }

  // after '(' up to and including ')'
  ParamList param_list_body() {
    ParamList out;
    if (is(TokenKind::kPunct, ")")) {
      ++i_;
      return out;
    }
    while (true) {
      out.push_back(param());
      if (is(TokenKind::kPunct, ",")) {
        ++i_;
        continue;
      }
      expect(")");
      return out;
    }
  }

  Param param() {
    if (at_end()) fail_here("expected a parameter");
    const StepToken& t = cur();
    Param p;
    switch (t.kind) {
      case TokenKind::kKeyword: {
        Typed typed;
        typed.type = keyword();
        expect("(");
        typed.value = std::make_shared<Param>(param());
        expect(")");
        p.value = std::move(typed);
        return p;
      }
      case TokenKind::kInstance:
        p.value = Ref{std::stoull(t.raw.substr(1))};
        break;
      case TokenKind::kInteger:
        try {
          p.value = static_cast<std::int64_t>(std::stoll(t.raw));
        } catch (const std::out_of_range&) {
          fail_here("integer out of range");
        }
        break;
      case TokenKind::kReal:
        p.value = std::stod(t.raw);
        break;
      case TokenKind::kString:
        try {
          p.value = decode_step_string(t.raw);
        } catch (const Error& e) {
          throw StepSyntaxError(t.line, t.column, e.what());
        }
        break;
      case TokenKind::kEnum:
        p.value = EnumValue{t.raw.substr(1, t.raw.size() - 2)};
        break;
      case TokenKind::kBinary:
        p.value = Binary{t.raw.substr(1, t.raw.size() - 2)};
        break;
      case TokenKind::kPunct:
        if (t.raw == "$") {
          p.value = Unset{};
        } else if (t.raw == "*") {
          p.value = Derived{};
        } else if (t.raw == "(") {
          ++i_;
          p.value = param_list_body();
          return p;
        } else {
          fail_here("expected a parameter");
        }
        break;
    }
    ++i_;
    return p;
  }

  void instance(StepFile& file) {
    if (cur().kind != TokenKind::kInstance) fail_here("expected an entity instance name");
    const StepToken& name = cur();
    EntityInstance e;
    e.id = std::stoull(name.raw.substr(1));
    e.line = name.line;
    if (file.entities.contains(e.id)) throw StepSyntaxError(name.line, name.column, "duplicate instance " + name.raw);
    ++i_;
    expect("=");
    if (is(TokenKind::kPunct, "(")) {
      e.complex = true;
      ++i_;
      while (!is(TokenKind::kPunct, ")")) {
        EntityPart part;
        part.type = keyword();
        expect("(");
        part.params = param_list_body();
        e.parts.push_back(std::move(part));
      }
      ++i_;
      if (e.parts.empty()) fail_here("empty complex instance");
    } else {
      EntityPart part;
      part.type = keyword();
      expect("(");
      part.params = param_list_body();
      e.parts.push_back(std::move(part));
    }
    expect(";");
    file.entities.emplace(e.id, std::move(e));
  }

  static void read_header(StepHeader& h) {
    if (auto it = h.records.find("FILE_NAME"); it != h.records.end()) {
      const auto& p = it->second;
      if (!p.empty() && p[0].string()) h.file_name = *p[0].string();
      if (p.size() > 1 && p[1].string()) h.time_stamp = *p[1].string();
    }
    if (auto it = h.records.find("FILE_SCHEMA"); it != h.records.end()) {
      if (!it->second.empty() && it->second[0].list()) {
        for (const auto& s : *it->second[0].list()) {
          if (s.string()) h.schemas.push_back(*s.string());
        }
      }
    }
    if (!h.records.contains("FILE_SCHEMA")) throw Error(Errc::kMissingHeader, "header lacks FILE_SCHEMA");
  }

  const std::vector<StepToken>& toks_;
  std::size_t i_ = 0;
};

void check_refs(const ParamList& params, const StepFile& file, const EntityInstance& owner) {
  for (const auto& p : params) {
    if (const auto* r = p.ref()) {
      if (!file.entities.contains(r->id)) {
        throw Error(Errc::kUnresolvedReference, "#" + std::to_string(r->id) + " referenced by #" +
                                                    std::to_string(owner.id) + " (line " + std::to_string(owner.line) +
                                                    ") does not exist");
      }
    } else if (const auto* l = p.list()) {
      check_refs(*l, file, owner);
    } else if (const auto* t = p.typed()) {
      check_refs({*t->value}, file, owner);
    }
  }
}

}  // namespace

std::optional<double> Param::number() const {
  if (const auto* i = std::get_if<std::int64_t>(&value)) return static_cast<double>(*i);
  if (const auto* d = std::get_if<double>(&value)) return *d;
  return std::nullopt;
}

const EntityPart* EntityInstance::part(std::string_view type) const {
  for (const auto& p : parts) {
    if (p.type == type) return &p;
  }
  return nullptr;
}

std::vector<StepToken> tokenize_step(std::string_view text) { return Lexer(text).run(); }

std::string decode_step_string(std::string_view lexeme) {
  if (lexeme.size() < 2 || lexeme.front() != '\'' || lexeme.back() != '\'') {
    throw Error(Errc::kSyntax, "not a string literal");
  }
  const std::string_view s = lexeme.substr(1, lexeme.size() - 2);
  std::string out;
  std::size_t i = 0;
  while (i < s.size()) {
    const char c = s[i];
    if (c == '\'' && i + 1 < s.size() && s[i + 1] == '\'') {
      out += '\'';
      i += 2;
    } else if (c == '\\' && i + 1 < s.size()) {
      const std::string_view rest = s.substr(i);
      if (rest.starts_with("\\\\")) {
        out += '\\';
        i += 2;
      } else if (rest.starts_with("\\S\\") && rest.size() >= 4) {
        append_utf8(out, static_cast<unsigned char>(rest[3]) + 128u);
        i += 4;
      } else if (rest.starts_with("\\X\\") && rest.size() >= 5) {
        append_utf8(out, hex_value(rest.substr(3, 2)));
        i += 5;
      } else if (rest.starts_with("\\X2\\") || rest.starts_with("\\X4\\")) {
        const std::size_t width = rest[2] == '2' ? 4 : 8;
        const auto end = rest.find("\\X0\\", 4);
        if (end == std::string_view::npos || (end - 4) % width != 0) throw Error(Errc::kSyntax, "bad \\X2\\/\\X4\\ escape");
        for (std::size_t k = 4; k < end; k += width) append_utf8(out, hex_value(rest.substr(k, width)));
        i += end + 4;
      } else if (rest.size() >= 4 && rest[1] == 'P' && rest[3] == '\\') {
        i += 4;
      } else {
        out += c;
        ++i;
      }
    } else {
      out += c;
      ++i;
    }
  }
  return out;
}

StepFile parse_part21(std::string_view bytes) {
  std::string converted;
  std::string encoding = "UTF-8";
  if (!valid_utf8(bytes)) {
    converted = latin1_to_utf8(bytes);
    bytes = converted;
    encoding = "ISO-8859-1";
  }
  const auto tokens = tokenize_step(bytes);
  StepFile file = Parser(tokens).run();
  file.encoding = encoding;
  for (const auto& [id, e] : file.entities) {
    for (const auto& part : e.parts) check_refs(part.params, file, e);
  }
  return file;
}

std::pair<std::size_t, std::size_t> data_section_range(const std::vector<StepToken>& tokens) {
  for (std::size_t i = 0; i + 1 < tokens.size(); ++i) {
    if (tokens[i].kind != TokenKind::kKeyword || tokens[i].raw != "DATA") continue;
    std::size_t begin = i + 1;
    if (tokens[begin].raw == "(") {
      int depth = 0;
      for (; begin < tokens.size(); ++begin) {
        if (tokens[begin].raw == "(") ++depth;
        if (tokens[begin].raw == ")" && --depth == 0) break;
      }
      ++begin;
    }
    ++begin;  // ';'
    for (std::size_t j = begin; j < tokens.size(); ++j) {
      if (tokens[j].kind == TokenKind::kKeyword && tokens[j].raw == "ENDSEC") return {begin, j};
    }
  }
  return {0, 0};
}

}  // namespace dthread::geom
