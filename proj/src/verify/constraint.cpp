#include "dthread/verify/constraint.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>

namespace dthread::verify {
namespace {

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  ConstraintSpec parse() {
    ConstraintSpec spec;
    spec.text = std::string(text_);
    spec.lhs = expr();
    skip_ws();
    const std::size_t at = pos_;
    spec.cmp = comparison();
    spec.rhs = expr();
    skip_ws();
    if (pos_ != text_.size()) fail("unexpected '" + std::string(text_.substr(pos_, 1)) + "'");
    if (spec.lhs.dimension != spec.rhs.dimension) {
      throw Error(Errc::kUnitMismatch, "column " + std::to_string(at + 1) + ": cannot compare " +
                                           describe(spec.lhs.dimension) + " with " + describe(spec.rhs.dimension));
    }
    return spec;
  }

 private:
  static std::string describe(const Dimension& d) {
    return d.dimensionless() ? std::string("a plain number") : "'" + d.base_unit_symbol() + "'";
  }

  [[noreturn]] void fail(const std::string& what) const { throw ConstraintSyntaxError(pos_, what); }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(std::string_view s) {
    skip_ws();
    if (text_.substr(pos_, s.size()) == s) {
      pos_ += s.size();
      return true;
    }
    return false;
  }

  void expect(std::string_view s) {
    if (!accept(s)) fail("expected '" + std::string(s) + "'");
  }

  CmpOp comparison() {
    if (accept("<=")) return CmpOp::kLe;
    if (accept(">=")) return CmpOp::kGe;
    if (accept("==")) return CmpOp::kEq;
    if (accept("<")) return CmpOp::kLt;
    if (accept(">")) return CmpOp::kGt;
    fail("expected a comparison (<=, <, >=, >, ==)");
  }

  Expr binary(ExprOp op, Expr l, Expr r, std::size_t at) {
    Expr e;
    e.op = op;
    if (op == ExprOp::kAdd || op == ExprOp::kSub) {
      if (l.dimension != r.dimension) {
        throw Error(Errc::kUnitMismatch, "column " + std::to_string(at + 1) + ": cannot add " +
                                             describe(l.dimension) + " and " + describe(r.dimension));
      }
      e.dimension = l.dimension;
    } else {
      e.dimension = op == ExprOp::kMul ? l.dimension * r.dimension : l.dimension / r.dimension;
    }
    e.args = {std::move(l), std::move(r)};
    return e;
  }

  Expr expr() {
    Expr e = term();
    for (;;) {
      skip_ws();
      const std::size_t at = pos_;
      if (accept("+")) {
        e = binary(ExprOp::kAdd, std::move(e), term(), at);
      } else if (accept("-")) {
        e = binary(ExprOp::kSub, std::move(e), term(), at);
      } else {
        return e;
      }
    }
  }

  Expr term() {
    Expr e = factor();
    for (;;) {
      skip_ws();
      const std::size_t at = pos_;
      if (accept("*")) {
        e = binary(ExprOp::kMul, std::move(e), factor(), at);
      } else if (accept("/")) {
        e = binary(ExprOp::kDiv, std::move(e), factor(), at);
      } else {
        return e;
      }
    }
  }

  Expr factor() {
    if (accept("-")) {
      Expr inner = factor();
      Expr e;
      e.op = ExprOp::kNeg;
      e.dimension = inner.dimension;
      e.args = {std::move(inner)};
      return e;
    }
    return primary();
  }

  std::string word() {
    skip_ws();
    const std::size_t start = pos_;
    if (pos_ >= text_.size() || !ident_start(text_[pos_])) return {};
    while (pos_ < text_.size() && ident_char(text_[pos_])) ++pos_;
    return std::string(text_.substr(start, pos_ - start));
  }

  Expr primary() {
    skip_ws();
    if (pos_ >= text_.size()) fail("unexpected end of constraint");
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      Expr e = expr();
      expect(")");
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return literal();
    const std::size_t at = pos_;
    const std::string name = word();
    if (name.empty()) fail("unexpected '" + std::string(1, c) + "'");
    static const std::map<std::string, ExprOp> functions = {
        {"attr", ExprOp::kAttr}, {"sum", ExprOp::kSum}, {"max", ExprOp::kMax}, {"min", ExprOp::kMin},
        {"count", ExprOp::kCount}};
    auto f = functions.find(name);
    if (f == functions.end()) {
      pos_ = at;
      fail("unknown function '" + name + "'");
    }
    expect("(");
    Expr e;
    e.op = f->second;
    e.selector = selector(f->second == ExprOp::kCount ? ")" : ",");
    if (e.op == ExprOp::kCount) {
      expect(")");
      return e;
    }
    expect(",");
    skip_ws();
    const std::size_t attr_at = pos_;
    e.attribute = word();
    if (e.attribute.empty()) fail("expected an attribute name");
    auto dim = attribute_dimension(e.attribute);
    if (!dim) {
      throw Error(Errc::kUnknownAttribute,
                  "column " + std::to_string(attr_at + 1) + ": unknown attribute '" + e.attribute + "'");
    }
    e.dimension = *dim;
    expect(")");
    return e;
  }

  std::string selector(std::string_view terminators) {
    skip_ws();
    const std::size_t start = pos_;
    while (pos_ < text_.size() && terminators.find(text_[pos_]) == std::string_view::npos && text_[pos_] != ')' &&
           text_[pos_] != '(') {
      ++pos_;
    }
    std::string s(text_.substr(start, pos_ - start));
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
    if (s.empty()) fail("expected a selector");
    if (s.starts_with("tag:") && s.size() == 4) fail("empty tag selector");
    return s;
  }

  Expr literal() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.')) ++pos_;
    Expr e;
    try {
      e.value = Decimal::parse(text_.substr(start, pos_ - start));
    } catch (const Error&) {
      pos_ = start;
      fail("malformed number");
    }
    const std::size_t unit_at = pos_;
    skip_ws();
    const std::size_t before_unit = pos_;
    const std::string unit = word();
    if (!unit.empty()) {
      const UnitInfo* info = find_unit(unit);
      if (info == nullptr) {
        pos_ = before_unit;
        throw Error(Errc::kUnitMismatch, "column " + std::to_string(before_unit + 1) + ": unknown unit '" + unit + "'");
      }
      e.unit = unit;
      e.dimension = Dimension::of(info->dimension);
    } else {
      pos_ = unit_at;
    }
    return e;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool glob(std::string_view pattern, std::string_view text) {
  std::size_t p = 0, t = 0, star = std::string_view::npos, mark = 0;
  while (t < text.size()) {
    if (p < pattern.size() && (pattern[p] == '?' || pattern[p] == text[t])) {
      ++p;
      ++t;
    } else if (p < pattern.size() && pattern[p] == '*') {
      star = p++;
      mark = t;
    } else if (star != std::string_view::npos) {
      p = star + 1;
      t = ++mark;
    } else {
      return false;
    }
  }
  while (p < pattern.size() && pattern[p] == '*') ++p;
  return p == pattern.size();
}

std::string_view op_name(ExprOp op) {
  switch (op) {
    case ExprOp::kLiteral: return "Lit";
    case ExprOp::kAttr: return "Attr";
    case ExprOp::kSum: return "Sum";
    case ExprOp::kMax: return "Max";
    case ExprOp::kMin: return "Min";
    case ExprOp::kCount: return "Count";
    case ExprOp::kAdd: return "Add";
    case ExprOp::kSub: return "Sub";
    case ExprOp::kMul: return "Mul";
    case ExprOp::kDiv: return "Div";
    case ExprOp::kNeg: return "Neg";
  }
  return "?";
}

std::string_view cmp_name(CmpOp op) {
  switch (op) {
    case CmpOp::kLe: return "Le";
    case CmpOp::kLt: return "Lt";
    case CmpOp::kGe: return "Ge";
    case CmpOp::kGt: return "Gt";
    case CmpOp::kEq: return "Eq";
  }
  return "?";
}

std::string_view cmp_symbol(CmpOp op) {
  switch (op) {
    case CmpOp::kLe: return "<=";
    case CmpOp::kLt: return "<";
    case CmpOp::kGe: return ">=";
    case CmpOp::kGt: return ">";
    case CmpOp::kEq: return "==";
  }
  return "?";
}

// --- evaluation -------------------------------------------------------------

struct Unevaluable {
  Severity severity;
  std::string rule;
  std::string message;
};

struct Evaluator {
  const core::Model& model;
  std::set<Uid> contributors;
  std::map<Uid, std::set<std::string>> missing;

  std::vector<const core::Component*> matching(const std::string& selector) const {
    std::vector<const core::Component*> out;
    for (const auto& [uid, c] : model.components()) {
      if (selector_matches(selector, c)) out.push_back(&c);
    }
    return out;
  }

  std::optional<Decimal> attribute(const core::Component& c, const std::string& name) {
    auto it = c.attributes.find(name);
    if (it == c.attributes.end() && (name.ends_with("_min") || name.ends_with("_max"))) {
      it = c.attributes.find(name.substr(0, name.size() - 4));
    }
    if (it == c.attributes.end()) {
      missing[c.uid].insert(name);
      return std::nullopt;
    }
    if (it->second.dimension() != *attribute_dimension(name)) {
      throw Unevaluable{Severity::kError, "constraint.attribute-unit",
                        c.name + "." + name + " is stated in '" + it->second.unit + "'"};
    }
    contributors.insert(c.uid);
    return it->second.in_base_units();
  }

  Decimal eval(const Expr& e) {
    switch (e.op) {
      case ExprOp::kLiteral:
        return e.unit.empty() ? e.value : e.value * find_unit(e.unit)->to_base;
      case ExprOp::kCount: {
        auto m = matching(e.selector);
        for (const auto* c : m) contributors.insert(c->uid);
        return Decimal::from_int(static_cast<std::int64_t>(m.size()));
      }
      case ExprOp::kAttr: {
        auto m = matching(e.selector);
        if (m.size() != 1) {
          throw Unevaluable{Severity::kError, "constraint.reference",
                            "attr(" + e.selector + ", ...) matches " + std::to_string(m.size()) +
                                " components; it must match exactly one"};
        }
        auto v = attribute(*m.front(), e.attribute);
        if (!v) {
          throw Unevaluable{Severity::kWarning, "constraint.unevaluable",
                            m.front()->name + " has no " + e.attribute + "; constraint not evaluated"};
        }
        return *v;
      }
      case ExprOp::kSum:
      case ExprOp::kMax:
      case ExprOp::kMin: {
        std::optional<Decimal> acc;
        for (const auto* c : matching(e.selector)) {
          auto v = attribute(*c, e.attribute);
          if (!v) continue;
          if (!acc) {
            acc = *v;
          } else if (e.op == ExprOp::kSum) {
            *acc += *v;
          } else if (e.op == ExprOp::kMax) {
            acc = std::max(*acc, *v);
          } else {
            acc = std::min(*acc, *v);
          }
        }
        if (!acc && e.op != ExprOp::kSum) {
          throw Unevaluable{Severity::kWarning, "constraint.unevaluable",
                            std::string(e.op == ExprOp::kMax ? "max" : "min") + "(" + e.selector + ", " + e.attribute +
                                ") has no values; constraint not evaluated"};
        }
        return acc.value_or(Decimal{});
      }
      case ExprOp::kAdd: return eval(e.args[0]) + eval(e.args[1]);
      case ExprOp::kSub: return eval(e.args[0]) - eval(e.args[1]);
      case ExprOp::kMul: return eval(e.args[0]) * eval(e.args[1]);
      case ExprOp::kDiv: return eval(e.args[0]) / eval(e.args[1]);
      case ExprOp::kNeg: return -eval(e.args[0]);
    }
    return {};
  }
};

bool holds(CmpOp op, Decimal l, Decimal r) {
  switch (op) {
    case CmpOp::kLe: return l <= r;
    case CmpOp::kLt: return l < r;
    case CmpOp::kGe: return l >= r;
    case CmpOp::kGt: return l > r;
    case CmpOp::kEq: return l == r;
  }
  return false;
}

std::string with_unit(Decimal v, const Dimension& d) {
  const std::string unit = d.base_unit_symbol();
  return unit.empty() ? v.to_string() : v.to_string() + " " + unit;
}

}  // namespace

ConstraintSpec parse_constraint(std::string_view text) { return Parser(text).parse(); }

std::vector<ConstraintSpec> parse_constraint_file(std::string_view text) {
  std::vector<ConstraintSpec> out;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    ++line_no;
    start = end + 1;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    while (!line.empty() && std::isspace(static_cast<unsigned char>(line.back()))) line.remove_suffix(1);
    while (!line.empty() && std::isspace(static_cast<unsigned char>(line.front()))) line.remove_prefix(1);
    if (line.empty()) continue;
    try {
      out.push_back(parse_constraint(line));
    } catch (const Error& e) {
      throw Error(e.code(), "line " + std::to_string(line_no) + ", " + e.what());
    }
  }
  return out;
}

std::string render(const Expr& e) {
  switch (e.op) {
    case ExprOp::kLiteral: return e.unit.empty() ? e.value.to_string() : e.value.to_string() + " " + e.unit;
    case ExprOp::kCount: return "Count(" + e.selector + ")";
    case ExprOp::kAttr:
    case ExprOp::kSum:
    case ExprOp::kMax:
    case ExprOp::kMin: return std::string(op_name(e.op)) + "(" + e.selector + ", " + e.attribute + ")";
    default: break;
  }
  std::string out(op_name(e.op));
  out += "(";
  for (std::size_t i = 0; i < e.args.size(); ++i) {
    if (i) out += ", ";
    out += render(e.args[i]);
  }
  return out + ")";
}

std::string render(const ConstraintSpec& spec) {
  return std::string(cmp_name(spec.cmp)) + "(" + render(spec.lhs) + ", " + render(spec.rhs) + ")";
}

bool selector_matches(std::string_view selector, const core::Component& component) {
  if (selector == "*") return true;
  if (selector.starts_with("tag:")) return component.function_tags.contains(std::string(selector.substr(4)));
  return glob(lower(selector), lower(component.name));
}

std::vector<Finding> evaluate_constraints(const core::Model& model, const std::vector<ConstraintSpec>& specs) {
  std::vector<Finding> out;
  for (const auto& spec : specs) {
    Evaluator ev{model, {}, {}};
    auto subjects = [&](const std::set<Uid>& extra) {
      std::vector<Uid> s;
      if (spec.uid) s.push_back(*spec.uid);
      s.insert(s.end(), extra.begin(), extra.end());
      return s;
    };
    Finding f;
    f.phase = Phase::kPhase2Constraint;
    f.evidence["constraint"] = spec.text;
    try {
      const Decimal l = ev.eval(spec.lhs);
      const Decimal r = ev.eval(spec.rhs);
      const bool ok = holds(spec.cmp, l, r);
      f.severity = ok ? Severity::kInfo : Severity::kError;
      f.rule = ok ? "constraint.satisfied" : "constraint.violated";
      f.subjects = subjects(ev.contributors);
      f.message = spec.text + (ok ? " holds: " : " is violated: ") + with_unit(l, spec.lhs.dimension) + " " +
                  std::string(cmp_symbol(spec.cmp)) + " " + with_unit(r, spec.rhs.dimension) +
                  (ok ? "" : " is false");
      f.evidence["lhs"] = with_unit(l, spec.lhs.dimension);
      f.evidence["rhs"] = with_unit(r, spec.rhs.dimension);
      auto& contributing = f.evidence["contributors"] = nlohmann::ordered_json::array();
      for (const auto& u : ev.contributors) contributing.push_back(u.str());
    } catch (const Unevaluable& u) {
      f.severity = u.severity;
      f.rule = u.rule;
      f.subjects = subjects(ev.contributors);
      f.message = spec.text + ": " + u.message;
    } catch (const Error& e) {
      f.severity = Severity::kError;
      f.rule = "constraint.evaluation";
      f.subjects = subjects(ev.contributors);
      f.message = spec.text + ": " + e.what();
    }
    out.push_back(std::move(f));
    for (const auto& [uid, names] : ev.missing) {
      for (const auto& name : names) {
        Finding w;
        w.phase = Phase::kPhase2Constraint;
        w.severity = Severity::kWarning;
        w.rule = "constraint.missing-attribute";
        w.subjects = subjects({uid});
        w.message = model.component(uid).name + " has no " + name + "; excluded from " + spec.text;
        w.evidence["constraint"] = spec.text;
        w.evidence["component"] = uid.str();
        w.evidence["attribute"] = name;
        out.push_back(std::move(w));
      }
    }
  }
  return out;
}

}  // namespace dthread::verify
