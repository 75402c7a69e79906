#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dthread/core/error.hpp"
#include "dthread/core/model.hpp"
#include "dthread/core/units.hpp"
#include "dthread/verify/finding.hpp"

namespace dthread::verify {

/// Parse failure at a 0-based byte offset of the constraint text.
class ConstraintSyntaxError : public Error {
 public:
  ConstraintSyntaxError(std::size_t offset, const std::string& what)
      : Error(Errc::kSyntax, "at column " + std::to_string(offset + 1) + ": " + what), offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

enum class ExprOp { kLiteral, kAttr, kSum, kMax, kMin, kCount, kAdd, kSub, kMul, kDiv, kNeg };
enum class CmpOp { kLe, kLt, kGe, kGt, kEq };

struct Expr {
  ExprOp op = ExprOp::kLiteral;
  Decimal value;         // literal, in base units
  std::string unit;      // literal unit as written
  Dimension dimension;   // result dimension
  std::string selector;  // attr/aggregations
  std::string attribute;
  std::vector<Expr> args;
};

struct ConstraintSpec {
  std::optional<Uid> uid;
  std::string text;
  CmpOp cmp = CmpOp::kLe;
  Expr lhs;
  Expr rhs;
  std::optional<Uid> origin;
};

/// Throws ConstraintSyntaxError, Error(kUnitMismatch) and
/// Error(kUnknownAttribute).
ConstraintSpec parse_constraint(std::string_view text);

/// One statement per non-blank line; `#` starts a comment. Errors carry the
/// 1-based line number in the message.
std::vector<ConstraintSpec> parse_constraint_file(std::string_view text);

/// Renders the tree, e.g. `Le(Sum(*, mass), 4 kg)`.
std::string render(const ConstraintSpec& spec);
std::string render(const Expr& expr);

/// Selector semantics: `*` is every component, `tag:<t>` filters by
/// function tag, anything else is a case-insensitive glob over names.
bool selector_matches(std::string_view selector, const core::Component& component);

std::vector<Finding> evaluate_constraints(const core::Model& model, const std::vector<ConstraintSpec>& specs);

}  // namespace dthread::verify
