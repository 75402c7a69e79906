#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace dthread {

/// Exact fixed-point decimal with nine fractional digits.
///
/// Addition, subtraction and comparison are exact. Multiplication and
/// division round half away from zero at the ninth fractional digit.
/// Every operation that would leave the representable range throws
/// `Error(Errc::kOverflow)`.
class Decimal {
 public:
  static constexpr int kFractionDigits = 9;
  static constexpr std::int64_t kScale = 1'000'000'000;

  constexpr Decimal() = default;

  static constexpr Decimal from_raw(std::int64_t raw) {
    Decimal d;
    d.raw_ = raw;
    return d;
  }
  static Decimal from_int(std::int64_t value);

  /// Accepts `[+-]digits[.digits][e[+-]digits]`. Throws Errc::kSyntax on
  /// malformed text and on values that cannot be represented exactly.
  static Decimal parse(std::string_view text);

  constexpr std::int64_t raw() const { return raw_; }
  double to_double() const { return static_cast<double>(raw_) / kScale; }

  /// Shortest exact rendering: no exponent, no trailing fractional zeros.
  std::string to_string() const;

  constexpr bool is_zero() const { return raw_ == 0; }
  constexpr bool is_negative() const { return raw_ < 0; }

  Decimal operator-() const;
  friend Decimal operator+(Decimal a, Decimal b);
  friend Decimal operator-(Decimal a, Decimal b);
  friend Decimal operator*(Decimal a, Decimal b);
  friend Decimal operator/(Decimal a, Decimal b);
  Decimal& operator+=(Decimal other) { return *this = *this + other; }
  Decimal& operator-=(Decimal other) { return *this = *this - other; }

  friend constexpr auto operator<=>(Decimal, Decimal) = default;
  friend constexpr bool operator==(Decimal, Decimal) = default;

 private:
  std::int64_t raw_ = 0;
};

}  // namespace dthread
