#include "dthread/core/decimal.hpp"

#include <cctype>
#include <cstdlib>
#include <limits>

#include "dthread/core/error.hpp"

namespace dthread {
namespace {

__extension__ typedef __int128 Wide;

std::int64_t narrow(Wide value) {
  if (value > std::numeric_limits<std::int64_t>::max() ||
      value < std::numeric_limits<std::int64_t>::min()) {
    throw Error(Errc::kOverflow, "decimal overflow");
  }
  return static_cast<std::int64_t>(value);
}

// Rounds num/den half away from zero.
Wide divide_rounded(Wide num, Wide den) {
  const bool negative = (num < 0) != (den < 0);
  const Wide n = num < 0 ? -num : num;
  const Wide d = den < 0 ? -den : den;
  Wide q = n / d;
  if ((n % d) * 2 >= d) ++q;
  return negative ? -q : q;
}

}  // namespace

Decimal Decimal::from_int(std::int64_t value) {
  return from_raw(narrow(static_cast<Wide>(value) * kScale));
}

Decimal Decimal::parse(std::string_view text) {
  auto fail = [&](const char* why) {
    return Error(Errc::kSyntax, std::string("invalid decimal '") + std::string(text) + "': " + why);
  };
  std::size_t i = 0;
  bool negative = false;
  if (i < text.size() && (text[i] == '+' || text[i] == '-')) {
    negative = text[i] == '-';
    ++i;
  }
  Wide mantissa = 0;
  int frac_digits = 0;
  bool any_digit = false;
  bool seen_point = false;
  for (; i < text.size(); ++i) {
    const char c = text[i];
    if (std::isdigit(static_cast<unsigned char>(c))) {
      any_digit = true;
      mantissa = mantissa * 10 + (c - '0');
      if (mantissa > static_cast<Wide>(1) << 100) throw Error(Errc::kOverflow, "decimal overflow");
      if (seen_point) ++frac_digits;
    } else if (c == '.' && !seen_point) {
      seen_point = true;
    } else {
      break;
    }
  }
  if (!any_digit) throw fail("no digits");
  int exponent = 0;
  if (i < text.size() && (text[i] == 'e' || text[i] == 'E')) {
    ++i;
    bool exp_negative = false;
    if (i < text.size() && (text[i] == '+' || text[i] == '-')) {
      exp_negative = text[i] == '-';
      ++i;
    }
    if (i == text.size()) throw fail("empty exponent");
    for (; i < text.size(); ++i) {
      if (!std::isdigit(static_cast<unsigned char>(text[i]))) throw fail("bad exponent");
      exponent = exponent * 10 + (text[i] - '0');
      if (exponent > 40) throw Error(Errc::kOverflow, "decimal exponent out of range");
    }
    if (exp_negative) exponent = -exponent;
  }
  if (i != text.size()) throw fail("trailing characters");

  int shift = kFractionDigits - frac_digits + exponent;
  while (shift > 0) {
    mantissa *= 10;
    if (mantissa > static_cast<Wide>(1) << 100) throw Error(Errc::kOverflow, "decimal overflow");
    --shift;
  }
  while (shift < 0) {
    if (mantissa % 10 != 0) throw fail("more than nine fractional digits");
    mantissa /= 10;
    ++shift;
  }
  return from_raw(narrow(negative ? -mantissa : mantissa));
}

std::string Decimal::to_string() const {
  Wide v = raw_;
  const bool negative = v < 0;
  if (negative) v = -v;
  const Wide whole = v / kScale;
  Wide frac = v % kScale;

  std::string out;
  if (whole == 0) {
    out = "0";
  } else {
    for (Wide w = whole; w > 0; w /= 10) out.insert(out.begin(), static_cast<char>('0' + static_cast<int>(w % 10)));
  }
  if (frac != 0) {
    std::string digits(kFractionDigits, '0');
    for (int k = kFractionDigits - 1; k >= 0; --k) {
      digits[static_cast<std::size_t>(k)] = static_cast<char>('0' + static_cast<int>(frac % 10));
      frac /= 10;
    }
    while (!digits.empty() && digits.back() == '0') digits.pop_back();
    out += '.';
    out += digits;
  }
  if (negative) out.insert(out.begin(), '-');
  return out;
}

Decimal Decimal::operator-() const { return from_raw(narrow(-static_cast<Wide>(raw_))); }

Decimal operator+(Decimal a, Decimal b) {
  return Decimal::from_raw(narrow(static_cast<Wide>(a.raw_) + b.raw_));
}

Decimal operator-(Decimal a, Decimal b) {
  return Decimal::from_raw(narrow(static_cast<Wide>(a.raw_) - b.raw_));
}

Decimal operator*(Decimal a, Decimal b) {
  return Decimal::from_raw(narrow(divide_rounded(static_cast<Wide>(a.raw_) * b.raw_, Decimal::kScale)));
}

Decimal operator/(Decimal a, Decimal b) {
  if (b.raw_ == 0) throw Error(Errc::kInvalidArgument, "division by zero");
  return Decimal::from_raw(narrow(divide_rounded(static_cast<Wide>(a.raw_) * Decimal::kScale, b.raw_)));
}

}  // namespace dthread
