#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dthread/core/decimal.hpp"

namespace dthread {

enum class BaseDimension : std::uint8_t { kMass, kPower, kVoltage, kLength, kTime };
inline constexpr std::size_t kBaseDimensionCount = 5;

/// Exponent vector over the base dimensions. Dimensionless is all zeros.
struct Dimension {
  std::array<int, kBaseDimensionCount> exponents{};

  static Dimension none() { return {}; }
  static Dimension of(BaseDimension base);

  bool dimensionless() const;
  Dimension operator*(const Dimension& other) const;
  Dimension operator/(const Dimension& other) const;
  friend bool operator==(const Dimension&, const Dimension&) = default;

  /// Base-unit rendering, e.g. "kg", "W", "kg*W/s"; empty when dimensionless.
  std::string base_unit_symbol() const;
};

struct UnitInfo {
  std::string_view symbol;
  BaseDimension dimension;
  Decimal to_base;  // multiply a value in this unit to get base units
};

/// The fixed unit table: kg, g, W, mW, V, mm, m, s. Base units are kg, W,
/// V, mm and s.
const std::vector<UnitInfo>& unit_table();
const UnitInfo* find_unit(std::string_view symbol);

/// A decimal value tagged with a unit symbol from the unit table.
struct Quantity {
  Decimal value;
  std::string unit;

  /// Parses "1.2 kg" / "1.2kg". Throws Errc::kSyntax or Errc::kUnitMismatch
  /// (unknown unit symbol).
  static Quantity parse(std::string_view text);
  std::string to_string() const;
  Decimal in_base_units() const;
  Dimension dimension() const;

  friend bool operator==(const Quantity&, const Quantity&) = default;
};

/// Known component attribute names and their dimensions. `<name>_min` and
/// `<name>_max` resolve to the dimension of `<name>`.
std::optional<Dimension> attribute_dimension(std::string_view name);
std::vector<std::string> known_attribute_names();

}  // namespace dthread
