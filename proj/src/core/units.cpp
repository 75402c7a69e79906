#include "dthread/core/units.hpp"

#include <algorithm>
#include <cctype>
#include <map>

#include "dthread/core/error.hpp"

namespace dthread {
namespace {

constexpr std::array<std::string_view, kBaseDimensionCount> kBaseSymbols = {"kg", "W", "V", "mm", "s"};

const std::map<std::string, BaseDimension, std::less<>>& attribute_table() {
  static const std::map<std::string, BaseDimension, std::less<>> table = {
      {"mass", BaseDimension::kMass},
      {"power", BaseDimension::kPower},
      {"power_capacity", BaseDimension::kPower},
      {"voltage", BaseDimension::kVoltage},
      {"supply", BaseDimension::kVoltage},
      {"demand", BaseDimension::kVoltage},
      {"length", BaseDimension::kLength},
      {"width", BaseDimension::kLength},
      {"height", BaseDimension::kLength},
      {"clearance", BaseDimension::kLength},
      {"duration", BaseDimension::kTime},
      {"period", BaseDimension::kTime},
  };
  return table;
}

}  // namespace

Dimension Dimension::of(BaseDimension base) {
  Dimension d;
  d.exponents[static_cast<std::size_t>(base)] = 1;
  return d;
}

bool Dimension::dimensionless() const {
  return std::all_of(exponents.begin(), exponents.end(), [](int e) { return e == 0; });
}

Dimension Dimension::operator*(const Dimension& other) const {
  Dimension d;
  for (std::size_t i = 0; i < kBaseDimensionCount; ++i) d.exponents[i] = exponents[i] + other.exponents[i];
  return d;
}

Dimension Dimension::operator/(const Dimension& other) const {
  Dimension d;
  for (std::size_t i = 0; i < kBaseDimensionCount; ++i) d.exponents[i] = exponents[i] - other.exponents[i];
  return d;
}

std::string Dimension::base_unit_symbol() const {
  std::string num;
  std::string den;
  for (std::size_t i = 0; i < kBaseDimensionCount; ++i) {
    const int e = exponents[i];
    if (e == 0) continue;
    std::string& part = e > 0 ? num : den;
    if (!part.empty()) part += '*';
    part += kBaseSymbols[i];
    if (std::abs(e) != 1) part += "^" + std::to_string(std::abs(e));
  }
  if (den.empty()) return num;
  return (num.empty() ? std::string("1") : num) + "/" + den;
}

const std::vector<UnitInfo>& unit_table() {
  static const std::vector<UnitInfo> table = {
      {"kg", BaseDimension::kMass, Decimal::from_int(1)},
      {"g", BaseDimension::kMass, Decimal::parse("0.001")},
      {"W", BaseDimension::kPower, Decimal::from_int(1)},
      {"mW", BaseDimension::kPower, Decimal::parse("0.001")},
      {"V", BaseDimension::kVoltage, Decimal::from_int(1)},
      {"mm", BaseDimension::kLength, Decimal::from_int(1)},
      {"m", BaseDimension::kLength, Decimal::from_int(1000)},
      {"s", BaseDimension::kTime, Decimal::from_int(1)},
  };
  return table;
}

const UnitInfo* find_unit(std::string_view symbol) {
  const auto& table = unit_table();
  auto it = std::find_if(table.begin(), table.end(), [&](const UnitInfo& u) { return u.symbol == symbol; });
  return it == table.end() ? nullptr : &*it;
}

Quantity Quantity::parse(std::string_view text) {
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.remove_prefix(1);
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);
  std::size_t split = 0;
  while (split < text.size() &&
         (std::isdigit(static_cast<unsigned char>(text[split])) || text[split] == '.' || text[split] == '-' ||
          text[split] == '+')) {
    ++split;
  }
  std::string_view number = text.substr(0, split);
  std::string_view unit = text.substr(split);
  while (!unit.empty() && std::isspace(static_cast<unsigned char>(unit.front()))) unit.remove_prefix(1);
  if (number.empty() || unit.empty()) {
    throw Error(Errc::kSyntax, "quantity '" + std::string(text) + "' must be '<decimal> <unit>'");
  }
  if (find_unit(unit) == nullptr) {
    throw Error(Errc::kUnitMismatch, "unknown unit '" + std::string(unit) + "'");
  }
  return Quantity{Decimal::parse(number), std::string(unit)};
}

std::string Quantity::to_string() const { return value.to_string() + " " + unit; }

Decimal Quantity::in_base_units() const {
  const UnitInfo* info = find_unit(unit);
  if (info == nullptr) throw Error(Errc::kUnitMismatch, "unknown unit '" + unit + "'");
  return value * info->to_base;
}

Dimension Quantity::dimension() const {
  const UnitInfo* info = find_unit(unit);
  if (info == nullptr) throw Error(Errc::kUnitMismatch, "unknown unit '" + unit + "'");
  return Dimension::of(info->dimension);
}

std::optional<Dimension> attribute_dimension(std::string_view name) {
  const auto& table = attribute_table();
  if (auto it = table.find(name); it != table.end()) return Dimension::of(it->second);
  for (std::string_view suffix : {std::string_view("_min"), std::string_view("_max")}) {
    if (name.size() > suffix.size() && name.substr(name.size() - suffix.size()) == suffix) {
      if (auto it = table.find(name.substr(0, name.size() - suffix.size())); it != table.end()) {
        return Dimension::of(it->second);
      }
    }
  }
  return std::nullopt;
}

std::vector<std::string> known_attribute_names() {
  std::vector<std::string> names;
  for (const auto& [name, _] : attribute_table()) names.push_back(name);
  return names;
}

}  // namespace dthread
