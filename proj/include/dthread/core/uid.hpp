#pragma once

#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace dthread::core {

/// Namespaced persistent identifier rendered as `<namespace>-<serial>`.
/// Ordering is by namespace, then numerically by serial.
struct Uid {
  std::string ns;
  std::uint64_t serial = 0;

  std::string str() const { return ns + "-" + std::to_string(serial); }

  /// Throws Errc::kSyntax for text that is not `<token>-<digits>`.
  static Uid parse(std::string_view text);

  friend auto operator<=>(const Uid&, const Uid&) = default;
  friend bool operator==(const Uid&, const Uid&) = default;
};

inline constexpr std::string_view kNsRequirement = "req";
inline constexpr std::string_view kNsComponent = "cmp";
inline constexpr std::string_view kNsDocument = "doc";
inline constexpr std::string_view kNsGeometry = "geo";
inline constexpr std::string_view kNsStateMachine = "sm";
inline constexpr std::string_view kNsConstraint = "con";

std::span<const std::string_view> known_namespaces();
bool is_known_namespace(std::string_view ns);

}  // namespace dthread::core
