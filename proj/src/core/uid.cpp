#include "dthread/core/uid.hpp"

#include <algorithm>
#include <array>
#include <cctype>

#include "dthread/core/error.hpp"

namespace dthread::core {
namespace {

constexpr std::array<std::string_view, 6> kNamespaces = {kNsComponent,    kNsConstraint,  kNsDocument,
                                                         kNsGeometry,     kNsRequirement, kNsStateMachine};

}  // namespace

std::span<const std::string_view> known_namespaces() { return kNamespaces; }

bool is_known_namespace(std::string_view ns) {
  return std::find(kNamespaces.begin(), kNamespaces.end(), ns) != kNamespaces.end();
}

Uid Uid::parse(std::string_view text) {
  const auto dash = text.rfind('-');
  auto fail = [&] { return Error(Errc::kSyntax, "malformed uid '" + std::string(text) + "'"); };
  if (dash == std::string_view::npos || dash == 0 || dash + 1 == text.size()) throw fail();
  Uid uid;
  uid.ns = std::string(text.substr(0, dash));
  if (!std::all_of(uid.ns.begin(), uid.ns.end(), [](char c) { return std::islower(static_cast<unsigned char>(c)); })) {
    throw fail();
  }
  const auto digits = text.substr(dash + 1);
  if (digits.size() > 1 && digits.front() == '0') throw fail();
  for (char c : digits) {
    if (!std::isdigit(static_cast<unsigned char>(c))) throw fail();
    uid.serial = uid.serial * 10 + static_cast<std::uint64_t>(c - '0');
  }
  return uid;
}

}  // namespace dthread::core
