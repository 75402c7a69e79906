#include "dthread/core/types.hpp"

#include <array>
#include <cctype>

#include "dthread/core/error.hpp"

namespace dthread::core {
namespace {

constexpr std::array<std::string_view, 3> kModality = {"Document", "Geometry", "Graph"};
constexpr std::array<std::string_view, 6> kTraceKind = {"Refines",   "Implements", "Tests",
                                                        "Satisfies", "Allocates",  "DerivedFrom"};
constexpr std::array<std::string_view, 3> kDirection = {"Forward", "Backward", "Both"};
constexpr std::array<std::string_view, 4> kInteractionKind = {"Spatial", "Energy", "Information", "Material"};
constexpr std::array<std::string_view, 5> kReqType = {"Functional", "Performance", "Interface", "Constraint",
                                                      "Other"};
constexpr std::array<std::string_view, 3> kPriority = {"Low", "Med", "High"};
constexpr std::array<std::string_view, 4> kReqStatus = {"Proposed", "Accepted", "Rejected", "Modified"};
constexpr std::array<std::string_view, 2> kDocFormat = {"PlainText", "Markdown"};

std::string fold(std::string_view text) {
  std::string out;
  for (char c : text) {
    if (c == '-' || c == '_' || c == ' ') continue;
    out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

template <typename Enum, std::size_t N>
Enum lookup(const std::array<std::string_view, N>& names, std::string_view text, std::string_view what) {
  const std::string key = fold(text);
  for (std::size_t i = 0; i < N; ++i) {
    if (fold(names[i]) == key) return static_cast<Enum>(i);
  }
  throw Error(Errc::kInvalidArgument, "unknown " + std::string(what) + " '" + std::string(text) + "'");
}

}  // namespace

std::string_view to_string(Modality v) { return kModality[static_cast<std::size_t>(v)]; }
std::string_view to_string(TraceKind v) { return kTraceKind[static_cast<std::size_t>(v)]; }
std::string_view to_string(Direction v) { return kDirection[static_cast<std::size_t>(v)]; }
std::string_view to_string(InteractionKind v) { return kInteractionKind[static_cast<std::size_t>(v)]; }
std::string_view to_string(ReqType v) { return kReqType[static_cast<std::size_t>(v)]; }
std::string_view to_string(Priority v) { return kPriority[static_cast<std::size_t>(v)]; }
std::string_view to_string(ReqStatus v) { return kReqStatus[static_cast<std::size_t>(v)]; }
std::string_view to_string(DocFormat v) { return kDocFormat[static_cast<std::size_t>(v)]; }

template <> Modality parse_enum<Modality>(std::string_view t) { return lookup<Modality>(kModality, t, "modality"); }
template <> TraceKind parse_enum<TraceKind>(std::string_view t) { return lookup<TraceKind>(kTraceKind, t, "trace kind"); }
template <> Direction parse_enum<Direction>(std::string_view t) { return lookup<Direction>(kDirection, t, "direction"); }
template <> InteractionKind parse_enum<InteractionKind>(std::string_view t) {
  if (t.size() == 1) return kind_from_letter(t[0]);
  return lookup<InteractionKind>(kInteractionKind, t, "interaction kind");
}
template <> ReqType parse_enum<ReqType>(std::string_view t) { return lookup<ReqType>(kReqType, t, "requirement type"); }
template <> Priority parse_enum<Priority>(std::string_view t) { return lookup<Priority>(kPriority, t, "priority"); }
template <> ReqStatus parse_enum<ReqStatus>(std::string_view t) { return lookup<ReqStatus>(kReqStatus, t, "status"); }
template <> DocFormat parse_enum<DocFormat>(std::string_view t) { return lookup<DocFormat>(kDocFormat, t, "format"); }

char kind_letter(InteractionKind kind) { return kInteractionKind[static_cast<std::size_t>(kind)][0]; }

InteractionKind kind_from_letter(char letter) {
  switch (std::toupper(static_cast<unsigned char>(letter))) {
    case 'S': return InteractionKind::kSpatial;
    case 'E': return InteractionKind::kEnergy;
    case 'I': return InteractionKind::kInformation;
    case 'M': return InteractionKind::kMaterial;
    default: break;
  }
  throw Error(Errc::kInvalidArgument, std::string("unknown interaction letter '") + letter + "'");
}

}  // namespace dthread::core
