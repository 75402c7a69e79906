#include "dthread/synth/verbs.hpp"

#include <fstream>

#include "dthread/core/error.hpp"
#include "dthread/docpipe/text.hpp"

namespace dthread::synth {

using nlohmann::json;

namespace {

constexpr const char* kDefaultTable = R"({
  "attach": {"kind": "Spatial", "directed": false},
  "charge": {"kind": "Energy", "directed": true},
  "command": {"kind": "Information", "directed": true},
  "downlink": {"kind": "Information", "directed": true},
  "drive": {"kind": "Energy", "directed": true},
  "feed": {"kind": "Material", "directed": true},
  "forward": {"kind": "Information", "directed": true},
  "house": {"kind": "Spatial", "directed": false},
  "mount": {"kind": "Spatial", "directed": false},
  "power": {"kind": "Energy", "directed": true},
  "pump": {"kind": "Material", "directed": true},
  "relay": {"kind": "Information", "directed": true},
  "report": {"kind": "Information", "directed": true},
  "secure": {"kind": "Spatial", "directed": false},
  "send": {"kind": "Information", "directed": true},
  "supply": {"kind": "Energy", "directed": true},
  "support": {"kind": "Spatial", "directed": false},
  "transmit": {"kind": "Information", "directed": true},
  "vent": {"kind": "Material", "directed": true}
})";

}  // namespace

VerbTable VerbTable::defaults() { return from_json(json::parse(kDefaultTable)); }

VerbTable VerbTable::from_json(const json& j) {
  if (!j.is_object()) throw Error(Errc::kSchema, "verb table must be an object");
  VerbTable table;
  for (const auto& [verb, rule] : j.items()) {
    try {
      VerbRule r;
      r.kind = core::parse_enum<core::InteractionKind>(rule.at("kind").get<std::string>());
      r.directed = rule.at("directed").get<bool>();
      table.set(docpipe::to_lower(verb), r);
    } catch (const json::exception& e) {
      throw Error(Errc::kSchema, "/" + verb + ": " + e.what());
    } catch (const Error& e) {
      throw Error(Errc::kSchema, "/" + verb + ": " + e.what());
    }
  }
  return table;
}

VerbTable VerbTable::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::kIo, "cannot open verb table " + path.string());
  try {
    return from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw Error(Errc::kSchema, path.string() + ": " + e.what());
  }
}

json VerbTable::to_json() const {
  json j = json::object();
  for (const auto& [verb, r] : rules_) j[verb] = {{"kind", std::string(to_string(r.kind))}, {"directed", r.directed}};
  return j;
}

std::optional<std::pair<std::string, VerbRule>> VerbTable::match(std::string_view word) const {
  const std::string w = docpipe::to_lower(word);
  static const std::map<std::string, std::string, std::less<>> irregular = {
      {"sent", "send"}, {"fed", "feed"}, {"drove", "drive"}, {"driven", "drive"}, {"held", "hold"}};
  std::vector<std::string> forms{w};
  if (auto it = irregular.find(w); it != irregular.end()) forms.push_back(it->second);
  if (auto base = docpipe::verb_base(w)) forms.push_back(*base);
  auto strip = [&](std::string_view suffix, std::string_view add) {
    if (w.size() > suffix.size() + 2 && w.ends_with(suffix)) {
      forms.push_back(w.substr(0, w.size() - suffix.size()) + std::string(add));
    }
  };
  strip("ies", "y");
  strip("ied", "y");
  strip("es", "");
  strip("s", "");
  strip("ed", "");
  strip("ed", "e");
  strip("ing", "");
  strip("ing", "e");
  for (const auto& f : forms) {
    auto it = rules_.find(f);
    if (it != rules_.end()) return *it;
  }
  return std::nullopt;
}

}  // namespace dthread::synth
