#include "dthread/synth/dsm.hpp"

#include <algorithm>

#include "dthread/core/error.hpp"
#include "dthread/core/interaction_set.hpp"

namespace dthread::synth {

using core::InteractionKind;
using core::Uid;
using nlohmann::json;

const std::set<InteractionKind>* Dsm::cell(const Uid& row, const Uid& col) const {
  auto it = cells.find({row, col});
  return it == cells.end() ? nullptr : &it->second;
}

void validate_dsm(const Dsm& dsm) {
  const std::set<Uid> members(dsm.order.begin(), dsm.order.end());
  if (members.size() != dsm.order.size()) throw Error(Errc::kInvalidArgument, "DSM order has duplicates");
  for (const auto& [key, kinds] : dsm.cells) {
    const auto& [row, col] = key;
    if (row == col) throw Error(Errc::kInvalidArgument, "DSM diagonal cell " + row.str() + " is not empty");
    if (!members.contains(row) || !members.contains(col)) {
      throw Error(Errc::kInvalidArgument, "DSM cell (" + row.str() + ", " + col.str() + ") is outside the order");
    }
    if (kinds.empty()) throw Error(Errc::kInvalidArgument, "DSM stores an empty cell");
  }
}

Dsm build_dsm(const std::vector<Uid>& order, const std::vector<core::Interaction>& interactions) {
  Dsm dsm;
  dsm.order = order;
  const std::set<Uid> members(order.begin(), order.end());
  if (members.size() != order.size()) throw Error(Errc::kInvalidArgument, "DSM order has duplicates");
  for (const auto& i : interactions) {
    for (const Uid* end : {&i.a, &i.b}) {
      if (!members.contains(*end)) throw Error(Errc::kDanglingEndpoint, end->str() + " is not in the component list");
    }
    if (i.a == i.b) throw Error(Errc::kInvalidArgument, "self interaction on " + i.a.str());
    dsm.cells[{i.b, i.a}].insert(i.kind);
    if (!i.directed) dsm.cells[{i.a, i.b}].insert(i.kind);
  }
  return dsm;
}

ArchitectureGraph dsm_to_graph(const Dsm& dsm) {
  validate_dsm(dsm);
  ArchitectureGraph g;
  g.nodes = dsm.order;
  for (const auto& [key, kinds] : dsm.cells) {
    const auto& [row, col] = key;
    for (InteractionKind k : kinds) {
      const auto* back = dsm.cell(col, row);
      const bool symmetric = back != nullptr && back->contains(k);
      if (symmetric) {
        if (col < row) core::merge_interaction(g.edges, {col, row, k, false, {}});
      } else {
        core::merge_interaction(g.edges, {col, row, k, true, {}});
      }
    }
  }
  return g;
}

Dsm graph_to_dsm(const ArchitectureGraph& graph) { return build_dsm(graph.nodes, graph.edges); }

Dsm graph_to_dsm(const core::Model& model, const std::optional<std::set<Uid>>& filter) {
  std::vector<Uid> order;
  for (const auto& [uid, c] : model.components()) {
    if (!filter || filter->contains(uid)) order.push_back(uid);
  }
  const std::set<Uid> members(order.begin(), order.end());
  std::vector<core::Interaction> kept;
  for (const auto& i : model.interactions()) {
    if (members.contains(i.a) && members.contains(i.b)) kept.push_back(i);
  }
  return build_dsm(order, kept);
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string letters(const std::set<InteractionKind>& kinds) {
  std::string out;
  for (InteractionKind k : {InteractionKind::kSpatial, InteractionKind::kEnergy, InteractionKind::kInformation,
                            InteractionKind::kMaterial}) {
    if (!kinds.contains(k)) continue;
    if (!out.empty()) out += ';';
    out += core::kind_letter(k);
  }
  return out;
}

}  // namespace

std::string dsm_to_csv(const Dsm& dsm, const core::Model& model) {
  auto name = [&](const Uid& u) {
    auto it = model.components().find(u);
    return it == model.components().end() ? u.str() : it->second.name;
  };
  std::string out;
  for (const auto& col : dsm.order) out += "," + csv_field(name(col));
  out += '\n';
  for (const auto& row : dsm.order) {
    out += csv_field(name(row));
    for (const auto& col : dsm.order) {
      out += ',';
      if (const auto* kinds = dsm.cell(row, col)) out += letters(*kinds);
    }
    out += '\n';
  }
  return out;
}

json dsm_to_json(const Dsm& dsm, const core::Model* model) {
  json order = json::array();
  json names = json::array();
  for (const auto& u : dsm.order) {
    order.push_back(u.str());
    if (model) {
      auto it = model->components().find(u);
      names.push_back(it == model->components().end() ? u.str() : it->second.name);
    }
  }
  json cells = json::array();
  for (const auto& [key, kinds] : dsm.cells) {
    json ks = json::array();
    for (auto k : kinds) ks.push_back(std::string(core::to_string(k)));
    cells.push_back({{"row", key.first.str()}, {"col", key.second.str()}, {"kinds", std::move(ks)}});
  }
  json j = {{"order", std::move(order)}, {"cells", std::move(cells)}};
  if (model) j["names"] = std::move(names);
  return j;
}

Dsm dsm_from_json(const json& j) {
  try {
    Dsm dsm;
    for (const auto& u : j.at("order")) dsm.order.push_back(Uid::parse(u.get<std::string>()));
    for (const auto& c : j.at("cells")) {
      auto& kinds = dsm.cells[{Uid::parse(c.at("row").get<std::string>()), Uid::parse(c.at("col").get<std::string>())}];
      for (const auto& k : c.at("kinds")) kinds.insert(core::parse_enum<InteractionKind>(k.get<std::string>()));
    }
    validate_dsm(dsm);
    return dsm;
  } catch (const json::exception& e) {
    throw Error(Errc::kSchema, std::string("malformed DSM: ") + e.what());
  }
}

}  // namespace dthread::synth
