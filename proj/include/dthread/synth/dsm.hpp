#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "dthread/core/model.hpp"

namespace dthread::synth {

/// Square component matrix. Row = receiver, column = source: a directed
/// interaction a -> b puts its kind in cell (b, a); an undirected one fills
/// both cells.
struct Dsm {
  std::vector<core::Uid> order;
  std::map<std::pair<core::Uid, core::Uid>, std::set<core::InteractionKind>> cells;  // (row, col)

  const std::set<core::InteractionKind>* cell(const core::Uid& row, const core::Uid& col) const;
  friend bool operator==(const Dsm&, const Dsm&) = default;
};

/// Throws Errc::kInvalidArgument on duplicate order entries, diagonal or
/// empty cells, and cells outside the order.
void validate_dsm(const Dsm& dsm);

/// Throws Errc::kDanglingEndpoint when an interaction endpoint is not in
/// `order`.
Dsm build_dsm(const std::vector<core::Uid>& order, const std::vector<core::Interaction>& interactions);

/// Node set plus interactions: the graph view of a DSM.
struct ArchitectureGraph {
  std::vector<core::Uid> nodes;
  std::vector<core::Interaction> edges;  // canonical order, empty rationale
  friend bool operator==(const ArchitectureGraph&, const ArchitectureGraph&) = default;
};

/// A symmetric pair of cells of one kind becomes one undirected edge.
ArchitectureGraph dsm_to_graph(const Dsm& dsm);
Dsm graph_to_dsm(const ArchitectureGraph& graph);

/// DSM of the model's components (uid order), optionally restricted to
/// `filter`, over the model's interactions between included components.
Dsm graph_to_dsm(const core::Model& model, const std::optional<std::set<core::Uid>>& filter = std::nullopt);

/// Header row and column of component names; cells are `;`-joined kind
/// letters in S,E,I,M order. RFC 4180 quoting, LF line ends.
std::string dsm_to_csv(const Dsm& dsm, const core::Model& model);

/// {"order": [...], "names": [...], "cells": [{"row", "col", "kinds"}]}.
nlohmann::json dsm_to_json(const Dsm& dsm, const core::Model* model = nullptr);
Dsm dsm_from_json(const nlohmann::json& j);

}  // namespace dthread::synth
