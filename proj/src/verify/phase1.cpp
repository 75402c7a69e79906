#include "dthread/verify/phase1.hpp"

#include <fstream>

#include "dthread/core/error.hpp"

namespace dthread::verify {
namespace {

using core::InteractionKind;

std::vector<Uid> pair_of(const core::Interaction& i) { return {std::min(i.a, i.b), std::max(i.a, i.b)}; }

std::string arrow(const core::Model& model, const core::Interaction& i) {
  return model.component(i.a).name + (i.directed ? " -> " : " <-> ") + model.component(i.b).name + " (" +
         std::string(core::to_string(i.kind)) + ")";
}

std::string quantity_text(Decimal v, std::string_view attribute) {
  return v.to_string() + " " + attribute_dimension(attribute)->base_unit_symbol();
}

}  // namespace

RelationalRules RelationalRules::defaults() {
  RelationalRules r;
  r.add({"electronics", "electronics", InteractionKind::kMaterial, false,
         "electronics exchange energy and data, never material"});
  r.add({"electronics", "optics", InteractionKind::kMaterial, false, "no material flow into optical payloads"});
  r.add({"optics", "optics", InteractionKind::kMaterial, false, "optical assemblies are sealed"});
  return r;
}

RelationalRules RelationalRules::from_json(const nlohmann::json& j) {
  try {
    RelationalRules r;
    for (const auto& e : j.at("rules")) {
      const auto& tags = e.at("tags");
      if (!tags.is_array() || tags.size() != 2) throw Error(Errc::kSchema, "rule tags must be a pair");
      r.add({tags[0].get<std::string>(), tags[1].get<std::string>(),
             core::parse_enum<InteractionKind>(e.at("kind").get<std::string>()), e.at("allow").get<bool>(),
             e.value("note", std::string())});
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::kSchema, std::string("relational rules: ") + e.what());
  } catch (const Error& e) {
    throw Error(Errc::kSchema, std::string("relational rules: ") + e.what());
  }
}

RelationalRules RelationalRules::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::kIo, "cannot open " + path.string());
  try {
    return from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(Errc::kSchema, path.string() + ": " + e.what());
  }
}

nlohmann::ordered_json RelationalRules::to_json() const {
  nlohmann::ordered_json rules = nlohmann::ordered_json::array();
  for (const auto& r : rules_) {
    nlohmann::ordered_json e;
    e["tags"] = {r.tag_a, r.tag_b};
    e["kind"] = core::to_string(r.kind);
    e["allow"] = r.allow;
    if (!r.note.empty()) e["note"] = r.note;
    rules.push_back(std::move(e));
  }
  return {{"rules", rules}};
}

const RelationalRule* RelationalRules::forbidding(const core::Component& a, const core::Component& b,
                                                  InteractionKind kind) const {
  auto has = [](const core::Component& c, const std::string& tag) {
    return tag == "*" || c.function_tags.contains(tag);
  };
  for (const auto& r : rules_) {
    if (r.allow || r.kind != kind) continue;
    if ((has(a, r.tag_a) && has(b, r.tag_b)) || (has(a, r.tag_b) && has(b, r.tag_a))) return &r;
  }
  return nullptr;
}

std::optional<Interval> attribute_interval(const core::Component& c, const std::string& name) {
  auto get = [&](const std::string& key) -> std::optional<Decimal> {
    auto it = c.attributes.find(key);
    if (it == c.attributes.end()) return std::nullopt;
    return it->second.in_base_units();
  };
  auto lo = get(name + "_min");
  auto hi = get(name + "_max");
  auto single = get(name);
  if (!lo) lo = single;
  if (!hi) hi = single;
  if (!lo && !hi) return std::nullopt;
  if (!lo) lo = hi;
  if (!hi) hi = lo;
  return Interval{*lo, *hi};
}

std::vector<Finding> integrity_findings(const core::Model& model) {
  std::vector<Finding> out;
  const auto report = model.validate_integrity();
  for (const auto& b : report.dangling_bindings) {
    Finding f{Phase::kPhase1Relational, Severity::kError, "integrity.dangling-binding", {b.uid},
              b.uid.str() + " " + std::string(core::to_string(b.modality)) + " locator '" + b.locator +
                  "' does not resolve",
              {}};
    f.evidence["locator"] = b.locator;
    out.push_back(std::move(f));
  }
  for (const auto& e : report.dangling_edges) {
    Finding f{Phase::kPhase1Relational, Severity::kError, "integrity.dangling-edge", {e.src, e.dst},
              e.src.str() + " " + std::string(core::to_string(e.kind)) + " " + e.dst.str() +
                  " touches a node that no longer exists",
              {}};
    out.push_back(std::move(f));
  }
  for (const auto& u : report.orphan_uids) {
    out.push_back({Phase::kPhase1Relational, Severity::kError, "integrity.orphan-uid", {u},
                   u.str() + " is registered but has no node", {}});
  }
  sort_findings(out);
  return out;
}

std::vector<Finding> run_phase1(const core::Model& model, const geom::GeometryIndex* geometry,
                                const geom::GeoPolicy& geo, const RelationalRules& rules) {
  std::vector<Finding> geometric, functional, relational;
  for (const auto& i : model.interactions()) {
    if (!model.components().contains(i.a) || !model.components().contains(i.b)) continue;
    const auto& ca = model.component(i.a);
    const auto& cb = model.component(i.b);

    // geometric
    std::optional<geom::PartGeometry> ga, gb;
    if (geometry != nullptr) {
      ga = geometry->part(model, i.a);
      gb = geometry->part(model, i.b);
    }
    if (ga && gb) {
      for (const auto& g : geom::geometric_compatibility(*ga, *gb, i, model.spatially_connected(i.a, i.b), geo)) {
        Finding f{Phase::kPhase1Geometric, Severity::kError, "", pair_of(i), "", {}};
        switch (g.rule) {
          case geom::GeoRule::kMissingContact:
            f.rule = "geometric.missing-contact";
            f.message = arrow(model, i) + ": parts are " + g.measured.to_string() + " apart, contact needs at most " +
                        g.threshold.to_string();
            break;
          case geom::GeoRule::kClearanceViolation:
            f.rule = "geometric.clearance";
            f.message = arrow(model, i) + ": clearance " + g.measured.to_string() + " is below " +
                        g.threshold.to_string();
            break;
          case geom::GeoRule::kAxisMisalignment:
            f.rule = "geometric.axis-misalignment";
            f.message = arrow(model, i) + ": axes differ by " + g.measured.to_string() + ", limit " +
                        g.threshold.to_string();
            break;
        }
        f.evidence["check"] = geom::to_string(g.rule);
        f.evidence["measured"] = g.measured.to_string();
        f.evidence["threshold"] = g.threshold.to_string();
        geometric.push_back(std::move(f));
      }
    } else {
      std::vector<std::string> missing;
      if (!ga) missing.push_back(ca.name);
      if (!gb) missing.push_back(cb.name);
      Finding f{Phase::kPhase1Geometric, Severity::kInfo, "geometric.not-checked", pair_of(i), "", {}};
      f.message = arrow(model, i) + ": no resolvable geometry for " + missing.front() +
                  (missing.size() > 1 ? " and " + missing.back() : std::string());
      geometric.push_back(std::move(f));
    }

    // functional
    if (i.kind == InteractionKind::kEnergy) {
      std::vector<std::pair<const core::Component*, const core::Component*>> orientations{{&ca, &cb}};
      if (!i.directed) orientations.emplace_back(&cb, &ca);
      for (auto [supplier, consumer] : orientations) {
        auto supply = attribute_interval(*supplier, "supply");
        auto demand = attribute_interval(*consumer, "demand");
        if (!supply || !demand) continue;
        if (supply->lo <= demand->lo && demand->hi <= supply->hi) continue;
        Finding f{Phase::kPhase1Functional, Severity::kError, "functional.supply-demand", pair_of(i), "", {}};
        const std::string s = "[" + quantity_text(supply->lo, "supply") + ", " + quantity_text(supply->hi, "supply") + "]";
        const std::string d = "[" + quantity_text(demand->lo, "demand") + ", " + quantity_text(demand->hi, "demand") + "]";
        f.message = consumer->name + " demands " + d + " but " + supplier->name + " supplies " + s;
        f.evidence["supplier"] = supplier->uid.str();
        f.evidence["consumer"] = consumer->uid.str();
        f.evidence["supply"] = s;
        f.evidence["demand"] = d;
        functional.push_back(std::move(f));
      }
    }

    // relational
    if (const RelationalRule* r = rules.forbidding(ca, cb, i.kind)) {
      Finding f{Phase::kPhase1Relational, Severity::kError, "relational.forbidden", pair_of(i), "", {}};
      f.message = arrow(model, i) + " is forbidden between '" + r->tag_a + "' and '" + r->tag_b + "'" +
                  (r->note.empty() ? std::string() : ": " + r->note);
      f.evidence["rule"] = {r->tag_a, r->tag_b, core::to_string(r->kind)};
      relational.push_back(std::move(f));
    }
  }
  std::vector<Finding> out;
  for (auto* group : {&geometric, &functional, &relational}) {
    sort_findings(*group);
    out.insert(out.end(), group->begin(), group->end());
  }
  return out;
}

}  // namespace dthread::verify
