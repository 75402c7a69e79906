#include "dthread/geom/link.hpp"

#include <cctype>
#include <fstream>
#include <functional>
#include <sstream>

#include "dthread/core/digest.hpp"
#include "dthread/core/error.hpp"

namespace dthread::geom {

Aabb world_aabb(const StepModel& model, std::uint64_t product) {
  Aabb box;
  std::function<void(std::uint64_t, const Transform&)> walk = [&](std::uint64_t id, const Transform& t) {
    const auto& node = model.product(id);
    for (const auto& p : node.points) box.extend(t.apply(p));
    for (const auto& c : node.children) walk(c.child, compose_transforms(std::vector<Transform>{c.transform, t}));
  };
  walk(product, model.placement(product));
  return box;
}

PartGeometry world_geometry(const StepModel& model, std::uint64_t product) {
  PartGeometry g{world_aabb(model, product), std::nullopt};
  if (const auto& axis = model.product(product).primary_axis) {
    g.axis = model.placement(product).apply_direction(*axis).normalized();
  }
  return g;
}

std::string link_key(std::string_view name) {
  std::string out;
  for (unsigned char c : name) {
    if (std::isalnum(c)) out.push_back(static_cast<char>(std::tolower(c)));
  }
  return out;
}

LinkSummary link_geometry(core::Model& model, const std::string& relative_path, std::string_view bytes,
                          const StepModel& step) {
  core::GeometryArtifact artifact;
  artifact.path = relative_path;
  artifact.digest = sha256_hex(bytes);
  for (const auto& p : step.products) artifact.products.push_back(p.name);
  for (const auto& [uid, g] : model.geometry()) {
    if (g.path == relative_path) {
      model.retire(uid);
      break;
    }
  }
  LinkSummary summary;
  summary.geometry = model.add_geometry(artifact);

  std::map<std::string, std::vector<std::string>> by_key;
  for (const auto& p : step.products) by_key[link_key(p.name)].push_back(p.name);
  std::set<std::string> used;
  for (const auto& [uid, c] : model.components()) {
    if (model.locator(uid, core::Modality::kGeometry)) continue;
    auto it = by_key.find(link_key(c.name));
    if (it == by_key.end() || it->second.size() != 1) continue;
    model.bind(uid, core::Modality::kGeometry, core::product_locator(relative_path, it->second.front()));
    summary.linked.emplace_back(uid, it->second.front());
    used.insert(it->second.front());
  }
  for (const auto& p : step.products) {
    if (!used.contains(p.name)) summary.unmatched_products.push_back(p.name);
  }
  return summary;
}

GeometryIndex GeometryIndex::load(const core::Model& model, const std::filesystem::path& base_dir,
                                  std::vector<std::string>* warnings) {
  GeometryIndex index;
  for (const auto& [uid, g] : model.geometry()) {
    std::ifstream in(base_dir / g.path, std::ios::binary);
    if (!in) {
      if (warnings) warnings->push_back("geometry file " + g.path + " is missing");
      continue;
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    const std::string bytes = buf.str();
    if (warnings && sha256_hex(bytes) != g.digest) {
      warnings->push_back("geometry file " + g.path + " changed since it was linked");
    }
    try {
      index.add(g.path, parse_step(bytes));
    } catch (const Error& e) {
      if (warnings) warnings->push_back("geometry file " + g.path + ": " + e.what());
    }
  }
  return index;
}

const StepModel* GeometryIndex::file(const std::string& path) const {
  auto it = files_.find(path);
  return it == files_.end() ? nullptr : &it->second;
}

std::optional<PartGeometry> GeometryIndex::part(const core::Model& model, const Uid& component) const {
  auto locator = model.locator(component, core::Modality::kGeometry);
  if (!locator) return std::nullopt;
  auto parsed = core::parse_product_locator(*locator);
  if (!parsed || parsed->product.empty()) return std::nullopt;
  const StepModel* step = file(parsed->file);
  if (step == nullptr) return std::nullopt;
  try {
    return world_geometry(*step, step->product_named(parsed->product).id);
  } catch (const Error&) {
    return std::nullopt;
  }
}

}  // namespace dthread::geom
