#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dthread/core/model.hpp"
#include "dthread/geom/compat.hpp"
#include "dthread/geom/step_model.hpp"

namespace dthread::geom {

/// Box of a product and its descendants in the coordinates of its root,
/// built from the points themselves rather than from rotated child boxes.
Aabb world_aabb(const StepModel& model, std::uint64_t product);
PartGeometry world_geometry(const StepModel& model, std::uint64_t product);

/// Lowercase alphanumerics only; used to pair component and product names.
std::string link_key(std::string_view name);

struct LinkSummary {
  Uid geometry;
  std::vector<std::pair<Uid, std::string>> linked;  // component, product
  std::vector<std::string> unmatched_products;
};

/// Records the file as a GeometryArtifact (replacing one with the same
/// path) and binds every component whose name matches a product name and
/// that has no Geometry binding yet.
LinkSummary link_geometry(core::Model& model, const std::string& relative_path, std::string_view bytes,
                          const StepModel& step);

/// Parsed geometry files of a model, keyed by artifact path.
class GeometryIndex {
 public:
  /// Loads every GeometryArtifact relative to `base_dir`. Unreadable or
  /// changed files are reported in `warnings` and skipped or used as-is.
  static GeometryIndex load(const core::Model& model, const std::filesystem::path& base_dir,
                            std::vector<std::string>* warnings = nullptr);
  void add(const std::string& path, StepModel step) { files_.insert_or_assign(path, std::move(step)); }

  /// Geometry of a component's bound product, or nullopt when the component
  /// has no Geometry binding or it does not resolve.
  std::optional<PartGeometry> part(const core::Model& model, const Uid& component) const;
  const StepModel* file(const std::string& path) const;

 private:
  std::map<std::string, StepModel> files_;
};

}  // namespace dthread::geom
