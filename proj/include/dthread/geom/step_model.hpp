#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dthread/geom/part21.hpp"
#include "dthread/geom/transform.hpp"

namespace dthread::geom {

struct ChildLink {
  std::uint64_t child = 0;  // PRODUCT instance id
  Transform transform;      // child coordinates -> parent coordinates
  std::uint64_t usage = 0;  // NEXT_ASSEMBLY_USAGE_OCCURRENCE instance id
};

struct ProductNode {
  std::uint64_t id = 0;  // PRODUCT instance id
  std::string product_id;
  std::string name;
  std::vector<ChildLink> children;
  std::vector<Vec3> points;          // millimetres, product coordinates
  std::optional<Vec3> primary_axis;  // unit vector
};

struct StepModel {
  StepFile file;
  std::vector<ProductNode> products;  // PRODUCT instance order
  double length_scale = 1.0;          // file length unit -> mm
  std::string length_unit = "mm";
  std::vector<std::string> notes;     // non-fatal observations

  const ProductNode& product(std::uint64_t id) const;
  /// Case-sensitive name lookup. Throws Errc::kUnknownProduct, or
  /// Errc::kDuplicateName when two products share the name.
  const ProductNode& product_named(std::string_view name) const;
  /// Products that are nobody's child.
  std::vector<std::uint64_t> roots() const;
  /// Placement of a product in its root's coordinates along the first
  /// assembly path found (depth-first from roots in id order).
  Transform placement(std::uint64_t id) const;
};

/// parse_part21 followed by the product-structure lift. Throws the
/// parse_part21 errors plus Errc::kCyclicAssembly and
/// Errc::kNonRigidTransform.
StepModel parse_step(std::string_view bytes);
StepModel load_step(const std::filesystem::path& path);

/// Points of the product (and of every descendant mapped through the
/// composed assembly transforms). Throws Errc::kUnknownProduct.
Aabb compute_aabb(const StepModel& model, std::uint64_t product, bool include_children);

}  // namespace dthread::geom
