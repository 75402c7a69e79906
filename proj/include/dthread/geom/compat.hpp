#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "dthread/core/types.hpp"
#include "dthread/core/units.hpp"
#include "dthread/geom/transform.hpp"

namespace dthread::geom {

using core::Uid;

struct GeoPolicy {
  double contact_tolerance = 0.5;  // mm, applied to each box
  double min_clearance = 1.0;      // mm
  double max_axis_angle = 1.0;     // degrees
};

enum class GeoRule { kClearanceViolation, kMissingContact, kAxisMisalignment };
std::string_view to_string(GeoRule rule);

struct GeoFinding {
  GeoRule rule = GeoRule::kMissingContact;
  Uid a;
  Uid b;
  Quantity measured;
  Quantity threshold;
};

/// A component's geometry in assembly-root coordinates.
struct PartGeometry {
  Aabb box;
  std::optional<Vec3> axis;
};

/// Rounds to the Decimal grid (1e-9).
Decimal to_decimal(double value);

/// `spatially_connected` says whether the pair also shares a Spatial
/// interaction; it exempts non-spatial interactions from clearance.
std::vector<GeoFinding> geometric_compatibility(const PartGeometry& a, const PartGeometry& b,
                                                const core::Interaction& interaction, bool spatially_connected,
                                                const GeoPolicy& policy = {});

/// Angle between two axes in degrees, ignoring orientation.
double axis_angle_degrees(const Vec3& a, const Vec3& b);

}  // namespace dthread::geom
