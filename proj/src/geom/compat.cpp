#include "dthread/geom/compat.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace dthread::geom {

std::string_view to_string(GeoRule rule) {
  switch (rule) {
    case GeoRule::kClearanceViolation: return "ClearanceViolation";
    case GeoRule::kMissingContact: return "MissingContact";
    case GeoRule::kAxisMisalignment: return "AxisMisalignment";
  }
  return "?";
}

Decimal to_decimal(double value) { return Decimal::from_raw(std::llround(value * static_cast<double>(Decimal::kScale))); }

double axis_angle_degrees(const Vec3& a, const Vec3& b) {
  const double c = std::clamp(std::abs(a.normalized().dot(b.normalized())), 0.0, 1.0);
  return std::acos(c) * 180.0 / std::numbers::pi;
}

std::vector<GeoFinding> geometric_compatibility(const PartGeometry& a, const PartGeometry& b,
                                                const core::Interaction& interaction, bool spatially_connected,
                                                const GeoPolicy& policy) {
  std::vector<GeoFinding> out;
  auto finding = [&](GeoRule rule, double measured, double threshold, const char* unit) {
    out.push_back({rule, interaction.a, interaction.b, {to_decimal(measured), unit}, {to_decimal(threshold), unit}});
  };
  if (a.box.is_empty() || b.box.is_empty()) return out;
  if (interaction.kind == core::InteractionKind::kSpatial) {
    if (!a.box.inflated(policy.contact_tolerance).intersects(b.box.inflated(policy.contact_tolerance))) {
      finding(GeoRule::kMissingContact, a.box.chebyshev_gap(b.box), 2 * policy.contact_tolerance, "mm");
    }
    if (a.axis && b.axis) {
      const double angle = axis_angle_degrees(*a.axis, *b.axis);
      if (angle > policy.max_axis_angle) finding(GeoRule::kAxisMisalignment, angle, policy.max_axis_angle, "deg");
    }
  } else if (!spatially_connected) {
    const double gap = a.box.distance(b.box);
    if (gap < policy.min_clearance) finding(GeoRule::kClearanceViolation, gap, policy.min_clearance, "mm");
  }
  return out;
}

}  // namespace dthread::geom
