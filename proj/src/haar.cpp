#include "lcapprox/haar.hpp"

#include <cmath>
#include <vector>

#include "lcapprox/error.hpp"

namespace lcapprox {

namespace {

constexpr int kBoundarySamples = 65;

std::vector<GroupPoint> boundary_points(const Group& g, const CompactRegion& region) {
  std::vector<GroupPoint> out;
  if (g.discrete()) {
    const double lo = std::ceil(region.axis(0).lo);
    const double hi = std::floor(region.axis(0).hi);
    if (g.kind() == GroupKind::FiniteCyclic && hi - lo + 1.0 >= static_cast<double>(g.order())) {
      return out;  // the whole group has no boundary
    }
    out.push_back(g.reduce(GroupPoint(lo)));
    out.push_back(g.reduce(GroupPoint(hi)));
    return out;
  }
  if (g.dimension() == 1) {
    if (g.kind() == GroupKind::Circle && region.axis(0).length() >= kTwoPi) return out;
    out.push_back(g.reduce(GroupPoint(region.axis(0).lo)));
    out.push_back(g.reduce(GroupPoint(region.axis(0).hi)));
    return out;
  }
  const Interval& ax = region.axis(0);
  const Interval& ay = region.axis(1);
  for (int i = 0; i < kBoundarySamples; ++i) {
    const double s = static_cast<double>(i) / (kBoundarySamples - 1);
    const double x = ax.lo + s * ax.length();
    const double y = ay.lo + s * ay.length();
    out.emplace_back(x, ay.lo);
    out.emplace_back(x, ay.hi);
    out.emplace_back(ax.lo, y);
    out.emplace_back(ax.hi, y);
  }
  return out;
}

void check_support(const Group& g, const Function& f, const CompactRegion& region,
                   std::span<const WeightedNode> nodes, const char* what) {
  double peak = 0.0;
  for (const WeightedNode& n : nodes) peak = std::max(peak, std::abs(f(n.x)));
  for (const GroupPoint& b : boundary_points(g, region)) {
    const double v = std::abs(f(b));
    if (v > kSupportEscapeRatio * peak) {
      throw SupportEscape(std::string(what) + " is not negligible at boundary point " +
                          to_string(b) + " of region " + to_string(region));
    }
  }
}

}  // namespace

double verify_left_invariance(const Group& g, const Function& f, const GroupPoint& shift,
                              const CompactRegion& region, const QuadRule& rule) {
  g.validate(shift);
  const auto nodes = region_nodes(g, region, rule);
  const Function shifted = [&](const GroupPoint& t) { return f(g.mul(shift, t)); };
  check_support(g, f, region, nodes, "f");
  check_support(g, shifted, region, nodes, "f(shift·t)");
  return std::abs(integrate_nodes(shifted, nodes) - integrate_nodes(f, nodes));
}

double right_translation_factor(const Group& g, const GroupPoint& shift) {
  return 1.0 / g.modular(shift);
}

double verify_modular_relation(const Group& g, const Function& f, const GroupPoint& shift,
                               const CompactRegion& region, const QuadRule& rule) {
  g.validate(shift);
  const auto nodes = region_nodes(g, region, rule);
  const Function shifted = [&](const GroupPoint& t) { return f(g.mul(t, shift)); };
  check_support(g, f, region, nodes, "f");
  check_support(g, shifted, region, nodes, "f(t·shift)");
  const double c = right_translation_factor(g, shift);
  return std::abs(integrate_nodes(shifted, nodes) - c * integrate_nodes(f, nodes));
}

}  // namespace lcapprox
