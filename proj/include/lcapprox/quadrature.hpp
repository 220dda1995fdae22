#pragma once

#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lcapprox/group.hpp"

namespace lcapprox {

using Function = std::function<double(const GroupPoint&)>;

enum class Scheme { GaussLegendre, Trapezoid, ExactSum };

std::string to_string(Scheme s);
Scheme parse_scheme(std::string_view name);

/// Composite rule applied per coordinate. Gauss-Legendre places `points` nodes
/// in each of `panels` panels; the trapezoid rule splits each panel into
/// `points` equal subintervals. Discrete groups always sum exactly.
struct QuadRule {
  Scheme scheme = Scheme::GaussLegendre;
  int panels = 32;
  int points = 4;

  /// Same rule with twice the panels.
  QuadRule refined() const { return {scheme, panels * 2, points}; }
  void validate() const;

  friend bool operator==(const QuadRule&, const QuadRule&) = default;
};

struct WeightedNode {
  GroupPoint x;
  double weight = 0.0;  ///< chart weight times Haar density
};

/// 1D nodes/weights over an interval, with panel edges placed on every break
/// point strictly inside it. Panels are shared among the pieces in proportion
/// to their length.
std::vector<std::pair<double, double>> axis_rule(Interval iv, const QuadRule& rule,
                                                 std::span<const double> breaks = {});

/// Haar-weighted nodes over a box. `breaks[i]` lists panel-edge positions for
/// axis i. Discrete groups get one node of weight haar_density per integer
/// point.
std::vector<WeightedNode> region_nodes(const Group& g, const CompactRegion& region,
                                       const QuadRule& rule,
                                       std::span<const std::vector<double>> breaks = {});

/// The inner range of a fibered 2D region at a given outer coordinate, with an
/// optional panel edge.
struct Fiber {
  Interval range;
  std::vector<double> breaks;
};

/// Haar-weighted nodes over {(x, y) : x in outer, y in fiber(x)} for 2D groups.
std::vector<WeightedNode> fibered_nodes(const Group& g, Interval outer,
                                        std::span<const double> outer_breaks,
                                        const std::function<Fiber(double)>& fiber,
                                        const QuadRule& rule);

/// Order-fixed pairwise summation.
double pairwise_sum(std::span<const double> terms);

/// Sum of weight * f(node). Throws QuadratureError on a non-finite value.
double integrate_nodes(const Function& f, std::span<const WeightedNode> nodes);

/// Integral of f against left Haar measure over the region.
double integrate(const Group& g, const Function& f, const CompactRegion& region,
                 const QuadRule& rule);

struct Estimate {
  double value = 0.0;
  double error = 0.0;
};

/// I(2p) together with |I(2p) - I(p)|. Continuous groups only.
Estimate refine_estimate(const Group& g, const Function& f, const CompactRegion& region,
                         const QuadRule& rule);

}  // namespace lcapprox
