#pragma once

#include <string>
#include <string_view>

#include "lcapprox/group.hpp"
#include "lcapprox/quadrature.hpp"

namespace lcapprox {

/// Radial shape phi(rho) on rho = distance / radius in [0, 1).
/// `Flat` and `DiscreteDelta` exist for discrete groups only.
enum class Profile { Triangular, CosineBump, PolynomialBump, Flat, DiscreteDelta };

std::string to_string(Profile p);
Profile parse_profile(std::string_view name);

/// Nonnegative continuous function supported in the radius ball around the
/// identity with unit Haar integral. On AffinePos the ball is the chart box
/// [1 - r, 1 + r] x [-r, r] and the profile is the product of the 1D shapes.
class Mollifier {
 public:
  /// Throws DomainError for a non-positive radius, a radius too large for the
  /// chart (Circle: >= pi, AffinePos: >= 1), a profile the group cannot carry,
  /// or a normalization integral below 1e-15.
  static Mollifier build(const Group& g, Profile profile, double radius,
                         const QuadRule& rule = QuadRule{});

  const Group& group() const { return group_; }
  Profile profile() const { return profile_; }
  double radius() const { return radius_; }
  double norm_constant() const { return norm_; }

  /// Closed chart box containing the support.
  CompactRegion support() const { return group_.ball(radius_); }

  double eval(const GroupPoint& x) const;
  double operator()(const GroupPoint& x) const { return eval(x); }

  /// Haar-weighted nodes covering the support with panel edges on the
  /// identity coordinates, where every continuous profile has its kink.
  std::vector<WeightedNode> support_nodes(const QuadRule& rule) const;

 private:
  Mollifier(Group g, Profile p, double r) : group_(g), profile_(p), radius_(r) {}

  double shape(const GroupPoint& x) const;

  Group group_;
  Profile profile_;
  double radius_;
  double norm_ = 1.0;
};

}  // namespace lcapprox
