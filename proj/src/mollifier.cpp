#include "lcapprox/mollifier.hpp"

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "lcapprox/error.hpp"

namespace lcapprox {

namespace {

double shape_1d(Profile p, double rho) {
  if (rho >= 1.0) return 0.0;
  switch (p) {
    case Profile::Triangular: return 1.0 - rho;
    case Profile::CosineBump: return 0.5 * (1.0 + std::cos(std::numbers::pi * rho));
    case Profile::PolynomialBump: {
      const double u = 1.0 - rho * rho;
      return u * u;
    }
    case Profile::Flat: return 1.0;
    case Profile::DiscreteDelta: return rho == 0.0 ? 1.0 : 0.0;
  }
  return 0.0;
}

}  // namespace

std::string to_string(Profile p) {
  switch (p) {
    case Profile::Triangular: return "triangular";
    case Profile::CosineBump: return "cosine";
    case Profile::PolynomialBump: return "polynomial";
    case Profile::Flat: return "flat";
    case Profile::DiscreteDelta: return "delta";
  }
  return "?";
}

Profile parse_profile(std::string_view name) {
  if (name == "triangular") return Profile::Triangular;
  if (name == "cosine" || name == "cosine-bump") return Profile::CosineBump;
  if (name == "polynomial" || name == "polynomial-bump") return Profile::PolynomialBump;
  if (name == "flat") return Profile::Flat;
  if (name == "delta" || name == "discrete-delta") return Profile::DiscreteDelta;
  throw ConfigError("unknown mollifier profile '" + std::string(name) + "'");
}

Mollifier Mollifier::build(const Group& g, Profile profile, double radius, const QuadRule& rule) {
  if (!(radius > 0.0) || !std::isfinite(radius)) {
    throw DomainError("mollifier radius must be positive and finite");
  }
  if (g.kind() == GroupKind::Circle && radius >= std::numbers::pi) {
    throw DomainError("circle mollifier radius must be below pi");
  }
  if (g.kind() == GroupKind::AffinePos && radius >= 1.0) {
    throw DomainError("affine mollifier radius must be below 1 to keep a > 0");
  }
  if (!g.discrete() && (profile == Profile::Flat || profile == Profile::DiscreteDelta)) {
    throw DomainError("profile '" + to_string(profile) + "' is not continuous on " + g.id());
  }

  Mollifier m(g, profile, radius);
  double mass = 0.0;
  if (g.discrete()) {
    mass = integrate(g, [&](const GroupPoint& x) { return m.shape(x); }, m.support(),
                     QuadRule{Scheme::ExactSum, 1, 1});
  } else {
    mass = integrate_nodes([&](const GroupPoint& x) { return m.shape(x); },
                           m.support_nodes(rule.refined()));
  }
  if (!(mass >= 1e-15)) {
    throw DomainError("degenerate mollifier: normalization integral " + std::to_string(mass));
  }
  m.norm_ = 1.0 / mass;
  return m;
}

double Mollifier::shape(const GroupPoint& x) const {
  if (profile_ == Profile::DiscreteDelta) return group_.distance_to_identity(x) == 0.0 ? 1.0 : 0.0;
  if (group_.kind() == GroupKind::AffinePos) {
    return shape_1d(profile_, std::abs(x[0] - 1.0) / radius_) *
           shape_1d(profile_, std::abs(x[1]) / radius_);
  }
  return shape_1d(profile_, group_.distance_to_identity(x) / radius_);
}

double Mollifier::eval(const GroupPoint& x) const {
  if (group_.kind() == GroupKind::AffinePos && !(x[0] > 0.0)) return 0.0;
  return norm_ * shape(x);
}

std::vector<WeightedNode> Mollifier::support_nodes(const QuadRule& rule) const {
  if (group_.discrete()) return region_nodes(group_, support(), rule);
  const GroupPoint e = group_.identity();
  std::vector<std::vector<double>> breaks;
  for (int i = 0; i < group_.dimension(); ++i) breaks.push_back({e[i]});
  return region_nodes(group_, support(), rule, breaks);
}

}  // namespace lcapprox
