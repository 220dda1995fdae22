#include "lcapprox/group.hpp"

#include <cmath>
#include <cstdio>
#include <string>

#include "lcapprox/error.hpp"

namespace lcapprox {

namespace {

double wrap_circle(double x) {
  double r = std::fmod(x, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  if (r >= kTwoPi) r = 0.0;
  return r;
}

double wrap_cyclic(double k, std::int64_t n) {
  const auto m = static_cast<std::int64_t>(std::llround(k)) % n;
  return static_cast<double>(m < 0 ? m + n : m);
}

std::string fmt_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

std::string to_string(const GroupPoint& x) {
  if (x.dim() == 1) return "(" + fmt_double(x[0]) + ")";
  return "(" + fmt_double(x[0]) + ", " + fmt_double(x[1]) + ")";
}

bool CompactRegion::contains(const GroupPoint& x) const {
  if (x.dim() != dim_) return false;
  for (int i = 0; i < dim_; ++i) {
    if (!axis(i).contains(x[i])) return false;
  }
  return true;
}

std::string to_string(const CompactRegion& r) {
  std::string out;
  for (int i = 0; i < r.dim(); ++i) {
    if (i > 0) out += " x ";
    out += "[" + fmt_double(r.axis(i).lo) + ", " + fmt_double(r.axis(i).hi) + "]";
  }
  return out;
}

Group Group::real_line() { return {GroupKind::RealLine, 0, {}}; }
Group Group::circle() { return {GroupKind::Circle, 0, {}}; }
Group Group::integer_lattice() { return {GroupKind::IntegerLattice, 0, {}}; }

Group Group::cyclic(std::int64_t n) {
  if (n <= 0) throw DomainError("cyclic group order must be positive, got " + std::to_string(n));
  return {GroupKind::FiniteCyclic, n, {}};
}

Group Group::affine(AffineConventions conventions) {
  return {GroupKind::AffinePos, 0, conventions};
}

Group Group::parse(std::string_view id) {
  if (id == "real") return real_line();
  if (id == "circle") return circle();
  if (id == "zlattice") return integer_lattice();
  if (id == "affine") return affine();
  constexpr std::string_view prefix = "cyclic:";
  if (id.substr(0, prefix.size()) == prefix) {
    const std::string digits(id.substr(prefix.size()));
    std::size_t used = 0;
    long long n = 0;
    try {
      n = std::stoll(digits, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != digits.size() || n <= 0) {
      throw ConfigError("bad cyclic group order in '" + std::string(id) + "'");
    }
    return cyclic(n);
  }
  throw ConfigError("unknown group id '" + std::string(id) + "'");
}

std::string Group::id() const {
  switch (kind_) {
    case GroupKind::RealLine: return "real";
    case GroupKind::Circle: return "circle";
    case GroupKind::IntegerLattice: return "zlattice";
    case GroupKind::FiniteCyclic: return "cyclic:" + std::to_string(order_);
    case GroupKind::AffinePos: return "affine";
  }
  return "?";
}

GroupPoint Group::identity() const {
  if (kind_ == GroupKind::AffinePos) return GroupPoint(1.0, 0.0);
  return GroupPoint(0.0);
}

void Group::check_dim(const GroupPoint& x) const {
  if (x.dim() != dimension()) {
    throw DomainError("point " + to_string(x) + " has dimension " + std::to_string(x.dim()) +
                      ", group " + id() + " has dimension " + std::to_string(dimension()));
  }
}

void Group::validate(const GroupPoint& x) const {
  check_dim(x);
  for (int i = 0; i < x.dim(); ++i) {
    if (!std::isfinite(x[i])) throw DomainError("non-finite coordinate in " + to_string(x));
  }
  if (discrete() && x[0] != std::round(x[0])) {
    throw DomainError("non-integer point " + to_string(x) + " on discrete group " + id());
  }
  if (kind_ == GroupKind::AffinePos && !(x[0] > 0.0)) {
    throw DomainError("affine point " + to_string(x) + " needs a > 0");
  }
}

GroupPoint Group::reduce(const GroupPoint& x) const {
  switch (kind_) {
    case GroupKind::Circle: return GroupPoint(wrap_circle(x[0]));
    case GroupKind::FiniteCyclic: return GroupPoint(wrap_cyclic(x[0], order_));
    default: return x;
  }
}

GroupPoint Group::mul(const GroupPoint& x, const GroupPoint& y) const {
  validate(x);
  validate(y);
  switch (kind_) {
    case GroupKind::RealLine:
    case GroupKind::IntegerLattice: return GroupPoint(x[0] + y[0]);
    case GroupKind::Circle: return GroupPoint(wrap_circle(x[0] + y[0]));
    case GroupKind::FiniteCyclic: return GroupPoint(wrap_cyclic(x[0] + y[0], order_));
    case GroupKind::AffinePos:
      // (a, b)(a', b') = (a a', a b' + b), i.e. [[a, b], [0, 1]] [[a', b'], [0, 1]].
      return GroupPoint(x[0] * y[0], x[0] * y[1] + x[1]);
  }
  return x;
}

GroupPoint Group::inv(const GroupPoint& x) const {
  validate(x);
  switch (kind_) {
    case GroupKind::RealLine:
    case GroupKind::IntegerLattice: return GroupPoint(-x[0]);
    case GroupKind::Circle: return GroupPoint(wrap_circle(-x[0]));
    case GroupKind::FiniteCyclic: return GroupPoint(wrap_cyclic(-x[0], order_));
    case GroupKind::AffinePos: return GroupPoint(1.0 / x[0], -x[1] / x[0]);
  }
  return x;
}

double Group::haar_density(const GroupPoint& x) const {
  validate(x);
  if (kind_ != GroupKind::AffinePos) return 1.0;
  return std::pow(x[0], conventions_.density_exponent);
}

double Group::modular(const GroupPoint& x) const {
  validate(x);
  if (kind_ != GroupKind::AffinePos) return 1.0;
  return std::pow(x[0], conventions_.modular_exponent);
}

double Group::distance_to_identity(const GroupPoint& x) const {
  check_dim(x);
  switch (kind_) {
    case GroupKind::RealLine:
    case GroupKind::IntegerLattice: return std::abs(x[0]);
    case GroupKind::Circle: {
      const double r = wrap_circle(x[0]);
      return std::min(r, kTwoPi - r);
    }
    case GroupKind::FiniteCyclic: {
      const double r = wrap_cyclic(x[0], order_);
      return std::min(r, static_cast<double>(order_) - r);
    }
    case GroupKind::AffinePos: return std::max(std::abs(x[0] - 1.0), std::abs(x[1]));
  }
  return 0.0;
}

CompactRegion Group::ball(double radius) const {
  if (!(radius >= 0.0) || !std::isfinite(radius)) {
    throw DomainError("ball radius must be finite and non-negative");
  }
  switch (kind_) {
    case GroupKind::RealLine:
    case GroupKind::Circle: return CompactRegion({-radius, radius});
    case GroupKind::IntegerLattice: {
      // Open ball {k : |k| < radius}.
      const double m = std::max(0.0, std::ceil(radius) - 1.0);
      return CompactRegion({-m, m});
    }
    case GroupKind::FiniteCyclic: {
      double m = std::max(0.0, std::ceil(radius) - 1.0);
      const auto n = static_cast<double>(order_);
      if (2.0 * m + 1.0 >= n) return CompactRegion({0.0, n - 1.0});
      return CompactRegion({-m, m});
    }
    case GroupKind::AffinePos: return CompactRegion({1.0 - radius, 1.0 + radius}, {-radius, radius});
  }
  return {};
}

std::vector<GroupPoint> grid_points(const Group& g, const CompactRegion& region, int n) {
  if (region.dim() != g.dimension()) throw DomainError("region dimension does not match group");
  std::vector<GroupPoint> out;
  if (g.discrete()) {
    const auto lo = static_cast<std::int64_t>(std::ceil(region.axis(0).lo));
    const auto hi = static_cast<std::int64_t>(std::floor(region.axis(0).hi));
    if (g.kind() == GroupKind::FiniteCyclic && hi - lo + 1 > g.order()) {
      throw DomainError("region " + to_string(region) + " wraps around " + g.id());
    }
    for (auto k = lo; k <= hi; ++k) out.push_back(g.reduce(GroupPoint(static_cast<double>(k))));
    return out;
  }
  if (n < 1) throw DomainError("grid needs at least one point per coordinate");
  auto axis_value = [&](int axis, int i) {
    const Interval& iv = region.axis(axis);
    if (n == 1) return 0.5 * (iv.lo + iv.hi);
    return iv.lo + (iv.hi - iv.lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  };
  if (g.dimension() == 1) {
    for (int i = 0; i < n; ++i) out.push_back(g.reduce(GroupPoint(axis_value(0, i))));
  } else {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) out.emplace_back(axis_value(0, i), axis_value(1, j));
    }
  }
  return out;
}

}  // namespace lcapprox
