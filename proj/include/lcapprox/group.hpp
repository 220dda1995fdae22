#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace lcapprox {

inline constexpr int kMaxDim = 2;
inline constexpr double kTwoPi = 6.283185307179586476925286766559;

/// A group element in chart coordinates. Integer-valued for discrete groups.
class GroupPoint {
 public:
  GroupPoint() = default;
  explicit GroupPoint(double x) : coords_{x, 0.0}, dim_(1) {}
  GroupPoint(double x, double y) : coords_{x, y}, dim_(2) {}

  int dim() const { return dim_; }
  double operator[](int i) const { return coords_[static_cast<std::size_t>(i)]; }
  double& operator[](int i) { return coords_[static_cast<std::size_t>(i)]; }

  friend bool operator==(const GroupPoint&, const GroupPoint&) = default;

 private:
  std::array<double, kMaxDim> coords_{};
  int dim_ = 1;
};

std::string to_string(const GroupPoint& x);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  double length() const { return hi - lo; }
  bool contains(double x) const { return lo <= x && x <= hi; }
  friend bool operator==(const Interval&, const Interval&) = default;
};

/// Closed box in chart coordinates (lifted: Circle intervals may leave [0, 2pi)
/// and are reduced point by point). For discrete groups the integer points of
/// the box are meant.
class CompactRegion {
 public:
  CompactRegion() = default;
  explicit CompactRegion(Interval x) : axes_{x}, dim_(1) {}
  CompactRegion(Interval x, Interval y) : axes_{x, y}, dim_(2) {}

  int dim() const { return dim_; }
  const Interval& axis(int i) const { return axes_[static_cast<std::size_t>(i)]; }
  Interval& axis(int i) { return axes_[static_cast<std::size_t>(i)]; }
  bool contains(const GroupPoint& x) const;

  friend bool operator==(const CompactRegion&, const CompactRegion&) = default;

 private:
  std::array<Interval, kMaxDim> axes_{};
  int dim_ = 1;
};

std::string to_string(const CompactRegion& r);

enum class GroupKind { RealLine, Circle, IntegerLattice, FiniteCyclic, AffinePos };

/// Exponents for the ax+b group: left Haar density a^density_exponent and
/// modular function a^modular_exponent.
///
/// Frozen calibration table (see calibrate_affine()):
///
///   quantity          candidates        winner   residual at winner
///   Haar density      a^-3 .. a^1       a^-2     left-invariance < 1e-6
///   modular function  a^-2 .. a^2       a^-1     form discrepancy < 1e-6
///
/// With these, Delta(2, 3) = 0.5 and the right-translation factor of the left
/// Haar measure is 1 / Delta(shift).
struct AffineConventions {
  int density_exponent = -2;
  int modular_exponent = -1;

  friend bool operator==(const AffineConventions&, const AffineConventions&) = default;
};

inline constexpr AffineConventions kAffineConventions{-2, -1};

/// One of the built-in locally compact groups. Immutable value type.
class Group {
 public:
  static Group real_line();
  static Group circle();
  static Group integer_lattice();
  static Group cyclic(std::int64_t n);
  static Group affine(AffineConventions conventions = kAffineConventions);

  /// Parses "real", "circle", "zlattice", "cyclic:<n>" or "affine".
  static Group parse(std::string_view id);

  GroupKind kind() const { return kind_; }
  int dimension() const { return kind_ == GroupKind::AffinePos ? 2 : 1; }
  bool discrete() const {
    return kind_ == GroupKind::IntegerLattice || kind_ == GroupKind::FiniteCyclic;
  }
  bool unimodular() const { return kind_ != GroupKind::AffinePos; }
  bool abelian() const { return kind_ != GroupKind::AffinePos; }
  std::int64_t order() const { return order_; }
  const AffineConventions& conventions() const { return conventions_; }
  std::string id() const;

  GroupPoint identity() const;
  /// Throws DomainError when x has the wrong dimension, is not finite, is not
  /// integral on a discrete group or has a <= 0 on AffinePos.
  void validate(const GroupPoint& x) const;
  /// Canonical chart representative: [0, 2pi) on Circle, {0..n-1} on FiniteCyclic.
  GroupPoint reduce(const GroupPoint& x) const;

  GroupPoint mul(const GroupPoint& x, const GroupPoint& y) const;
  GroupPoint inv(const GroupPoint& x) const;

  /// Density of left Haar measure with respect to chart Lebesgue/counting measure.
  double haar_density(const GroupPoint& x) const;
  double modular(const GroupPoint& x) const;

  /// Chart distance to the identity: geodesic on Circle and FiniteCyclic, |x|
  /// on the line and lattice, max(|a - 1|, |b|) on AffinePos.
  double distance_to_identity(const GroupPoint& x) const;

  /// Closed chart box of the given radius around the identity.
  CompactRegion ball(double radius) const;

  friend bool operator==(const Group&, const Group&) = default;

 private:
  Group(GroupKind kind, std::int64_t order, AffineConventions conventions)
      : kind_(kind), order_(order), conventions_(conventions) {}

  void check_dim(const GroupPoint& x) const;

  GroupKind kind_ = GroupKind::RealLine;
  std::int64_t order_ = 0;
  AffineConventions conventions_{};
};

/// Uniform grid over a region: n points per coordinate for continuous groups,
/// every integer point for discrete ones. Points are chart-reduced.
std::vector<GroupPoint> grid_points(const Group& g, const CompactRegion& region, int n);

}  // namespace lcapprox
