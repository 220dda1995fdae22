#include "lcapprox/compactness.hpp"

#include <algorithm>
#include <cmath>

#include "lcapprox/error.hpp"

namespace lcapprox {

namespace {

int default_shift_grid(const Group& g) { return g.dimension() == 1 ? 65 : 17; }

double sup_distance(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

double max_radius(std::span<const ConvOperator> ops) {
  double r = 0.0;
  for (const ConvOperator& op : ops) r = std::max(r, op.radius());
  return r;
}

}  // namespace

std::vector<GroupPoint> ball_points(const Group& g, double radius, int n) {
  if (radius == 0.0) return {g.identity()};
  if (g.discrete()) return grid_points(g, g.ball(radius), 1);
  if (n % 2 == 0) ++n;  // keep the identity on the grid
  return grid_points(g, g.ball(radius), n);
}

double modulus_over(const Group& g, std::span<const TestFunction> members,
                    std::span<const GroupPoint> base, std::span<const GroupPoint> shifts,
                    Side side) {
  double omega = 0.0;
  for (const TestFunction& fn : members) {
    for (const GroupPoint& t : base) {
      const double ft = fn.f(t);
      for (const GroupPoint& s : shifts) {
        const GroupPoint x = side == Side::Left ? g.mul(g.inv(s), t) : g.mul(t, s);
        omega = std::max(omega, std::abs(fn.f(x) - ft));
      }
    }
  }
  return omega;
}

ModulusReport equicontinuity_modulus(const Group& g, const TestFamily& family,
                                     const CompactRegion& region, double radius,
                                     ModulusGrids grids, Side side) {
  if (!(radius >= 0.0)) throw DomainError("modulus radius must be non-negative");
  const int nb = grids.base > 0 ? grids.base : default_grid(g);
  const int ns = grids.shift > 0 ? grids.shift : default_shift_grid(g);
  const auto base = grid_points(g, region, nb);
  const auto shifts = ball_points(g, radius, ns);
  ModulusReport rep{family.name, region, radius, 0.0, base.size(), shifts.size()};
  if (radius > 0.0) rep.omega = modulus_over(g, family.members, base, shifts, side);
  return rep;
}

std::vector<GroupPoint> enlarged_points(const Group& g, std::span<const GroupPoint> base,
                                        double u0_radius, int n) {
  std::vector<GroupPoint> out;
  for (const GroupPoint& s : ball_points(g, u0_radius, n)) {
    const GroupPoint s_inv = g.inv(s);
    for (const GroupPoint& t : base) out.push_back(g.mul(s_inv, t));
  }
  return out;
}

BoundCheck uniform_bound(std::span<const ConvOperator> ops, const TestFunction& f,
                         const CompactRegion& region, int grid) {
  if (ops.empty()) return {};
  const Group& g = ops.front().group();
  const auto points = grid_points(g, region, grid);
  BoundCheck out;
  for (const ConvOperator& op : ops) {
    for (const GroupPoint& t : points) out.value = std::max(out.value, std::abs(op.apply_form1(f, t)));
  }
  const int ns = g.dimension() == 1 ? 257 : 33;
  for (const GroupPoint& x : enlarged_points(g, points, max_radius(ops), ns)) {
    out.bound = std::max(out.bound, std::abs(f.f(x)));
  }
  return out;
}

BoundCheck output_equicontinuity(std::span<const ConvOperator> ops, const TestFunction& f,
                                 const CompactRegion& region, double radius, int grid) {
  if (ops.empty()) return {};
  const Group& g = ops.front().group();
  const auto points = grid_points(g, region, grid);
  BoundCheck out;
  if (radius <= 0.0) return out;

  // Pairs of grid points within the radius, in the right-uniform sense.
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const GroupPoint t1_inv = g.inv(points[i]);
    for (std::size_t j = i + 1; j < points.size(); ++j) {
      if (g.distance_to_identity(g.mul(t1_inv, points[j])) < radius) pairs.emplace_back(i, j);
    }
  }
  std::vector<double> values(points.size());
  for (const ConvOperator& op : ops) {
    for (std::size_t i = 0; i < points.size(); ++i) values[i] = op.apply_form1(f, points[i]);
    for (const auto& [i, j] : pairs) out.value = std::max(out.value, std::abs(values[i] - values[j]));
  }

  const int ns = g.dimension() == 1 ? 65 : 9;
  const auto base = enlarged_points(g, points, max_radius(ops), ns);
  out.bound = modulus_over(g, std::span(&f, 1), base,
                           ball_points(g, radius, default_shift_grid(g)), Side::Right);
  return out;
}

NetResult epsilon_net_check(std::span<const std::vector<double>> vectors, double epsilon) {
  if (!(epsilon > 0.0)) throw DomainError("epsilon must be positive");
  NetResult net;
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    if (i > 0 && vectors[i].size() != vectors[0].size()) {
      throw DomainError("net vectors must share one grid");
    }
    std::size_t best = vectors.size();
    double best_d = 0.0;
    for (std::size_t c : net.centers) {
      const double d = sup_distance(vectors[i], vectors[c]);
      if (d <= epsilon) {
        best = c;
        best_d = d;
        break;
      }
    }
    if (best == vectors.size()) {
      net.centers.push_back(i);
      best = i;
    }
    net.covered_by.push_back(best);
    net.distance.push_back(best_d);
  }
  return net;
}

std::vector<std::vector<double>> operator_orbit(const Group& g, Profile profile,
                                                std::span<const double> radii, const TestFunction& f,
                                                const CompactRegion& region, int grid,
                                                const QuadRule& rule) {
  const auto points = grid_points(g, region, grid);
  std::vector<std::vector<double>> out;
  for (double r : radii) {
    const ConvOperator op(Mollifier::build(g, profile, r, rule), rule);
    std::vector<double> v;
    v.reserve(points.size());
    for (const GroupPoint& t : points) v.push_back(op.apply_form1(f, t));
    out.push_back(std::move(v));
  }
  return out;
}

}  // namespace lcapprox
