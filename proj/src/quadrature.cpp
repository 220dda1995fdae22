#include "lcapprox/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "lcapprox/error.hpp"

namespace lcapprox {

namespace {

constexpr int kMaxGaussPoints = 32;

struct GaussTable {
  std::vector<double> x;  // on [-1, 1]
  std::vector<double> w;
};

// Newton iteration on P_n from the Chebyshev initial guesses.
GaussTable make_gauss(int n) {
  GaussTable t;
  t.x.resize(static_cast<std::size_t>(n));
  t.w.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
      }
      dp = n * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    {
      double p0 = 1.0;
      double p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
      }
      dp = n * (z * p0 - p1) / (z * z - 1.0);
    }
    const double w = 2.0 / ((1.0 - z * z) * dp * dp);
    const auto lo = static_cast<std::size_t>(i);
    const auto hi = static_cast<std::size_t>(n - 1 - i);
    t.x[lo] = -z;
    t.x[hi] = z;
    t.w[lo] = w;
    t.w[hi] = w;
  }
  if (n % 2 == 1) t.x[static_cast<std::size_t>(n / 2)] = 0.0;
  return t;
}

const GaussTable& gauss_table(int n) {
  static const std::vector<GaussTable> tables = [] {
    std::vector<GaussTable> v(kMaxGaussPoints + 1);
    for (int k = 1; k <= kMaxGaussPoints; ++k) v[static_cast<std::size_t>(k)] = make_gauss(k);
    return v;
  }();
  return tables[static_cast<std::size_t>(n)];
}

void append_piece(std::vector<std::pair<double, double>>& out, double lo, double hi, int panels,
                  const QuadRule& rule) {
  if (hi <= lo) return;
  const double h = (hi - lo) / panels;
  if (rule.scheme == Scheme::Trapezoid) {
    const int m = panels * rule.points;
    const double step = (hi - lo) / m;
    for (int i = 0; i <= m; ++i) {
      const double w = (i == 0 || i == m) ? 0.5 * step : step;
      out.emplace_back(i == m ? hi : lo + step * i, w);
    }
    return;
  }
  const GaussTable& t = gauss_table(rule.points);
  for (int p = 0; p < panels; ++p) {
    const double a = lo + h * p;
    const double mid = a + 0.5 * h;
    for (std::size_t k = 0; k < t.x.size(); ++k) {
      out.emplace_back(mid + 0.5 * h * t.x[k], 0.5 * h * t.w[k]);
    }
  }
}

}  // namespace

std::string to_string(Scheme s) {
  switch (s) {
    case Scheme::GaussLegendre: return "gauss";
    case Scheme::Trapezoid: return "trapezoid";
    case Scheme::ExactSum: return "exact";
  }
  return "?";
}

Scheme parse_scheme(std::string_view name) {
  if (name == "gauss" || name == "gauss-legendre") return Scheme::GaussLegendre;
  if (name == "trapezoid") return Scheme::Trapezoid;
  if (name == "exact" || name == "exact-sum") return Scheme::ExactSum;
  throw ConfigError("unknown quadrature scheme '" + std::string(name) + "'");
}

void QuadRule::validate() const {
  if (panels < 1) throw DomainError("quadrature needs at least one panel");
  if (points < 1) throw DomainError("quadrature needs at least one point per panel");
  if (scheme == Scheme::GaussLegendre && points > kMaxGaussPoints) {
    throw DomainError("at most " + std::to_string(kMaxGaussPoints) + " Gauss points per panel");
  }
}

std::vector<std::pair<double, double>> axis_rule(Interval iv, const QuadRule& rule,
                                                 std::span<const double> breaks) {
  rule.validate();
  if (iv.hi < iv.lo) throw DomainError("empty integration interval");
  std::vector<double> edges{iv.lo};
  std::vector<double> inner;
  for (double b : breaks) {
    if (b > iv.lo && b < iv.hi) inner.push_back(b);
  }
  std::sort(inner.begin(), inner.end());
  inner.erase(std::unique(inner.begin(), inner.end()), inner.end());
  edges.insert(edges.end(), inner.begin(), inner.end());
  edges.push_back(iv.hi);

  // Panels are shared in proportion to piece length, at least one per piece.
  const double total = iv.length();
  std::vector<std::pair<double, double>> out;
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    const double len = edges[i + 1] - edges[i];
    const int panels = total > 0.0 ? std::max(1, static_cast<int>(std::ceil(rule.panels * len / total - 1e-9))) : 1;
    append_piece(out, edges[i], edges[i + 1], panels, rule);
  }
  return out;
}

std::vector<WeightedNode> region_nodes(const Group& g, const CompactRegion& region,
                                       const QuadRule& rule,
                                       std::span<const std::vector<double>> breaks) {
  if (region.dim() != g.dimension()) throw DomainError("region dimension does not match group");
  std::vector<WeightedNode> out;
  if (g.discrete()) {
    for (const GroupPoint& x : grid_points(g, region, 1)) out.push_back({x, g.haar_density(x)});
    return out;
  }
  if (rule.scheme == Scheme::ExactSum) {
    throw DomainError("exact-sum rule requires a discrete group, got " + g.id());
  }
  auto axis_breaks = [&](int i) -> std::span<const double> {
    if (static_cast<std::size_t>(i) < breaks.size()) return breaks[static_cast<std::size_t>(i)];
    return {};
  };
  const auto ax = axis_rule(region.axis(0), rule, axis_breaks(0));
  if (g.dimension() == 1) {
    out.reserve(ax.size());
    for (const auto& [x, w] : ax) {
      const GroupPoint p = g.reduce(GroupPoint(x));
      out.push_back({p, w * g.haar_density(p)});
    }
    return out;
  }
  const auto ay = axis_rule(region.axis(1), rule, axis_breaks(1));
  out.reserve(ax.size() * ay.size());
  for (const auto& [x, wx] : ax) {
    for (const auto& [y, wy] : ay) {
      const GroupPoint p(x, y);
      out.push_back({p, wx * wy * g.haar_density(p)});
    }
  }
  return out;
}

std::vector<WeightedNode> fibered_nodes(const Group& g, Interval outer,
                                        std::span<const double> outer_breaks,
                                        const std::function<Fiber(double)>& fiber,
                                        const QuadRule& rule) {
  if (g.dimension() != 2) throw DomainError("fibered regions need a 2D group");
  std::vector<WeightedNode> out;
  for (const auto& [x, wx] : axis_rule(outer, rule, outer_breaks)) {
    const Fiber f = fiber(x);
    for (const auto& [y, wy] : axis_rule(f.range, rule, f.breaks)) {
      const GroupPoint p(x, y);
      out.push_back({p, wx * wy * g.haar_density(p)});
    }
  }
  return out;
}

double pairwise_sum(std::span<const double> terms) {
  constexpr std::size_t kBlock = 8;
  if (terms.size() <= kBlock) {
    double s = 0.0;
    for (double t : terms) s += t;
    return s;
  }
  const std::size_t half = terms.size() / 2;
  return pairwise_sum(terms.first(half)) + pairwise_sum(terms.subspan(half));
}

double integrate_nodes(const Function& f, std::span<const WeightedNode> nodes) {
  std::vector<double> terms;
  terms.reserve(nodes.size());
  for (const WeightedNode& n : nodes) {
    const double v = f(n.x);
    if (!std::isfinite(v)) {
      throw QuadratureError("non-finite integrand value at node " + to_string(n.x));
    }
    terms.push_back(n.weight * v);
  }
  return pairwise_sum(terms);
}

double integrate(const Group& g, const Function& f, const CompactRegion& region,
                 const QuadRule& rule) {
  return integrate_nodes(f, region_nodes(g, region, rule));
}

Estimate refine_estimate(const Group& g, const Function& f, const CompactRegion& region,
                         const QuadRule& rule) {
  if (g.discrete()) throw DomainError("refine_estimate needs a continuous group, got " + g.id());
  const double coarse = integrate(g, f, region, rule);
  const double fine = integrate(g, f, region, rule.refined());
  return {fine, std::abs(fine - coarse)};
}

}  // namespace lcapprox
