#include "lcapprox/conv_op.hpp"

#include <cmath>
#include <string>

#include "lcapprox/compactness.hpp"
#include "lcapprox/error.hpp"

namespace lcapprox {

ConvOperator::ConvOperator(Mollifier mollifier, QuadRule rule)
    : mollifier_(std::move(mollifier)), rule_(rule) {
  const Group& g = group();
  for (const WeightedNode& n : mollifier_.support_nodes(rule_)) {
    const double eta = mollifier_.eval(n.x);
    if (eta == 0.0) continue;
    form1_terms_.push_back({g.inv(n.x), n.weight * eta});
  }
}

namespace {

// Representative of x - t in (-pi, pi] on the circle; plain difference elsewhere.
double centred_offset(const Group& g, double x, double t) {
  double d = x - t;
  if (g.kind() == GroupKind::Circle) {
    d = std::remainder(d, kTwoPi);
  }
  return d;
}

std::vector<double> crease_values(std::span<const Crease> creases, int axis) {
  std::vector<double> out;
  for (const Crease& c : creases) {
    if (c.axis == axis) out.push_back(c.value);
  }
  return out;
}

}  // namespace

std::vector<WeightedNode> ConvOperator::form1_nodes(const GroupPoint& t_in,
                                                    std::span<const Crease> creases) const {
  const Group& g = group();
  if (g.discrete() || creases.empty()) return mollifier_.support_nodes(rule_);
  const GroupPoint t = g.reduce(t_in);
  const double r = radius();
  if (g.dimension() == 1) {
    // s⁻¹·t = t - s lies on the crease c  <=>  s = t - c.
    std::vector<std::vector<double>> breaks{{0.0}};
    for (double c : crease_values(creases, 0)) breaks[0].push_back(-centred_offset(g, c, t[0]));
    return region_nodes(g, mollifier_.support(), rule_, breaks);
  }
  // s⁻¹·t = (t_a / s_a, (t_b - s_b) / s_a).
  const double ta = t[0];
  const double tb = t[1];
  std::vector<double> outer{1.0};
  for (double c : crease_values(creases, 0)) {
    if (c > 0.0) outer.push_back(ta / c);
  }
  const std::vector<double> b_creases = crease_values(creases, 1);
  auto fiber = [&](double sa) {
    Fiber fb{{-r, r}, {0.0}};
    for (double c : b_creases) fb.breaks.push_back(tb - c * sa);
    return fb;
  };
  return fibered_nodes(g, {1.0 - r, 1.0 + r}, outer, fiber, rule_);
}

double ConvOperator::apply_form1(const Function& f, const GroupPoint& t,
                                 std::span<const Crease> creases) const {
  const Group& g = group();
  g.validate(t);
  std::vector<double> terms;
  if (g.discrete() || creases.empty()) {
    terms.reserve(form1_terms_.size());
    for (const Form1Term& term : form1_terms_) {
      const GroupPoint x = g.mul(term.s_inv, t);
      const double v = f(x);
      if (!std::isfinite(v)) throw QuadratureError("non-finite f value at " + to_string(x));
      terms.push_back(term.coeff * v);
    }
    return pairwise_sum(terms);
  }
  const auto nodes = form1_nodes(t, creases);
  return integrate_nodes(
      [&](const GroupPoint& s) {
        const double eta = mollifier_.eval(s);
        return eta == 0.0 ? 0.0 : eta * f(g.mul(g.inv(s), t));
      },
      nodes);
}

std::vector<WeightedNode> ConvOperator::form2_nodes(const GroupPoint& t_in,
                                                    std::span<const Crease> creases) const {
  const Group& g = group();
  g.validate(t_in);
  const GroupPoint t = g.reduce(t_in);
  const double r = radius();

  if (g.discrete()) {
    std::vector<WeightedNode> out;
    for (const GroupPoint& k : grid_points(g, mollifier_.support(), 1)) {
      const GroupPoint s = g.mul(g.inv(k), t);
      out.push_back({s, g.haar_density(s)});
    }
    return out;
  }
  if (g.dimension() == 1) {
    std::vector<std::vector<double>> breaks{{t[0]}};
    for (double c : crease_values(creases, 0)) breaks[0].push_back(t[0] + centred_offset(g, c, t[0]));
    return region_nodes(g, CompactRegion({t[0] - r, t[0] + r}), rule_, breaks);
  }
  // AffinePos: t·s⁻¹ = (a, b) in the support box  <=>  s = (t_a / a, (t_b - b) / a).
  const double ta = t[0];
  const double tb = t[1];
  std::vector<double> outer{ta};
  for (double c : crease_values(creases, 0)) outer.push_back(c);
  const std::vector<double> b_creases = crease_values(creases, 1);
  auto fiber = [&](double sa) {
    const double scale = sa / ta;
    Fiber fb{{scale * (tb - r), scale * (tb + r)}, {scale * tb}};
    fb.breaks.insert(fb.breaks.end(), b_creases.begin(), b_creases.end());
    return fb;
  };
  return fibered_nodes(g, {ta / (1.0 + r), ta / (1.0 - r)}, outer, fiber, rule_);
}

double ConvOperator::kernel(const GroupPoint& t, const GroupPoint& s) const {
  const Group& g = group();
  const GroupPoint s_inv = g.inv(s);
  const double eta = mollifier_.eval(g.mul(t, s_inv));
  if (eta == 0.0) return 0.0;
  return g.modular(s_inv) * eta;
}

double ConvOperator::apply_form2(const Function& f, const GroupPoint& t,
                                 std::span<const Crease> creases) const {
  const auto nodes = form2_nodes(t, creases);
  return integrate_nodes([&](const GroupPoint& s) { return kernel(t, s) * f(s); }, nodes);
}

double forms_agree(const ConvOperator& op, const TestFamily& family,
                   std::span<const GroupPoint> points) {
  double worst = 0.0;
  for (const TestFunction& fn : family.members) {
    for (const GroupPoint& t : points) {
      worst = std::max(worst, std::abs(op.apply_form1(fn, t) - op.apply_form2(fn, t)));
    }
  }
  return worst;
}

std::vector<ConvergenceRow> convergence_sweep(const Group& g, Profile profile,
                                              std::span<const double> radii,
                                              const TestFamily& family,
                                              const CompactRegion& region, int grid,
                                              const QuadRule& rule) {
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (!(radii[i] > 0.0)) throw DomainError("sweep radii must be positive");
    if (i > 0 && !(radii[i] < radii[i - 1])) throw DomainError("sweep radii must be descending");
  }
  const auto points = grid_points(g, region, grid);
  std::vector<ConvergenceRow> rows;
  for (double r : radii) {
    const ConvOperator op(Mollifier::build(g, profile, r, rule), rule);
    double sup = 0.0;
    for (const TestFunction& fn : family.members) {
      for (const GroupPoint& t : points) {
        sup = std::max(sup, std::abs(op.apply_form1(fn, t) - fn.f(t)));
      }
    }
    const ModulusReport omega = equicontinuity_modulus(g, family, region, r, {grid});
    rows.push_back({r, sup, omega.omega});
  }
  return rows;
}

}  // namespace lcapprox
