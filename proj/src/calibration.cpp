#include "lcapprox/calibration.hpp"

#include <algorithm>
#include <cmath>

#include "lcapprox/conv_op.hpp"
#include "lcapprox/haar.hpp"
#include "lcapprox/test_family.hpp"

namespace lcapprox {

namespace {

double bump4(double x) {
  if (std::abs(x) >= 1.0) return 0.0;
  const double u = 1.0 - x * x;
  return u * u * u * u;
}

int argmin(const std::vector<CalibrationEntry>& entries) {
  const auto it = std::min_element(entries.begin(), entries.end(),
                                   [](const auto& a, const auto& b) { return a.residual < b.residual; });
  return it->exponent;
}

}  // namespace

double affine_calibration_bump(const GroupPoint& x) {
  return bump4((x[0] - 2.0) / 0.5) * bump4(x[1] / 0.5);
}

CompactRegion affine_calibration_region() { return CompactRegion({0.5, 3.0}, {-1.0, 1.0}); }

CalibrationReport calibrate_affine(const QuadRule& rule) {
  CalibrationReport rep;
  const Function bump = affine_calibration_bump;
  const CompactRegion region = affine_calibration_region();

  for (int e = -3; e <= 1; ++e) {
    const Group g = Group::affine({e, kAffineConventions.modular_exponent});
    rep.density.push_back({e, verify_left_invariance(g, bump, GroupPoint(2.0, 1.0), region, rule)});
  }
  const int density = argmin(rep.density);

  const CompactRegion k({1.5, 2.5}, {-0.5, 0.5});
  for (int e = -2; e <= 2; ++e) {
    const Group g = Group::affine({density, e});
    const auto points = grid_points(g, k, 5);
    const ConvOperator op(Mollifier::build(g, Profile::PolynomialBump, 0.2, rule), rule);
    double worst = 0.0;
    for (const char* fam : {"trig", "bumps"}) {
      worst = std::max(worst, forms_agree(op, catalog_family(fam, g), points));
    }
    rep.modular.push_back({e, worst});
  }
  rep.best = {density, argmin(rep.modular)};

  rep.modular_relation_residual =
      verify_modular_relation(Group::affine(rep.best), bump, GroupPoint(2.0, 0.0), region, rule);
  return rep;
}

}  // namespace lcapprox
