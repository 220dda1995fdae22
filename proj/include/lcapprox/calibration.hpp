#pragma once

#include <vector>

#include "lcapprox/group.hpp"
#include "lcapprox/quadrature.hpp"

namespace lcapprox {

struct CalibrationEntry {
  int exponent = 0;
  double residual = 0.0;
};

/// Residuals of every candidate exponent for the ax+b group and the winners.
///
/// The Haar density exponent is chosen by the left-invariance residual of a
/// compact bump under the shift (2, 1). With that density fixed, the modular
/// exponent is chosen by the largest discrepancy between the two convolution
/// forms over the "trig" and "bumps" families.
struct CalibrationReport {
  std::vector<CalibrationEntry> density;
  std::vector<CalibrationEntry> modular;
  AffineConventions best;
  double modular_relation_residual = 0.0;  ///< at the winners, shift (2, 0)
};

/// Compact C^3 bump centred at (2, 0) used by the density calibration.
double affine_calibration_bump(const GroupPoint& x);

/// Region containing the bump and its translates by (2, 1)⁻¹ and (2, 0)⁻¹.
CompactRegion affine_calibration_region();

CalibrationReport calibrate_affine(const QuadRule& rule = QuadRule{});

}  // namespace lcapprox
