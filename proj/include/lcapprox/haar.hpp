#pragma once

#include "lcapprox/group.hpp"
#include "lcapprox/quadrature.hpp"

namespace lcapprox {

/// Values of |f| on the region boundary above this fraction of the peak nodal
/// value count as a support escape.
inline constexpr double kSupportEscapeRatio = 1e-10;

/// |∫ f(shift·t) dμ(t) − ∫ f(t) dμ(t)| over the region. Throws SupportEscape
/// when f or its translate is not negligible on the region boundary.
double verify_left_invariance(const Group& g, const Function& f, const GroupPoint& shift,
                              const CompactRegion& region, const QuadRule& rule);

/// Factor c with ∫ f(t·shift) dμ(t) = c · ∫ f dμ, i.e. 1 / modular(shift).
double right_translation_factor(const Group& g, const GroupPoint& shift);

/// |∫ f(t·shift) dμ(t) − c(shift) · ∫ f dμ| over the region.
double verify_modular_relation(const Group& g, const Function& f, const GroupPoint& shift,
                               const CompactRegion& region, const QuadRule& rule);

}  // namespace lcapprox
