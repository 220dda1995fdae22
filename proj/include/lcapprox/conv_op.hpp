#pragma once

#include <span>
#include <vector>

#include "lcapprox/group.hpp"
#include "lcapprox/mollifier.hpp"
#include "lcapprox/quadrature.hpp"
#include "lcapprox/test_family.hpp"

namespace lcapprox {

/// P^U f = η_U * f for a fixed mollifier and quadrature rule.
class ConvOperator {
 public:
  ConvOperator(Mollifier mollifier, QuadRule rule = QuadRule{});

  const Group& group() const { return mollifier_.group(); }
  const Mollifier& mollifier() const { return mollifier_; }
  const QuadRule& rule() const { return rule_; }
  double radius() const { return mollifier_.radius(); }

  /// ∫ η(s) f(s⁻¹·t) dμ(s) over the mollifier support. Creases of f get
  /// panel edges on their preimages.
  double apply_form1(const Function& f, const GroupPoint& t,
                     std::span<const Crease> creases = {}) const;
  double apply_form1(const TestFunction& fn, const GroupPoint& t) const {
    return apply_form1(fn.f, t, fn.creases);
  }

  /// ∫ Δ(s⁻¹) η(t·s⁻¹) f(s) dμ(s) over the set of s with t·s⁻¹ in the support.
  double apply_form2(const Function& f, const GroupPoint& t,
                     std::span<const Crease> creases = {}) const;
  double apply_form2(const TestFunction& fn, const GroupPoint& t) const {
    return apply_form2(fn.f, t, fn.creases);
  }

  /// Δ(s⁻¹) η(t·s⁻¹).
  double kernel(const GroupPoint& t, const GroupPoint& s) const;

  /// Haar-weighted nodes over the support with panel edges on the identity
  /// coordinates and on {s : s⁻¹·t on a crease}.
  std::vector<WeightedNode> form1_nodes(const GroupPoint& t, std::span<const Crease> creases) const;

  /// Haar-weighted nodes covering {s : t·s⁻¹ in support}, with panel edges on
  /// the images of the identity coordinates and on the creases.
  std::vector<WeightedNode> form2_nodes(const GroupPoint& t,
                                        std::span<const Crease> creases = {}) const;

 private:
  struct Form1Term {
    GroupPoint s_inv;
    double coeff;  // weight * η(s)
  };

  Mollifier mollifier_;
  QuadRule rule_;
  std::vector<Form1Term> form1_terms_;
};

/// max over (f, t) of |apply_form1 − apply_form2| on the points.
double forms_agree(const ConvOperator& op, const TestFamily& family,
                   std::span<const GroupPoint> points);

struct ConvergenceRow {
  double radius = 0.0;
  double sup_error = 0.0;
  double modulus_bound = 0.0;
};

/// Per radius: sup over (f, t in grid) of |P^U f(t) − f(t)| alongside the
/// left equicontinuity modulus of the family on the same grid at that radius.
/// Radii must be positive and strictly descending.
std::vector<ConvergenceRow> convergence_sweep(const Group& g, Profile profile,
                                              std::span<const double> radii,
                                              const TestFamily& family,
                                              const CompactRegion& region, int grid,
                                              const QuadRule& rule = QuadRule{});

}  // namespace lcapprox
