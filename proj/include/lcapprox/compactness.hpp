#pragma once

#include <span>
#include <string>
#include <vector>

#include "lcapprox/conv_op.hpp"
#include "lcapprox/group.hpp"
#include "lcapprox/test_family.hpp"

namespace lcapprox {

/// Which translate the modulus compares against: Left uses f(s⁻¹·t) (the
/// convergence estimate), Right uses f(t·v) (pairs t₁, t₂ with t₁⁻¹·t₂ = v).
/// Both agree on abelian groups.
enum class Side { Left, Right };

struct ModulusGrids {
  int base = 0;   ///< points per coordinate on K; 0 picks default_grid()
  int shift = 0;  ///< points per coordinate on the radius ball; 0 picks 65 (1D) or 17 (2D)
};

struct ModulusReport {
  std::string family;
  CompactRegion region;
  double radius = 0.0;
  double omega = 0.0;
  std::size_t base_points = 0;
  std::size_t shift_points = 0;
};

/// Closed radius ball sampled on a grid that contains the identity. On
/// discrete groups: every point at distance < radius.
std::vector<GroupPoint> ball_points(const Group& g, double radius, int n);

/// max over (f, t, s) of |f(s⁻¹·t) − f(t)| (Left) or |f(t·s) − f(t)| (Right).
double modulus_over(const Group& g, std::span<const TestFunction> members,
                    std::span<const GroupPoint> base, std::span<const GroupPoint> shifts,
                    Side side);

/// Grid approximation of sup over (f in family, t in K, dist(s, e) < r) of
/// |f(s⁻¹·t) − f(t)|. Exactly zero for r = 0.
ModulusReport equicontinuity_modulus(const Group& g, const TestFamily& family,
                                     const CompactRegion& region, double radius,
                                     ModulusGrids grids = {}, Side side = Side::Left);

/// Sample of U₀⁻¹·K = {s⁻¹·t : s in U₀ grid, t in K grid}.
std::vector<GroupPoint> enlarged_points(const Group& g, std::span<const GroupPoint> base,
                                        double u0_radius, int n);

struct BoundCheck {
  double value = 0.0;  ///< measured left-hand side
  double bound = 0.0;  ///< right-hand side it must not exceed
};

/// value: sup over (operator, t in K grid) of |P^U f(t)|.
/// bound: max over (t in K grid, s in U₀ grid) of |f(s⁻¹·t)|, U₀ the largest
/// radius among the operators.
BoundCheck uniform_bound(std::span<const ConvOperator> ops, const TestFunction& f,
                         const CompactRegion& region, int grid);

/// value: sup over (operator, t₁, t₂ in K grid with dist(t₁⁻¹·t₂, e) < r) of
/// |P^U f(t₁) − P^U f(t₂)|.
/// bound: right modulus of {f} on U₀⁻¹·K at radius r.
BoundCheck output_equicontinuity(std::span<const ConvOperator> ops, const TestFunction& f,
                                 const CompactRegion& region, double radius, int grid);

struct NetResult {
  std::vector<std::size_t> centers;     ///< indices of the chosen centers
  std::vector<std::size_t> covered_by;  ///< per vector: index of its center
  std::vector<double> distance;         ///< per vector: sup distance to its center

  std::size_t size() const { return centers.size(); }
};

/// Greedy ε-net in sup distance: vectors are visited in order and become a
/// center unless an existing center lies within ε (lowest index wins ties).
NetResult epsilon_net_check(std::span<const std::vector<double>> vectors, double epsilon);

/// Grid samples of P^U f for each radius (the orbit whose net is checked).
std::vector<std::vector<double>> operator_orbit(const Group& g, Profile profile,
                                                std::span<const double> radii, const TestFunction& f,
                                                const CompactRegion& region, int grid,
                                                const QuadRule& rule = QuadRule{});

}  // namespace lcapprox
