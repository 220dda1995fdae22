#pragma once

#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "lcapprox/conv_op.hpp"
#include "lcapprox/group.hpp"
#include "lcapprox/quadrature.hpp"
#include "lcapprox/test_family.hpp"

namespace lcapprox {

/// Tensor grid in lifted chart coordinates. Points are stored row-major
/// (first axis outermost).
struct TensorGrid {
  std::vector<std::vector<double>> axes;

  std::size_t size() const;
  GroupPoint point(const Group& g, std::size_t index) const;  ///< chart-reduced
};

/// Kernel Δ(s⁻¹)·η(t·s⁻¹) on t-grid x s-nodes, with column j scaled by
/// sqrt(weight_j · haar_density(s_j)).
struct KernelSample {
  Group group;
  CompactRegion t_region;
  CompactRegion s_region;
  TensorGrid t_grid;
  TensorGrid s_grid;
  std::vector<double> s_weight;  ///< quadrature weight times Haar density
  Eigen::VectorXd s_scale;       ///< sqrt(s_weight)
  Eigen::MatrixXd matrix;        ///< weighted sample

  /// Kernel value at (t_i, s_j) with the column scaling undone.
  double kernel_value(Eigen::Index i, Eigen::Index j) const { return matrix(i, j) / s_scale(j); }
};

/// Samples the kernel of `op` on `t_points` points per coordinate over K_t
/// (every integer point on discrete groups) against the quadrature nodes of
/// K_s, the padded set of s reachable from K_t through the mollifier support.
KernelSample sample_kernel(const ConvOperator& op, const CompactRegion& t_region, int t_points);

/// K_s for a given K_t: (support)⁻¹-translates of K_t enlarged by one t-grid cell.
CompactRegion kernel_s_region(const ConvOperator& op, const CompactRegion& t_region, int t_points);

/// Discretized P^U f on the t-grid: Σ_j kernel(t_i, s_j) · weight_j · f(s_j).
Eigen::VectorXd discretized_apply(const KernelSample& sample, const Function& f);

struct RankTarget {
  int rank = 0;
};
struct ToleranceTarget {
  double tau = 0.0;
};
using FactorTarget = std::variant<RankTarget, ToleranceTarget>;

/// F(t, s) = Σ_k u_k(t) v_k(s) from a truncated SVD of the weighted sample.
/// Off-grid values interpolate piecewise linearly; both factors are zero
/// outside their grids' bounding regions.
class SeparableKernel {
 public:
  int rank() const { return static_cast<int>(u_.cols()); }
  bool clamped() const { return clamped_; }
  double discarded_mass() const { return discarded_mass_; }
  const Eigen::VectorXd& singular_values() const { return singular_values_; }
  const Group& group() const { return group_; }
  const Eigen::MatrixXd& u_values() const { return u_; }  ///< t-grid x rank
  const Eigen::MatrixXd& v_values() const { return v_; }  ///< s-grid x rank

  double u(int k, const GroupPoint& t) const;
  double v(int k, const GroupPoint& s) const;
  double eval(const GroupPoint& t, const GroupPoint& s) const;

  /// The N pairings ∫ v_k f dμ on the s-nodes, computed once per f.
  Eigen::VectorXd pairings(const Function& f) const;
  /// Σ_k u_k(t) c_k. Throws DomainError when t is outside K_t.
  double apply(const Eigen::VectorXd& pairings, const GroupPoint& t) const;

 private:
  friend SeparableKernel low_rank_factor(const KernelSample&, FactorTarget);

  Group group_ = Group::real_line();
  CompactRegion t_region_;
  CompactRegion s_region_;
  TensorGrid t_grid_;
  TensorGrid s_grid_;
  std::vector<double> s_weight_;
  Eigen::MatrixXd u_;
  Eigen::MatrixXd v_;
  Eigen::VectorXd singular_values_;
  double discarded_mass_ = 0.0;
  bool clamped_ = false;
};

/// Truncated SVD. A rank target above min(dims) is clamped (clamped() is set
/// and a warning goes to stderr); a tolerance target picks the smallest N
/// whose discarded Frobenius mass is <= tau. Throws DomainError for tau <= 0.
SeparableKernel low_rank_factor(const KernelSample& sample, FactorTarget target);

/// Σ_k u_k(t) · ∫ v_k(s) f(s) dμ(s).
double apply_finite_rank(const SeparableKernel& sk, const Function& f, const GroupPoint& t);

struct RankErrorRow {
  int rank = 0;
  double sup_error = 0.0;       ///< vs discretized P^U on the t-grid
  double discarded_mass = 0.0;  ///< Frobenius norm of the dropped singular values
  double bound = 0.0;           ///< discarded_mass · sup|f| · sqrt(μ(K_s))
};

/// Ranks must be ascending and positive.
std::vector<RankErrorRow> rank_error_sweep(const ConvOperator& op, const CompactRegion& t_region,
                                           int t_points, std::span<const int> ranks,
                                           const TestFamily& family);

}  // namespace lcapprox
