#include "lcapprox/finite_rank.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <optional>

#include "lcapprox/error.hpp"

namespace lcapprox {

namespace {

std::vector<double> uniform_axis(Interval iv, int n) {
  std::vector<double> out;
  if (n == 1) return {0.5 * (iv.lo + iv.hi)};
  for (int i = 0; i < n; ++i) out.push_back(iv.lo + iv.length() * i / (n - 1));
  return out;
}

std::vector<double> integer_axis(Interval iv) {
  std::vector<double> out;
  for (double k = std::ceil(iv.lo); k <= std::floor(iv.hi); k += 1.0) out.push_back(k);
  return out;
}

// Lifted coordinate of x inside [lo, hi], trying the 2pi translates on Circle.
std::optional<double> lift(const Group& g, double x, Interval iv) {
  if (iv.contains(x)) return x;
  if (g.kind() == GroupKind::Circle) {
    const double base = x - kTwoPi * std::floor((x - iv.lo) / kTwoPi);
    for (double c : {base, base + kTwoPi, base - kTwoPi}) {
      if (iv.contains(c)) return c;
    }
  }
  if (g.kind() == GroupKind::FiniteCyclic) {
    const auto n = static_cast<double>(g.order());
    const double base = x - n * std::floor((x - iv.lo) / n);
    if (iv.contains(base)) return base;
  }
  return std::nullopt;
}

struct Stencil {
  std::size_t index[2] = {0, 0};
  double weight[2] = {0.0, 0.0};
  int count = 0;
};

// Linear interpolation stencil along one axis; constant beyond the extreme
// nodes but still inside the region.
std::optional<Stencil> axis_stencil(const Group& g, const std::vector<double>& axis, Interval iv,
                                    double x_in) {
  const auto x = lift(g, x_in, iv);
  if (!x) return std::nullopt;
  Stencil st;
  if (g.discrete()) {
    const auto it = std::lower_bound(axis.begin(), axis.end(), *x - 0.5);
    if (it == axis.end() || *it != std::round(*x)) return std::nullopt;
    st.index[0] = static_cast<std::size_t>(it - axis.begin());
    st.weight[0] = 1.0;
    st.count = 1;
    return st;
  }
  if (*x <= axis.front()) {
    st.index[0] = 0;
    st.weight[0] = 1.0;
    st.count = 1;
    return st;
  }
  if (*x >= axis.back()) {
    st.index[0] = axis.size() - 1;
    st.weight[0] = 1.0;
    st.count = 1;
    return st;
  }
  const auto hi = static_cast<std::size_t>(std::upper_bound(axis.begin(), axis.end(), *x) - axis.begin());
  const std::size_t lo = hi - 1;
  const double lam = (*x - axis[lo]) / (axis[hi] - axis[lo]);
  st.index[0] = lo;
  st.index[1] = hi;
  st.weight[0] = 1.0 - lam;
  st.weight[1] = lam;
  st.count = 2;
  return st;
}

// Multilinear interpolation of column k of `values` over the tensor grid.
std::optional<double> interpolate(const Group& g, const TensorGrid& grid, const CompactRegion& region,
                                  const Eigen::MatrixXd& values, int k, const GroupPoint& x) {
  const auto s0 = axis_stencil(g, grid.axes[0], region.axis(0), x[0]);
  if (!s0) return std::nullopt;
  if (grid.axes.size() == 1) {
    double v = 0.0;
    for (int a = 0; a < s0->count; ++a) {
      v += s0->weight[a] * values(static_cast<Eigen::Index>(s0->index[a]), k);
    }
    return v;
  }
  const auto s1 = axis_stencil(g, grid.axes[1], region.axis(1), x[1]);
  if (!s1) return std::nullopt;
  const std::size_t n1 = grid.axes[1].size();
  double v = 0.0;
  for (int a = 0; a < s0->count; ++a) {
    for (int b = 0; b < s1->count; ++b) {
      const auto row = static_cast<Eigen::Index>(s0->index[a] * n1 + s1->index[b]);
      v += s0->weight[a] * s1->weight[b] * values(row, k);
    }
  }
  return v;
}

}  // namespace

std::size_t TensorGrid::size() const {
  std::size_t n = 1;
  for (const auto& a : axes) n *= a.size();
  return n;
}

GroupPoint TensorGrid::point(const Group& g, std::size_t index) const {
  if (axes.size() == 1) return g.reduce(GroupPoint(axes[0][index]));
  const std::size_t n1 = axes[1].size();
  return GroupPoint(axes[0][index / n1], axes[1][index % n1]);
}

CompactRegion kernel_s_region(const ConvOperator& op, const CompactRegion& t_region, int t_points) {
  const Group& g = op.group();
  const CompactRegion supp = op.mollifier().support();
  if (g.discrete()) {
    const double m = std::max(std::abs(supp.axis(0).lo), std::abs(supp.axis(0).hi));
    Interval iv{std::ceil(t_region.axis(0).lo) - m - 1.0, std::floor(t_region.axis(0).hi) + m + 1.0};
    if (g.kind() == GroupKind::FiniteCyclic &&
        iv.length() + 1.0 >= static_cast<double>(g.order())) {
      iv = {0.0, static_cast<double>(g.order() - 1)};
    }
    if (iv.hi < iv.lo) throw DomainError("empty kernel s-region");
    return CompactRegion(iv);
  }
  const double r = op.radius();
  const double cell0 = t_points > 1 ? t_region.axis(0).length() / (t_points - 1) : 0.0;
  if (g.dimension() == 1) {
    Interval iv{t_region.axis(0).lo - r - cell0, t_region.axis(0).hi + r + cell0};
    if (g.kind() == GroupKind::Circle && iv.length() >= kTwoPi) iv = {0.0, kTwoPi};
    return CompactRegion(iv);
  }
  // s = (t_a / a, (t_b - b) / a) for (a, b) in [1 - r, 1 + r] x [-r, r].
  const double cell1 = t_points > 1 ? t_region.axis(1).length() / (t_points - 1) : 0.0;
  const double inv_lo = 1.0 / (1.0 + r);
  const double inv_hi = 1.0 / (1.0 - r);
  const Interval ta = t_region.axis(0);
  const Interval db{t_region.axis(1).lo - r, t_region.axis(1).hi + r};
  const double c[] = {inv_lo * db.lo, inv_lo * db.hi, inv_hi * db.lo, inv_hi * db.hi};
  Interval sa{ta.lo * inv_lo - cell0, ta.hi * inv_hi + cell0};
  sa.lo = std::max(sa.lo, 0.5 * ta.lo * inv_lo);
  const Interval sb{*std::min_element(std::begin(c), std::end(c)) - cell1,
                    *std::max_element(std::begin(c), std::end(c)) + cell1};
  return CompactRegion(sa, sb);
}

KernelSample sample_kernel(const ConvOperator& op, const CompactRegion& t_region, int t_points) {
  const Group& g = op.group();
  if (t_region.dim() != g.dimension()) throw DomainError("K_t dimension does not match group");
  KernelSample ks{g, t_region, kernel_s_region(op, t_region, t_points), {}, {}, {}, {}, {}};

  for (int i = 0; i < g.dimension(); ++i) {
    if (g.discrete()) {
      ks.t_grid.axes.push_back(integer_axis(t_region.axis(i)));
      ks.s_grid.axes.push_back(integer_axis(ks.s_region.axis(i)));
    } else {
      ks.t_grid.axes.push_back(uniform_axis(t_region.axis(i), t_points));
      std::vector<double> xs;
      for (const auto& [x, w] : axis_rule(ks.s_region.axis(i), op.rule())) xs.push_back(x);
      ks.s_grid.axes.push_back(std::move(xs));
    }
  }
  if (ks.s_grid.size() == 0 || ks.t_grid.size() == 0) throw DomainError("empty kernel sample grid");

  // Chart weights per axis, then times the Haar density at each node.
  std::vector<std::vector<double>> axis_w;
  for (int i = 0; i < g.dimension(); ++i) {
    std::vector<double> ws;
    if (g.discrete()) {
      ws.assign(ks.s_grid.axes[static_cast<std::size_t>(i)].size(), 1.0);
    } else {
      for (const auto& [x, w] : axis_rule(ks.s_region.axis(i), op.rule())) ws.push_back(w);
    }
    axis_w.push_back(std::move(ws));
  }
  const auto ns = static_cast<Eigen::Index>(ks.s_grid.size());
  const auto nt = static_cast<Eigen::Index>(ks.t_grid.size());
  ks.s_weight.resize(static_cast<std::size_t>(ns));
  ks.s_scale.resize(ns);
  std::vector<GroupPoint> s_points;
  for (Eigen::Index j = 0; j < ns; ++j) {
    const auto ju = static_cast<std::size_t>(j);
    const GroupPoint s = ks.s_grid.point(g, ju);
    double w = 0.0;
    if (g.dimension() == 1) {
      w = axis_w[0][ju];
    } else {
      const std::size_t n1 = ks.s_grid.axes[1].size();
      w = axis_w[0][ju / n1] * axis_w[1][ju % n1];
    }
    ks.s_weight[ju] = w * g.haar_density(s);
    ks.s_scale(j) = std::sqrt(ks.s_weight[ju]);
    s_points.push_back(s);
  }
  ks.matrix.resize(nt, ns);
  for (Eigen::Index i = 0; i < nt; ++i) {
    const GroupPoint t = ks.t_grid.point(g, static_cast<std::size_t>(i));
    for (Eigen::Index j = 0; j < ns; ++j) {
      ks.matrix(i, j) = op.kernel(t, s_points[static_cast<std::size_t>(j)]) * ks.s_scale(j);
    }
  }
  return ks;
}

Eigen::VectorXd discretized_apply(const KernelSample& sample, const Function& f) {
  const Eigen::Index ns = sample.matrix.cols();
  Eigen::VectorXd fs(ns);
  for (Eigen::Index j = 0; j < ns; ++j) {
    fs(j) = f(sample.s_grid.point(sample.group, static_cast<std::size_t>(j)));
  }
  Eigen::VectorXd out(sample.matrix.rows());
  std::vector<double> terms(static_cast<std::size_t>(ns));
  for (Eigen::Index i = 0; i < sample.matrix.rows(); ++i) {
    for (Eigen::Index j = 0; j < ns; ++j) {
      terms[static_cast<std::size_t>(j)] =
          sample.kernel_value(i, j) * sample.s_weight[static_cast<std::size_t>(j)] * fs(j);
    }
    out(i) = pairwise_sum(terms);
  }
  return out;
}

SeparableKernel low_rank_factor(const KernelSample& sample, FactorTarget target) {
  if (sample.matrix.size() == 0) throw DomainError("empty kernel sample");
  // The decomposition runs in extended precision so that the full-rank
  // product reproduces the sample to within rounding of the stored factors.
  using MatrixXld = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
  const Eigen::BDCSVD<MatrixXld> svd(sample.matrix.cast<long double>(), Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd sigma = svd.singularValues().cast<double>();
  const auto full = static_cast<int>(sigma.size());

  // tail[k] = Frobenius mass of sigma_k, sigma_{k+1}, ...
  std::vector<double> tail(static_cast<std::size_t>(full) + 1, 0.0);
  for (int k = full - 1; k >= 0; --k) {
    tail[static_cast<std::size_t>(k)] = tail[static_cast<std::size_t>(k) + 1] + sigma(k) * sigma(k);
  }

  SeparableKernel sk;
  int n = 0;
  if (const auto* r = std::get_if<RankTarget>(&target)) {
    if (r->rank < 1) throw DomainError("rank must be positive");
    n = r->rank;
    if (n > full) {
      std::cerr << "warning: rank " << n << " exceeds min(dims) = " << full << ", clamped\n";
      n = full;
      sk.clamped_ = true;
    }
  } else {
    const double tau = std::get<ToleranceTarget>(target).tau;
    if (!(tau > 0.0)) throw DomainError("tolerance must be positive");
    n = full;
    for (int k = 0; k <= full; ++k) {
      if (std::sqrt(tail[static_cast<std::size_t>(k)]) <= tau) {
        n = std::max(k, 1);
        break;
      }
    }
  }

  sk.group_ = sample.group;
  sk.t_region_ = sample.t_region;
  sk.s_region_ = sample.s_region;
  sk.t_grid_ = sample.t_grid;
  sk.s_grid_ = sample.s_grid;
  sk.s_weight_ = sample.s_weight;
  sk.singular_values_ = sigma;
  sk.discarded_mass_ = std::sqrt(tail[static_cast<std::size_t>(n)]);
  sk.u_ = (svd.matrixU().leftCols(n) * svd.singularValues().head(n).asDiagonal()).cast<double>();
  sk.v_ = (sample.s_scale.cast<long double>().cwiseInverse().asDiagonal() * svd.matrixV().leftCols(n)).cast<double>();
  return sk;
}

double SeparableKernel::u(int k, const GroupPoint& t) const {
  return interpolate(group_, t_grid_, t_region_, u_, k, t).value_or(0.0);
}

double SeparableKernel::v(int k, const GroupPoint& s) const {
  return interpolate(group_, s_grid_, s_region_, v_, k, s).value_or(0.0);
}

double SeparableKernel::eval(const GroupPoint& t, const GroupPoint& s) const {
  double sum = 0.0;
  for (int k = 0; k < rank(); ++k) sum += u(k, t) * v(k, s);
  return sum;
}

Eigen::VectorXd SeparableKernel::pairings(const Function& f) const {
  const auto ns = v_.rows();
  std::vector<double> wf(static_cast<std::size_t>(ns));
  for (Eigen::Index j = 0; j < ns; ++j) {
    const auto ju = static_cast<std::size_t>(j);
    wf[ju] = s_weight_[ju] * f(s_grid_.point(group_, ju));
  }
  Eigen::VectorXd c(rank());
  std::vector<double> terms(static_cast<std::size_t>(ns));
  for (int k = 0; k < rank(); ++k) {
    for (Eigen::Index j = 0; j < ns; ++j) {
      terms[static_cast<std::size_t>(j)] = v_(j, k) * wf[static_cast<std::size_t>(j)];
    }
    c(k) = pairwise_sum(terms);
  }
  return c;
}

double SeparableKernel::apply(const Eigen::VectorXd& pairings, const GroupPoint& t) const {
  double sum = 0.0;
  for (int k = 0; k < rank(); ++k) {
    const auto uk = interpolate(group_, t_grid_, t_region_, u_, k, t);
    if (!uk) throw DomainError("point " + to_string(t) + " is outside K_t " + to_string(t_region_));
    sum += *uk * pairings(k);
  }
  return sum;
}

double apply_finite_rank(const SeparableKernel& sk, const Function& f, const GroupPoint& t) {
  return sk.apply(sk.pairings(f), t);
}

std::vector<RankErrorRow> rank_error_sweep(const ConvOperator& op, const CompactRegion& t_region,
                                           int t_points, std::span<const int> ranks,
                                           const TestFamily& family) {
  for (std::size_t i = 0; i < ranks.size(); ++i) {
    if (ranks[i] < 1) throw DomainError("ranks must be positive");
    if (i > 0 && ranks[i] <= ranks[i - 1]) throw DomainError("ranks must be ascending");
  }
  const KernelSample sample = sample_kernel(op, t_region, t_points);
  double measure = 0.0;
  for (double w : sample.s_weight) measure += w;

  struct Reference {
    const TestFunction* fn;
    Eigen::VectorXd exact;
    double sup_f;
  };
  std::vector<Reference> refs;
  for (const TestFunction& fn : family.members) {
    double sup_f = 0.0;
    for (std::size_t j = 0; j < sample.s_grid.size(); ++j) {
      sup_f = std::max(sup_f, std::abs(fn.f(sample.s_grid.point(sample.group, j))));
    }
    refs.push_back({&fn, discretized_apply(sample, fn.f), sup_f});
  }

  std::vector<RankErrorRow> rows;
  for (int n : ranks) {
    const SeparableKernel sk = low_rank_factor(sample, RankTarget{n});
    RankErrorRow row{sk.rank(), 0.0, sk.discarded_mass(), 0.0};
    for (const Reference& ref : refs) {
      const Eigen::VectorXd c = sk.pairings(ref.fn->f);
      const Eigen::VectorXd approx = sk.u_values() * c;
      row.sup_error = std::max(row.sup_error, (approx - ref.exact).cwiseAbs().maxCoeff());
      row.bound = std::max(row.bound, sk.discarded_mass() * ref.sup_f * std::sqrt(measure));
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace lcapprox
