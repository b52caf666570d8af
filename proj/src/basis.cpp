#include "tvsieve/basis.hpp"

#include <algorithm>
#include <cmath>

#include "tvsieve/errors.hpp"

namespace tvsieve {

namespace {

// log of the Jacobi normalization gamma_n^{a,b}; the n = 0 case goes through
// Gamma(a+b+2) to stay finite when a+b = -1.
double log_jacobi_norm(int n, double a, double b) {
  if (n == 0)
    return (a + b + 1.0) * std::log(2.0) + std::lgamma(a + 1.0) + std::lgamma(b + 1.0) -
           std::lgamma(a + b + 2.0);
  return (a + b + 1.0) * std::log(2.0) + std::lgamma(n + a + 1.0) + std::lgamma(n + b + 1.0) -
         std::log(2.0 * n + a + b + 1.0) - std::lgamma(n + 1.0) - std::lgamma(n + a + b + 1.0);
}

// Jacobi polynomial J_n^{a,b}(y) by the three-term recurrence.
double jacobi_poly(int n, double a, double b, double y) {
  if (n == 0) return 1.0;
  double prev = 1.0;
  double cur = 0.5 * ((a + b + 2.0) * y + (a - b));
  for (int k = 1; k < n; ++k) {
    double c = 2.0 * k + a + b;
    double a1 = 2.0 * (k + 1.0) * (k + a + b + 1.0) * c;
    double a2 = (c + 1.0) * (a * a - b * b);
    double a3 = c * (c + 1.0) * (c + 2.0);
    double a4 = 2.0 * (k + a) * (k + b) * (c + 2.0);
    double next = ((a2 + a3 * y) * cur - a4 * prev) / a1;
    prev = cur;
    cur = next;
  }
  return cur;
}

}  // namespace

std::string BasisFamily::name() const {
  switch (kind) {
    case FamilyKind::fourier:
      return "fourier";
    case FamilyKind::jacobi:
      if (alpha == 0.0 && beta == 0.0) return "legendre";
      if (alpha == -0.5 && beta == -0.5) return "chebyshev";
      return "jacobi(" + std::to_string(alpha) + "," + std::to_string(beta) + ")";
    case FamilyKind::daubechies:
      return "daubechies-" + std::to_string(filter_order) + "@" + std::to_string(resolution);
  }
  return "unknown";
}

BasisSet::BasisSet(BasisFamily family, int count) : family_(family), count_(count) {
  if (count < 1) throw ConfigError("BasisSet: count must be >= 1");
  if (family.kind == FamilyKind::jacobi && (family.alpha <= -1.0 || family.beta <= -1.0))
    throw ConfigError("BasisSet: jacobi parameters must exceed -1");
  if (family.kind == FamilyKind::daubechies) {
    if (family.resolution < 0) throw ConfigError("BasisSet: wavelet resolution must be >= 0");
    if (count > (1 << family.resolution))
      throw ConfigError("BasisSet: wavelet count exceeds 2^resolution");
    wavelet_ = daubechies_scaling(family.filter_order, std::max(10, family.resolution + 6));
  }
}

BasisSet::BasisSet(BasisFamily family, int count, Mapping mapping, bool jacobian_weight)
    : BasisSet(family, count) {
  mapping_ = mapping;
  jacobian_weight_ = jacobian_weight;
}

const Mapping& BasisSet::mapping() const {
  if (!mapping_) throw ConfigError("BasisSet: unit-interval set has no mapping");
  return *mapping_;
}

double BasisSet::eval_unit(int k, double t) const {
  switch (family_.kind) {
    case FamilyKind::fourier: {
      // index 1 -> 1, 2j -> sqrt(2) cos(2j pi t), 2j+1 -> sqrt(2) sin(2j pi t)
      if (k == 1) return 1.0;
      int j = k / 2;
      double arg = 2.0 * M_PI * j * t;
      return (k % 2 == 0) ? std::sqrt(2.0) * std::cos(arg) : std::sqrt(2.0) * std::sin(arg);
    }
    case FamilyKind::jacobi: {
      int n = k - 1;
      double y = 2.0 * t - 1.0;
      double a = family_.alpha, b = family_.beta;
      double w = std::pow(1.0 - y, a) * std::pow(1.0 + y, b);
      double norm2 = 2.0 * w * std::exp(-log_jacobi_norm(n, a, b));
      return std::sqrt(norm2) * jacobi_poly(n, a, b, y);
    }
    case FamilyKind::daubechies:
      return periodized_scaling(*wavelet_, family_.resolution, k - 1, t);
  }
  return 0.0;
}

double BasisSet::eval_time(int k, double t) const {
  if (mapped()) throw ConfigError("eval_time: set is mapped");
  if (k < 1 || k > count_)
    throw DomainError("eval_time: index " + std::to_string(k) + " out of range");
  if (t < 0.0 || t > 1.0)
    throw DomainError("eval_time: t = " + std::to_string(t) + " outside [0,1]");
  return eval_unit(k, t);
}

double BasisSet::eval_mapped(int k, double x) const {
  if (!mapped()) throw ConfigError("eval_mapped: set has unit-interval support");
  if (k < 1 || k > count_)
    throw DomainError("eval_mapped: index " + std::to_string(k) + " out of range");
  if (!mapping_->contains(x))
    throw DomainError("eval_mapped: x = " + std::to_string(x) + " outside mapping domain");
  double y = mapping_->unit_from_x(x);
  y = std::clamp(y, 0.0, 1.0);
  double value = eval_unit(k, y);
  if (!jacobian_weight_) return value;
  return std::sqrt(mapping_->unit_deriv(x)) * value;
}

Eigen::VectorXd BasisSet::eval_all(double v) const {
  Eigen::VectorXd out(count_);
  if (mapped()) {
    if (!mapping_->contains(v))
      throw DomainError("eval_all: x = " + std::to_string(v) + " outside mapping domain");
    double y = std::clamp(mapping_->unit_from_x(v), 0.0, 1.0);
    double w = jacobian_weight_ ? std::sqrt(mapping_->unit_deriv(v)) : 1.0;
    for (int k = 1; k <= count_; ++k) out(k - 1) = w * eval_unit(k, y);
  } else {
    if (v < 0.0 || v > 1.0)
      throw DomainError("eval_all: t = " + std::to_string(v) + " outside [0,1]");
    for (int k = 1; k <= count_; ++k) out(k - 1) = eval_unit(k, v);
  }
  return out;
}

bool BasisSet::first_function_constant() const {
  if (first_constant_cache_ >= 0) return first_constant_cache_ == 1;
  const int probes = 512;
  double lo = std::numeric_limits<double>::max();
  double hi = std::numeric_limits<double>::lowest();
  for (int i = 0; i < probes; ++i) {
    double y = (i + 0.5) / probes;
    double v = mapped() ? eval_mapped(1, mapping_->x_from_unit(y)) : eval_unit(1, y);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  first_constant_cache_ = (hi - lo < 1e-8) ? 1 : 0;
  return first_constant_cache_ == 1;
}

Eigen::MatrixXd gram_matrix(const BasisSet& set, int grid_size) {
  if (grid_size < 10 * set.count())
    throw ConfigError("gram_matrix: grid must have at least 10*count points");
  const int p = set.count();
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(p, p);

  // Trapezoid in the unit coordinate; for mapped sets the integral over the
  // unbounded domain is transported to y with jacobian dx/dy.
  const double eps = 0.5 / grid_size;
  for (int i = 0; i <= grid_size; ++i) {
    double y = static_cast<double>(i) / grid_size;
    double weight = (i == 0 || i == grid_size) ? 0.5 : 1.0;
    Eigen::VectorXd values(p);
    if (set.mapped()) {
      double yc = std::clamp(y, eps, 1.0 - eps);
      double x = set.mapping().x_from_unit(yc);
      values = set.eval_all(x);
      if (set.jacobian_weight()) {
        // integral over the unbounded domain transported to y: dx/dy = 1/yhat'(x)
        values *= std::sqrt(1.0 / set.mapping().unit_deriv(x));
      }
      // without the weight the family is orthonormal against dy, so no jacobian
    } else {
      for (int k = 1; k <= p; ++k) values(k - 1) = set.eval_time(k, y);
    }
    gram.noalias() += weight * values * values.transpose();
  }
  gram /= static_cast<double>(grid_size);
  return 0.5 * (gram + gram.transpose());
}

TensorBasis::TensorBasis(BasisSet time, BasisSet state)
    : time_basis(std::move(time)), state_basis(std::move(state)) {
  state_start = state_basis.first_function_constant() ? 2 : 1;
  if (state_start > state_basis.count())
    throw ConfigError("TensorBasis: state basis has no usable functions");
}

TensorBasis::TensorBasis(BasisSet time, BasisSet state, int start)
    : time_basis(std::move(time)), state_basis(std::move(state)), state_start(start) {
  if (start < 1 || start > state_basis.count())
    throw ConfigError("TensorBasis: state_start out of range");
}

Eigen::VectorXd TensorBasis::eval(double t, double x) const {
  Eigen::VectorXd time_values = time_basis.eval_all(t);
  Eigen::VectorXd state_values = state_basis.eval_all(x);
  Eigen::VectorXd out(size());
  for (int l1 = 1; l1 <= time_basis.count(); ++l1)
    for (int l2 = state_start; l2 <= state_basis.count(); ++l2)
      out(flat_index(l1, l2)) = time_values(l1 - 1) * state_values(l2 - 1);
  return out;
}

Eigen::VectorXd tensor_eval(const TensorBasis& tb, double t, double x) { return tb.eval(t, x); }

BasisDiagnostics compute_basis_norms(std::span<const BasisSet> time_sets,
                                     std::span<const TensorBasis> tensor_sets,
                                     const std::vector<double>& t_grid,
                                     const std::vector<double>& x_grid) {
  if (t_grid.empty() || x_grid.empty())
    throw ConfigError("compute_basis_norms: grids must be nonempty");
  BasisDiagnostics diag;

  for (const BasisSet& set : time_sets) {
    for (double t : t_grid) {
      Eigen::VectorXd values = set.eval_all(t);
      diag.xi = std::max(diag.xi, values.cwiseAbs().maxCoeff());
      diag.gamma = std::max(diag.gamma, values.norm());
    }
  }

  // finite-difference surrogate for |phi'| on the x grid
  const double h = 1e-5;
  for (const TensorBasis& tb : tensor_sets) {
    const BasisSet& state = tb.state_basis;
    for (double x : x_grid) {
      Eigen::VectorXd values = state.eval_all(x);
      diag.iota = std::max(diag.iota, values.norm());
      Eigen::VectorXd up = state.eval_all(x + h);
      Eigen::VectorXd down = state.eval_all(x - h);
      for (int k = 0; k < state.count(); ++k) {
        double deriv = (up(k) - down(k)) / (2.0 * h);
        diag.varsigma = std::max(diag.varsigma, std::abs(values(k)) + std::abs(deriv));
      }
    }
  }

  for (double t : t_grid)
    for (double x : x_grid) {
      double sq = 0.0;
      for (const TensorBasis& tb : tensor_sets) sq += tb.eval(t, x).squaredNorm();
      diag.zeta = std::max(diag.zeta, std::sqrt(sq));
    }
  return diag;
}

}  // namespace tvsieve
