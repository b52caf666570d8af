#pragma once

#include <Eigen/Dense>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tvsieve/mapping.hpp"
#include "tvsieve/wavelet.hpp"

namespace tvsieve {

enum class FamilyKind { fourier, jacobi, daubechies };

/// A family of orthonormal basis functions on [0,1].
struct BasisFamily {
  FamilyKind kind = FamilyKind::fourier;
  double alpha = 0.0;      // jacobi
  double beta = 0.0;       // jacobi
  int filter_order = 0;    // daubechies N
  int resolution = 0;      // daubechies J_n

  static BasisFamily fourier() { return {FamilyKind::fourier}; }
  static BasisFamily jacobi(double alpha, double beta) {
    BasisFamily f;
    f.kind = FamilyKind::jacobi;
    f.alpha = alpha;
    f.beta = beta;
    return f;
  }
  static BasisFamily legendre() { return jacobi(0.0, 0.0); }
  static BasisFamily chebyshev() { return jacobi(-0.5, -0.5); }
  static BasisFamily daubechies(int order, int resolution) {
    BasisFamily f;
    f.kind = FamilyKind::daubechies;
    f.filter_order = order;
    f.resolution = resolution;
    return f;
  }

  std::string name() const;
};

/// A finite orthonormal basis, either on [0,1] or mapped onto an unbounded
/// domain.  With the Jacobian weight on, a mapped function is
/// sqrt(yhat'(x)) * phi_k(yhat(x)) and the family is orthonormal in L2 of the
/// unbounded domain; with the weight off it is the bare composition
/// phi_k(yhat(x)).
class BasisSet {
 public:
  /// Unit-interval basis.
  BasisSet(BasisFamily family, int count);
  /// Mapped basis.
  BasisSet(BasisFamily family, int count, Mapping mapping, bool jacobian_weight = true);

  int count() const { return count_; }
  bool mapped() const { return mapping_.has_value(); }
  const BasisFamily& family() const { return family_; }
  const Mapping& mapping() const;
  bool jacobian_weight() const { return jacobian_weight_; }

  /// k-th basis value (1 <= k <= count) at t in [0,1]; unit-interval sets only.
  double eval_time(int k, double t) const;
  /// k-th mapped basis value at x in the mapping's domain; mapped sets only.
  double eval_mapped(int k, double x) const;
  /// Dispatches on the support.
  double eval(int k, double v) const { return mapped() ? eval_mapped(k, v) : eval_time(k, v); }
  /// All basis values at once.
  Eigen::VectorXd eval_all(double v) const;

  /// True when the first function is numerically constant (range over a
  /// 512-point probe grid below 1e-8); drives the multicollinearity offset.
  bool first_function_constant() const;

 private:
  double eval_unit(int k, double t) const;  // domain-unchecked evaluation on [0,1]

  BasisFamily family_;
  int count_;
  std::optional<Mapping> mapping_;
  bool jacobian_weight_ = false;
  std::shared_ptr<const ScalingTable> wavelet_;
  mutable int first_constant_cache_ = -1;  // -1 unknown, 0 no, 1 yes
};

/// Quadrature approximation of the pairwise inner products; symmetric
/// count x count matrix.  Unit-interval sets integrate over [0,1]; mapped
/// sets integrate over the unbounded domain in the mapped coordinate.
Eigen::MatrixXd gram_matrix(const BasisSet& set, int grid_size);

/// Hierarchical (tensor) basis for 2-D functions: time set of size c and
/// mapped state set with indices state_start..d, laid out row-major with the
/// time index outermost.
struct TensorBasis {
  BasisSet time_basis;
  BasisSet state_basis;
  int state_start = 1;  // first state index; 2 when the first mapped function is constant

  TensorBasis(BasisSet time, BasisSet state);
  TensorBasis(BasisSet time, BasisSet state, int start);

  int state_count() const { return state_basis.count() - state_start + 1; }
  int size() const { return time_basis.count() * state_count(); }
  int flat_index(int l1, int l2) const {
    return (l1 - 1) * state_count() + (l2 - state_start);
  }
  Eigen::VectorXd eval(double t, double x) const;
};

Eigen::VectorXd tensor_eval(const TensorBasis& tb, double t, double x);

/// Grid sup-norm surrogates for the basis-size diagnostics; all finite and
/// nonnegative.
struct BasisDiagnostics {
  double xi = 0.0;        // sup over single time-basis functions
  double varsigma = 0.0;  // sup over state functions of |phi| + |phi'|
  double iota = 0.0;      // sup of the state vector euclidean norm
  double gamma = 0.0;     // sup of the time vector euclidean norm
  double zeta = 0.0;      // sup of the stacked tensor vector euclidean norm
};

BasisDiagnostics compute_basis_norms(std::span<const BasisSet> time_sets,
                                     std::span<const TensorBasis> tensor_sets,
                                     const std::vector<double>& t_grid,
                                     const std::vector<double>& x_grid);

}  // namespace tvsieve
