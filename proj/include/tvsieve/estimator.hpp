#pragma once

#include <Eigen/Dense>
#include <memory>
#include <vector>

#include "tvsieve/basis.hpp"

namespace tvsieve {

/// Observations for the regression Y_i = m_0(t_i) + sum_j m_j(t_i, X_{j,i}) + eps_i.
struct RegressionData {
  Eigen::VectorXd y;
  Eigen::MatrixXd x;      // n x r covariates
  Eigen::VectorXd times;  // t_i

  long n() const { return y.size(); }
  int r() const { return static_cast<int>(x.cols()); }

  /// Nonlinear AR preparation: responses Y_i = X_{r+i}, covariate j is the
  /// j-th lag, times follow the response.  Trims the first `lags` samples.
  static RegressionData from_series(const std::vector<double>& series, int lags);
};

/// Per-covariate sieve sizes and basis choices.  The state indices run from
/// `state_start` (2 when the first mapped function is constant) to d.
struct CovariateConfig {
  BasisSet time_basis;   // c_j functions on [0,1]
  BasisSet state_basis;  // mapped, d_j functions
  int state_start = 1;
  int mean_shift_count = 0;  // c_{j,l}; defaults to c_j when 0

  int c() const { return time_basis.count(); }
  int d() const { return state_basis.count(); }
  int state_count() const { return d() - state_start + 1; }
  int block_size() const { return c() * state_count(); }
  TensorBasis tensor() const { return TensorBasis(time_basis, state_basis, state_start); }
};

struct SieveConfig {
  BasisSet intercept_basis;  // c_0 functions on [0,1]
  std::vector<CovariateConfig> covariates;

  int c0() const { return intercept_basis.count(); }
  int r() const { return static_cast<int>(covariates.size()); }
  /// Total parameter count: c0 + sum_j c_j * (d_j - g_j + 1).
  int total_params() const;
  int block_offset(int j) const;  // column offset of covariate j's block

  /// Fourier time bases and mapped bases of one family for every covariate;
  /// the common desk configuration.
  static SieveConfig uniform(int r, int c0, int c, int d, const BasisFamily& time_family,
                             const BasisFamily& state_family, const Mapping& mapping,
                             bool jacobian_weight = true);
};

/// Design matrix W = [W0 | W1] with W0 the intercept time block and W1 the
/// per-covariate tensor blocks, row-major in (l1, l2) within each block.
Eigen::MatrixXd build_design(const RegressionData& data, const SieveConfig& config);

/// Fitted sieve least squares model: pilot coefficients, cached inverse Gram,
/// mean-shift fits and residuals.
class SieveFit {
 public:
  SieveFit(RegressionData data, SieveConfig config);

  const SieveConfig& config() const { return config_; }
  const RegressionData& data() const { return data_; }
  long n() const { return data_.n(); }
  int total_params() const { return config_.total_params(); }

  const Eigen::VectorXd& beta() const { return beta_; }
  /// (n^-1 W^T W)^-1, cached from the decomposition.
  const Eigen::MatrixXd& gram_inverse() const { return gram_inverse_; }
  /// Pilot residuals eps_i = Y_i - m*_0(t_i) - sum_j m*_j(t_i, X_{j,i}).
  const Eigen::VectorXd& residuals() const { return residuals_; }
  double condition_number() const { return condition_; }

  /// Pilot surfaces: j = 0 evaluates the intercept (x ignored).
  double eval_pilot(int j, double t, double x = 0.0) const;

  /// Mean-shift regressions for every (j, l2); required before the corrected
  /// surfaces, chi, or the bootstrap direction vector are available.
  void fit_mean_shifts();
  bool mean_shifts_ready() const { return mean_shifts_ready_; }

  /// vartheta_{j,l2}(t), the fitted time-varying mean of phi_{l2}(X_j).
  double theta(int j, int l2, double t) const;
  /// chi_j(t) = sum_{l1,l2} beta_{j,l1,l2} phi_{l1}(t) vartheta_{j,l2}(t).
  double eval_chi(int j, double t) const;
  /// Identifiability-corrected surfaces.
  double eval_corrected(int j, double t, double x = 0.0) const;

  /// Tensor vector b_j(t,x) of covariate j.
  Eigen::VectorXd basis_vector(int j, double t, double x) const;
  /// f_j(t): same layout as b_j with phi_{l2}(x) replaced by vartheta_{j,l2}(t).
  Eigen::VectorXd mean_vector(int j, double t) const;
  /// Full-length direction (0, ..., b_j - f_j, ..., 0) used by the bootstrap
  /// statistic.
  Eigen::VectorXd r_bar(int j, double t, double x) const;

  /// Raw per-sample evaluations kept for the bootstrap: state basis values
  /// phi_{l2}(X_{j,i}) and time basis values of covariate j.
  const Eigen::MatrixXd& state_values(int j) const { return state_values_[j - 1]; }
  const Eigen::MatrixXd& time_values(int j) const { return time_values_[j - 1]; }
  const Eigen::MatrixXd& intercept_values() const { return intercept_values_; }
  const Eigen::MatrixXd& design() const { return design_; }

 private:
  RegressionData data_;
  SieveConfig config_;
  Eigen::MatrixXd design_;
  Eigen::VectorXd beta_;
  Eigen::MatrixXd gram_inverse_;
  Eigen::VectorXd residuals_;
  double condition_ = 0.0;

  Eigen::MatrixXd intercept_values_;            // n x c0
  std::vector<Eigen::MatrixXd> time_values_;    // n x c_j
  std::vector<Eigen::MatrixXd> state_values_;   // n x (d_j - g_j + 1)
  std::vector<Eigen::MatrixXd> mean_shift_;     // per j: c_ms x state_count coefficients
  bool mean_shifts_ready_ = false;
};

/// Pilot OLS fit (orthogonal decomposition); throws SingularDesignError on a
/// rank-deficient design.
std::shared_ptr<SieveFit> fit_pilot(const RegressionData& data, const SieveConfig& config);
/// Pilot fit plus mean-shift regressions.
std::shared_ptr<SieveFit> fit_model(const RegressionData& data, const SieveConfig& config);

/// OLS of `values` on the first `count` time-basis functions at `times`;
/// shared by the mean-shift step and its tests.
Eigen::VectorXd fit_time_regression(const BasisSet& time_basis, int count,
                                    const Eigen::VectorXd& times, const Eigen::VectorXd& values);

}  // namespace tvsieve
