#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "tvsieve/estimator.hpp"

namespace tvsieve {

/// Multiplier bootstrap controls.  B draws estimate the pointwise scale
/// h_j(t,x); M fresh draws calibrate the sup-statistic critical value.
struct BootstrapConfig {
  int block_length = 8;   // m
  int h_draws = 1000;     // B
  int c_draws = 1000;     // M
  int t_grid = 100;       // C1
  int y_grid = 100;       // C2 (uniform in the mapped coordinate)
  double alpha = 0.05;
  std::uint64_t seed = 1;
  double x_lo = -10.0;
  double x_hi = 10.0;

  void validate(long n, int r) const;
};

/// Blocked-sum rows U(i,m), i = 1..n-m: the stacked intercept and covariate
/// blocks whose Gaussian-multiplier combinations form the bootstrap statistic.
Eigen::MatrixXd blocked_u_matrix(const SieveFit& fit, int block_length);

/// Draws of Xi = (n-m-r)^{-1/2} m^{-1/2} sum_i U(i,m) R_i, reproducible by
/// draw index under a master seed.
class MultiplierBootstrap {
 public:
  MultiplierBootstrap(std::shared_ptr<const SieveFit> fit, int block_length, std::uint64_t seed);

  const SieveFit& fit() const { return *fit_; }
  int block_length() const { return block_length_; }
  long term_count() const { return u_matrix_.rows(); }

  Eigen::VectorXd draw_xi(std::uint64_t draw_index) const;
  /// `count` draws stacked as rows, draw indices offset..offset+count-1.
  Eigen::MatrixXd draw_pool(int count, std::uint64_t offset = 0) const;
  /// Statistic for externally supplied multipliers R_i; test hook.
  Eigen::VectorXd xi_from_multipliers(const Eigen::VectorXd& multipliers) const;
  /// Exact conditional covariance of Xi given the data.
  Eigen::MatrixXd conditional_covariance() const;

 private:
  std::shared_ptr<const SieveFit> fit_;
  int block_length_;
  std::uint64_t seed_;
  Eigen::MatrixXd u_matrix_;
  double normalization_;
};

/// The bootstrap statistic T_j(t,x) = Xi^T PiHat^{-1} rbar_j(t,x).
double eval_T(const SieveFit& fit, const Eigen::VectorXd& xi, int j, double t, double x);

/// Evaluation grid with corrected estimates, bootstrap scale, and band edges.
struct ScrGrid {
  int j = 1;
  long n = 0;
  double alpha = 0.05;
  double c_alpha = 0.0;
  Eigen::VectorXd t;          // C1
  Eigen::VectorXd x;          // C2, transported from the uniform y grid
  Eigen::VectorXd y;          // C2
  Eigen::MatrixXd m_hat;      // C1 x C2
  Eigen::MatrixXd h_hat;
  Eigen::MatrixXd lower;
  Eigen::MatrixXd upper;
  Eigen::VectorXd pool_stats;  // sorted sup statistics of the c-pool
  int degenerate_points = 0;   // grid points where h hit the variance floor
  std::shared_ptr<const SieveFit> fit;
  BootstrapConfig config;

  bool contains(const Eigen::MatrixXd& surface) const;
};

/// Per-point sample standard deviation of the h-pool statistics; entries
/// below the 1e-12 floor are flagged, not fatal.
Eigen::MatrixXd estimate_h(const Eigen::MatrixXd& h_pool, const Eigen::MatrixXd& directions,
                           int rows, int cols, int* degenerate_count = nullptr);

/// Order-statistic critical value c_alpha = T_(floor(M(1-alpha))), clamped.
double critical_value(const Eigen::VectorXd& sorted_stats, double alpha);

ScrGrid build_scr(std::shared_ptr<const SieveFit> fit, const BootstrapConfig& config, int j);

enum class TestKind { exact_form, homogeneity, separability };

/// Structural test outcome.  reject, p_value < alpha, and the band-exit count
/// are computed from one rank statistic and always agree.
struct TestReport {
  TestKind kind = TestKind::exact_form;
  double t_obs = 0.0;
  double p_value = 1.0;
  bool reject = false;
  double alpha = 0.05;
  double c_alpha = 0.0;          // SCR band critical value
  int band_exits = 0;            // grid points where the restricted surface leaves the band
  Eigen::MatrixXd restricted;    // restricted estimate on the SCR grid

  std::string kind_name() const;
};

/// H0: m_j = m0 for a pre-given surface.
TestReport test_exact_form(const ScrGrid& scr,
                           const std::function<double(double, double)>& m0);
/// H0: m_j(t,x) = m_j(x); restricted fit uses the x-only mapped basis for
/// component j, centered with the same mean-shift correction as the estimator.
TestReport test_homogeneity(const ScrGrid& scr);
/// H0: m_j(t,x) = C f(t) g(x); factors come from trapezoid integrals of the
/// corrected estimate over the grid window.
TestReport test_separability(const ScrGrid& scr);

}  // namespace tvsieve
