#include "tvsieve/inference.hpp"

#include <algorithm>
#include <cmath>

#include "tvsieve/errors.hpp"
#include "tvsieve/rng.hpp"

namespace tvsieve {

namespace {
constexpr double kVarianceFloor = 1e-12;
// Differences at rounding scale count as zero in the sup statistic.
double eps_guard(double reference) { return 1e-9 * (1.0 + std::abs(reference)); }
}  // namespace

void BootstrapConfig::validate(long n, int r) const {
  if (block_length < 1 || block_length >= n / 2)
    throw ConfigError("BootstrapConfig: block length must satisfy 1 <= m < n/2");
  if (block_length + r >= n) throw ConfigError("BootstrapConfig: m + r must be below n");
  if (h_draws < 100 || c_draws < 100) throw ConfigError("BootstrapConfig: pools need >= 100 draws");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("BootstrapConfig: alpha must be in (0,1)");
  if (t_grid < 2 || y_grid < 2) throw ConfigError("BootstrapConfig: grids need >= 2 points");
  if (!(x_lo < x_hi)) throw ConfigError("BootstrapConfig: empty x window");
}

Eigen::MatrixXd blocked_u_matrix(const SieveFit& fit, int block_length) {
  const long n = fit.n();
  const int m = block_length;
  const int r = fit.config().r();
  if (m < 1 || m + r >= n) throw ConfigError("blocked_u_matrix: block length out of range");
  const int p_total = fit.total_params();
  const Eigen::VectorXd& eps = fit.residuals();

  // prefix sums of eps and of each state-basis column times eps
  Eigen::VectorXd eps_prefix = Eigen::VectorXd::Zero(n + 1);
  for (long i = 0; i < n; ++i) eps_prefix(i + 1) = eps_prefix(i) + eps(i);

  std::vector<Eigen::MatrixXd> u_prefix(r);
  for (int j = 1; j <= r; ++j) {
    const Eigen::MatrixXd& sv = fit.state_values(j);
    Eigen::MatrixXd prefix = Eigen::MatrixXd::Zero(n + 1, sv.cols());
    for (long i = 0; i < n; ++i)
      prefix.row(i + 1) = prefix.row(i) + sv.row(i) * eps(i);
    u_prefix[j - 1] = std::move(prefix);
  }

  const long rows = n - m;
  Eigen::MatrixXd blocked(rows, p_total);
  const SieveConfig& config = fit.config();
  for (long i = 0; i < rows; ++i) {
    // block sums run o = i .. i+m inclusive
    double eps_block = eps_prefix(i + m + 1) - eps_prefix(i);
    blocked.row(i).segment(0, config.c0()) =
        eps_block * fit.intercept_values().row(i);
    int offset = config.c0();
    for (int j = 1; j <= r; ++j) {
      const CovariateConfig& cov = config.covariates[j - 1];
      const int q = cov.state_count();
      Eigen::RowVectorXd u_block =
          u_prefix[j - 1].row(i + m + 1) - u_prefix[j - 1].row(i);
      const auto& tv = fit.time_values(j);
      for (int l1 = 0; l1 < cov.c(); ++l1)
        blocked.row(i).segment(offset + l1 * q, q) = tv(i, l1) * u_block;
      offset += cov.block_size();
    }
  }
  return blocked;
}

MultiplierBootstrap::MultiplierBootstrap(std::shared_ptr<const SieveFit> fit, int block_length,
                                         std::uint64_t seed)
    : fit_(std::move(fit)), block_length_(block_length), seed_(seed) {
  u_matrix_ = blocked_u_matrix(*fit_, block_length_);
  const long n = fit_->n();
  const int r = fit_->config().r();
  normalization_ = 1.0 / std::sqrt(static_cast<double>(n - block_length_ - r) *
                                   static_cast<double>(block_length_));
}

Eigen::VectorXd MultiplierBootstrap::draw_xi(std::uint64_t draw_index) const {
  CounterRng rng(seed_, 0xb005u + draw_index);
  const long rows = u_matrix_.rows();
  Eigen::VectorXd multipliers(rows);
  for (long i = 0; i < rows; ++i) multipliers(i) = rng.normal();
  return xi_from_multipliers(multipliers);
}

Eigen::VectorXd MultiplierBootstrap::xi_from_multipliers(const Eigen::VectorXd& multipliers) const {
  if (multipliers.size() != u_matrix_.rows())
    throw ConfigError("xi_from_multipliers: expected n - m multipliers");
  return normalization_ * (u_matrix_.transpose() * multipliers);
}

Eigen::MatrixXd MultiplierBootstrap::draw_pool(int count, std::uint64_t offset) const {
  Eigen::MatrixXd pool(count, u_matrix_.cols());
  for (int k = 0; k < count; ++k) pool.row(k) = draw_xi(offset + k).transpose();
  return pool;
}

Eigen::MatrixXd MultiplierBootstrap::conditional_covariance() const {
  return (normalization_ * normalization_) * (u_matrix_.transpose() * u_matrix_);
}

double eval_T(const SieveFit& fit, const Eigen::VectorXd& xi, int j, double t, double x) {
  return xi.dot(fit.gram_inverse() * fit.r_bar(j, t, x));
}

bool ScrGrid::contains(const Eigen::MatrixXd& surface) const {
  for (long i = 0; i < m_hat.rows(); ++i)
    for (long l = 0; l < m_hat.cols(); ++l)
      if (surface(i, l) < lower(i, l) || surface(i, l) > upper(i, l)) return false;
  return true;
}

Eigen::MatrixXd estimate_h(const Eigen::MatrixXd& h_pool, const Eigen::MatrixXd& directions,
                           int rows, int cols, int* degenerate_count) {
  const int draws = static_cast<int>(h_pool.rows());
  if (draws < 2) throw ConfigError("estimate_h: pool needs at least two draws");
  Eigen::MatrixXd stats = h_pool * directions;  // draws x grid
  Eigen::RowVectorXd means = stats.colwise().mean();
  stats.rowwise() -= means;
  Eigen::RowVectorXd sd =
      (stats.colwise().squaredNorm() / static_cast<double>(draws - 1)).cwiseSqrt();
  int degenerate = 0;
  Eigen::MatrixXd out(rows, cols);
  for (int g = 0; g < rows * cols; ++g) {
    double value = sd(g);
    if (value < kVarianceFloor) {
      value = kVarianceFloor;
      ++degenerate;
    }
    out(g / cols, g % cols) = value;
  }
  if (degenerate_count) *degenerate_count = degenerate;
  return out;
}

double critical_value(const Eigen::VectorXd& sorted_stats, double alpha) {
  const long m = sorted_stats.size();
  if (m < 1) throw ConfigError("critical_value: empty pool");
  long index = static_cast<long>(std::floor(static_cast<double>(m) * (1.0 - alpha)));
  index = std::clamp(index, 1L, m);
  return sorted_stats(index - 1);
}

ScrGrid build_scr(std::shared_ptr<const SieveFit> fit, const BootstrapConfig& config, int j) {
  config.validate(fit->n(), fit->config().r());
  if (j < 1 || j > fit->config().r()) throw ConfigError("build_scr: component index out of range");
  if (!fit->mean_shifts_ready()) throw ConfigError("build_scr: mean shifts not fitted");

  ScrGrid scr;
  scr.j = j;
  scr.n = fit->n();
  scr.alpha = config.alpha;
  scr.fit = fit;
  scr.config = config;

  const Mapping& mapping = fit->config().covariates[j - 1].state_basis.mapping();
  const int c1 = config.t_grid, c2 = config.y_grid;
  scr.t.resize(c1);
  for (int i = 0; i < c1; ++i) scr.t(i) = static_cast<double>(i) / (c1 - 1);
  const double y_lo = mapping.unit_from_x(config.x_lo);
  const double y_hi = mapping.unit_from_x(config.x_hi);
  scr.y.resize(c2);
  scr.x.resize(c2);
  for (int l = 0; l < c2; ++l) {
    scr.y(l) = y_lo + (y_hi - y_lo) * static_cast<double>(l) / (c2 - 1);
    scr.x(l) = mapping.x_from_unit(scr.y(l));
  }

  // direction vectors lhat = PiHat^{-1} rbar at every grid point
  const int p_total = fit->total_params();
  const long grid_size = static_cast<long>(c1) * c2;
  Eigen::MatrixXd directions(p_total, grid_size);
  scr.m_hat.resize(c1, c2);
  for (int i = 0; i < c1; ++i) {
    for (int l = 0; l < c2; ++l) {
      directions.col(static_cast<long>(i) * c2 + l) =
          fit->gram_inverse() * fit->r_bar(j, scr.t(i), scr.x(l));
      scr.m_hat(i, l) = fit->eval_corrected(j, scr.t(i), scr.x(l));
    }
  }

  MultiplierBootstrap bootstrap(fit, config.block_length, config.seed);
  Eigen::MatrixXd h_pool = bootstrap.draw_pool(config.h_draws, 0);
  scr.h_hat = estimate_h(h_pool, directions, c1, c2, &scr.degenerate_points);

  // sup statistics from the fresh c-pool
  Eigen::VectorXd stats(config.c_draws);
  Eigen::VectorXd h_flat(grid_size);
  for (long g = 0; g < grid_size; ++g) h_flat(g) = scr.h_hat(g / c2, g % c2);
  for (int k = 0; k < config.c_draws; ++k) {
    Eigen::VectorXd xi = bootstrap.draw_xi(config.h_draws + k);
    Eigen::VectorXd values = directions.transpose() * xi;
    stats(k) = (values.cwiseAbs().cwiseQuotient(h_flat)).maxCoeff();
  }
  std::sort(stats.data(), stats.data() + stats.size());
  scr.pool_stats = stats;
  scr.c_alpha = critical_value(stats, config.alpha);

  const double root_n = std::sqrt(static_cast<double>(fit->n()));
  scr.lower = scr.m_hat - (scr.c_alpha / root_n) * scr.h_hat;
  scr.upper = scr.m_hat + (scr.c_alpha / root_n) * scr.h_hat;
  return scr;
}

std::string TestReport::kind_name() const {
  switch (kind) {
    case TestKind::exact_form:
      return "exact";
    case TestKind::homogeneity:
      return "homogeneity";
    case TestKind::separability:
      return "separability";
  }
  return "unknown";
}

namespace {

// Shared decision logic: one rank statistic drives the p-value, the rejection
// decision, and the band-exit count.
TestReport finish_report(const ScrGrid& scr, TestKind kind, Eigen::MatrixXd restricted) {
  TestReport report;
  report.kind = kind;
  report.alpha = scr.alpha;
  report.c_alpha = scr.c_alpha;
  report.restricted = std::move(restricted);

  const double root_n = std::sqrt(static_cast<double>(scr.n));
  double t_obs = 0.0;
  for (long i = 0; i < scr.m_hat.rows(); ++i)
    for (long l = 0; l < scr.m_hat.cols(); ++l) {
      double diff = std::abs(report.restricted(i, l) - scr.m_hat(i, l));
      diff = std::max(0.0, diff - eps_guard(scr.m_hat(i, l)));
      t_obs = std::max(t_obs, root_n * diff / scr.h_hat(i, l));
    }
  report.t_obs = t_obs;

  const Eigen::VectorXd& stats = scr.pool_stats;
  const long m = stats.size();
  long at_least = 0;  // #{k : T_k >= t_obs}
  for (long k = 0; k < m; ++k)
    if (stats(k) >= t_obs) ++at_least;
  report.p_value = static_cast<double>(at_least) / static_cast<double>(m);
  report.reject = report.p_value < scr.alpha;

  // Band exits at the rejection boundary T_(K+1), the order statistic
  // equivalent to p < alpha; count the offending grid points.
  long boundary_index = static_cast<long>(std::floor(m * (1.0 - scr.alpha))) + 1;
  double boundary =
      boundary_index > m ? std::numeric_limits<double>::infinity() : stats(boundary_index - 1);
  int exits = 0;
  for (long i = 0; i < scr.m_hat.rows(); ++i)
    for (long l = 0; l < scr.m_hat.cols(); ++l) {
      double diff = std::abs(report.restricted(i, l) - scr.m_hat(i, l));
      diff = std::max(0.0, diff - eps_guard(scr.m_hat(i, l)));
      if (root_n * diff / scr.h_hat(i, l) > boundary) ++exits;
    }
  report.band_exits = exits;
  return report;
}

}  // namespace

TestReport test_exact_form(const ScrGrid& scr,
                           const std::function<double(double, double)>& m0) {
  Eigen::MatrixXd restricted(scr.t.size(), scr.x.size());
  for (long i = 0; i < scr.t.size(); ++i)
    for (long l = 0; l < scr.x.size(); ++l) restricted(i, l) = m0(scr.t(i), scr.x(l));
  return finish_report(scr, TestKind::exact_form, std::move(restricted));
}

TestReport test_homogeneity(const ScrGrid& scr) {
  const SieveFit& fit = *scr.fit;
  const SieveConfig& config = fit.config();
  const int j = scr.j;
  const CovariateConfig& cov = config.covariates[j - 1];
  const long n = fit.n();
  const int q = cov.state_count();

  // restricted design: intercept block, x-only block for component j, full
  // tensor blocks for the other components
  int width = config.c0() + q;
  for (int k = 1; k <= config.r(); ++k)
    if (k != j) width += config.covariates[k - 1].block_size();
  Eigen::MatrixXd design(n, width);
  design.leftCols(config.c0()) = fit.intercept_values();
  design.middleCols(config.c0(), q) = fit.state_values(j);
  int offset = config.c0() + q;
  for (int k = 1; k <= config.r(); ++k) {
    if (k == j) continue;
    int size = config.covariates[k - 1].block_size();
    design.middleCols(offset, size) = fit.design().middleCols(config.block_offset(k), size);
    offset += size;
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  double diag_max = 0.0, diag_min = std::numeric_limits<double>::max();
  for (int k = 0; k < width; ++k) {
    double v = std::abs(qr.matrixQR()(k, k));
    diag_max = std::max(diag_max, v);
    diag_min = std::min(diag_min, v);
  }
  if (!(diag_min > 1e-10 * diag_max))
    throw SingularDesignError("test_homogeneity: restricted design singular",
                              diag_min > 0 ? diag_max / diag_min
                                           : std::numeric_limits<double>::infinity());
  Eigen::VectorXd beta = qr.solve(fit.data().y);
  Eigen::VectorXd beta_x = beta.segment(config.c0(), q);

  // x-only estimate, centered with its own fitted mean shifts; same
  // identifiability convention as the corrected surface
  Eigen::MatrixXd restricted(scr.t.size(), scr.x.size());
  Eigen::VectorXd state_part(scr.x.size());
  for (long l = 0; l < scr.x.size(); ++l) {
    Eigen::VectorXd values = cov.state_basis.eval_all(scr.x(l));
    state_part(l) = beta_x.dot(values.segment(cov.state_start - 1, q));
  }
  for (long i = 0; i < scr.t.size(); ++i) {
    double shift = 0.0;
    for (int idx = 0; idx < q; ++idx)
      shift += beta_x(idx) * fit.theta(j, cov.state_start + idx, scr.t(i));
    for (long l = 0; l < scr.x.size(); ++l) restricted(i, l) = state_part(l) - shift;
  }
  return finish_report(scr, TestKind::homogeneity, std::move(restricted));
}

TestReport test_separability(const ScrGrid& scr) {
  const Mapping& mapping = scr.fit->config().covariates[scr.j - 1].state_basis.mapping();
  const long c1 = scr.t.size(), c2 = scr.x.size();
  const double dt = scr.t(1) - scr.t(0);
  const double dy = scr.y(1) - scr.y(0);

  // trapezoid weights; the x integral runs in the mapped coordinate with
  // jacobian dx/dy
  Eigen::VectorXd wt(c1), wx(c2);
  for (long i = 0; i < c1; ++i) wt(i) = dt * ((i == 0 || i == c1 - 1) ? 0.5 : 1.0);
  for (long l = 0; l < c2; ++l) {
    double jac = 1.0 / mapping.unit_deriv(scr.x(l));
    wx(l) = dy * jac * ((l == 0 || l == c2 - 1) ? 0.5 : 1.0);
  }

  double total = 0.0;
  Eigen::VectorXd f_raw = Eigen::VectorXd::Zero(c1);  // integral over x at fixed t
  Eigen::VectorXd g_raw = Eigen::VectorXd::Zero(c2);  // integral over t at fixed x
  for (long i = 0; i < c1; ++i)
    for (long l = 0; l < c2; ++l) {
      double cell = scr.m_hat(i, l);
      f_raw(i) += cell * wx(l);
      g_raw(l) += cell * wt(i);
      total += cell * wt(i) * wx(l);
    }
  if (std::abs(total) < 1e-8)
    throw DegenerateNormalization("test_separability: normalizing integral below 1e-8");

  Eigen::MatrixXd restricted(c1, c2);
  for (long i = 0; i < c1; ++i)
    for (long l = 0; l < c2; ++l) restricted(i, l) = f_raw(i) * g_raw(l) / total;
  return finish_report(scr, TestKind::separability, std::move(restricted));
}

}  // namespace tvsieve
