#include "tvsieve/estimator.hpp"

#include <cmath>
#include <string>

#include "tvsieve/errors.hpp"

namespace tvsieve {

RegressionData RegressionData::from_series(const std::vector<double>& series, int lags) {
  const long total = static_cast<long>(series.size());
  if (lags < 1) throw ConfigError("from_series: lag order must be >= 1");
  if (total <= lags + 1) throw ConfigError("from_series: series too short for lag order");
  const long n = total - lags;
  RegressionData data;
  data.y.resize(n);
  data.x.resize(n, lags);
  data.times.resize(n);
  for (long i = 0; i < n; ++i) {
    data.y(i) = series[lags + i];
    for (int j = 0; j < lags; ++j) data.x(i, j) = series[lags + i - (j + 1)];
    data.times(i) = static_cast<double>(lags + i + 1) / static_cast<double>(total);
  }
  return data;
}

int SieveConfig::total_params() const {
  int total = c0();
  for (const auto& cov : covariates) total += cov.block_size();
  return total;
}

int SieveConfig::block_offset(int j) const {
  int offset = c0();
  for (int k = 1; k < j; ++k) offset += covariates[k - 1].block_size();
  return offset;
}

SieveConfig SieveConfig::uniform(int r, int c0, int c, int d, const BasisFamily& time_family,
                                 const BasisFamily& state_family, const Mapping& mapping,
                                 bool jacobian_weight) {
  SieveConfig config{BasisSet(time_family, c0), {}};
  for (int j = 0; j < r; ++j) {
    BasisSet time_basis(time_family, c);
    BasisSet state_basis(state_family, d, mapping, jacobian_weight);
    int start = state_basis.first_function_constant() ? 2 : 1;
    CovariateConfig cov{std::move(time_basis), std::move(state_basis), start, 0};
    config.covariates.push_back(std::move(cov));
  }
  return config;
}

Eigen::MatrixXd build_design(const RegressionData& data, const SieveConfig& config) {
  const long n = data.n();
  if (data.x.cols() != config.r())
    throw ConfigError("build_design: covariate count mismatch between data and config");
  if (data.times.size() != n || data.y.size() != n)
    throw ConfigError("build_design: series lengths differ");
  const int p_total = config.total_params();
  if (n <= p_total)
    throw ConfigError("build_design: underdetermined system, n = " + std::to_string(n) +
                      " <= p = " + std::to_string(p_total));

  Eigen::MatrixXd design(n, p_total);
  for (long i = 0; i < n; ++i) {
    const double t = data.times(i);
    design.row(i).segment(0, config.c0()) = config.intercept_basis.eval_all(t).transpose();
    int offset = config.c0();
    for (int j = 1; j <= config.r(); ++j) {
      const CovariateConfig& cov = config.covariates[j - 1];
      Eigen::VectorXd time_values = cov.time_basis.eval_all(t);
      Eigen::VectorXd state_values = cov.state_basis.eval_all(data.x(i, j - 1));
      const int q = cov.state_count();
      for (int l1 = 1; l1 <= cov.c(); ++l1)
        for (int l2 = cov.state_start; l2 <= cov.d(); ++l2)
          design(i, offset + (l1 - 1) * q + (l2 - cov.state_start)) =
              time_values(l1 - 1) * state_values(l2 - 1);
      offset += cov.block_size();
    }
  }
  return design;
}

SieveFit::SieveFit(RegressionData data, SieveConfig config)
    : data_(std::move(data)), config_(std::move(config)) {
  design_ = build_design(data_, config_);
  const long n = data_.n();
  const int p_total = config_.total_params();

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design_);
  const Eigen::MatrixXd& qr_matrix = qr.matrixQR();
  double diag_max = 0.0, diag_min = std::numeric_limits<double>::max();
  for (int k = 0; k < p_total; ++k) {
    double v = std::abs(qr_matrix(k, k));
    diag_max = std::max(diag_max, v);
    diag_min = std::min(diag_min, v);
  }
  condition_ = diag_min > 0.0 ? diag_max / diag_min : std::numeric_limits<double>::infinity();
  if (!(diag_min > 1e-10 * diag_max))
    throw SingularDesignError(
        "fit_pilot: design numerically rank deficient, condition estimate " +
            std::to_string(condition_),
        condition_);

  beta_ = qr.solve(data_.y);
  // (W^T W)^-1 = P R^-1 R^-T P^T from the pivoted factorization
  Eigen::MatrixXd r_inv =
      qr_matrix.topRows(p_total).triangularView<Eigen::Upper>().solve(
          Eigen::MatrixXd::Identity(p_total, p_total));
  Eigen::MatrixXd unpermuted = r_inv * r_inv.transpose();
  gram_inverse_ = qr.colsPermutation() * unpermuted * qr.colsPermutation().transpose();
  gram_inverse_ *= static_cast<double>(n);
  residuals_ = data_.y - design_ * beta_;

  intercept_values_.resize(n, config_.c0());
  for (long i = 0; i < n; ++i)
    intercept_values_.row(i) = config_.intercept_basis.eval_all(data_.times(i)).transpose();
  time_values_.resize(config_.r());
  state_values_.resize(config_.r());
  for (int j = 1; j <= config_.r(); ++j) {
    const CovariateConfig& cov = config_.covariates[j - 1];
    Eigen::MatrixXd tv(n, cov.c()), sv(n, cov.state_count());
    for (long i = 0; i < n; ++i) {
      tv.row(i) = cov.time_basis.eval_all(data_.times(i)).transpose();
      Eigen::VectorXd all = cov.state_basis.eval_all(data_.x(i, j - 1));
      sv.row(i) = all.segment(cov.state_start - 1, cov.state_count()).transpose();
    }
    time_values_[j - 1] = std::move(tv);
    state_values_[j - 1] = std::move(sv);
  }
}

double SieveFit::eval_pilot(int j, double t, double x) const {
  if (j == 0) return beta_.head(config_.c0()).dot(config_.intercept_basis.eval_all(t));
  if (j < 1 || j > config_.r()) throw ConfigError("eval_pilot: component index out of range");
  const CovariateConfig& cov = config_.covariates[j - 1];
  Eigen::VectorXd b = cov.tensor().eval(t, x);
  return beta_.segment(config_.block_offset(j), cov.block_size()).dot(b);
}

Eigen::VectorXd fit_time_regression(const BasisSet& time_basis, int count,
                                    const Eigen::VectorXd& times, const Eigen::VectorXd& values) {
  const long n = times.size();
  Eigen::MatrixXd regressors(n, count);
  for (long i = 0; i < n; ++i)
    regressors.row(i) = time_basis.eval_all(times(i)).head(count).transpose();
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(regressors);
  const Eigen::MatrixXd& qr_matrix = qr.matrixQR();
  double diag_max = 0.0, diag_min = std::numeric_limits<double>::max();
  for (int k = 0; k < count; ++k) {
    double v = std::abs(qr_matrix(k, k));
    diag_max = std::max(diag_max, v);
    diag_min = std::min(diag_min, v);
  }
  if (!(diag_min > 1e-10 * diag_max))
    throw SingularDesignError("fit_time_regression: rank deficient time design",
                              diag_min > 0 ? diag_max / diag_min
                                           : std::numeric_limits<double>::infinity());
  return qr.solve(values);
}

void SieveFit::fit_mean_shifts() {
  mean_shift_.resize(config_.r());
  for (int j = 1; j <= config_.r(); ++j) {
    const CovariateConfig& cov = config_.covariates[j - 1];
    const int count = cov.mean_shift_count > 0 ? cov.mean_shift_count : cov.c();
    if (count > cov.c())
      throw ConfigError("fit_mean_shifts: mean-shift size exceeds the time basis size");
    Eigen::MatrixXd gamma(count, cov.state_count());
    for (int col = 0; col < cov.state_count(); ++col)
      gamma.col(col) =
          fit_time_regression(cov.time_basis, count, data_.times, state_values_[j - 1].col(col));
    mean_shift_[j - 1] = std::move(gamma);
  }
  mean_shifts_ready_ = true;
}

double SieveFit::theta(int j, int l2, double t) const {
  if (!mean_shifts_ready_) throw ConfigError("theta: mean shifts not fitted");
  const CovariateConfig& cov = config_.covariates[j - 1];
  if (l2 < cov.state_start || l2 > cov.d()) throw ConfigError("theta: state index out of range");
  const Eigen::MatrixXd& gamma = mean_shift_[j - 1];
  Eigen::VectorXd phi = cov.time_basis.eval_all(t).head(gamma.rows());
  return gamma.col(l2 - cov.state_start).dot(phi);
}

Eigen::VectorXd SieveFit::mean_vector(int j, double t) const {
  if (!mean_shifts_ready_) throw ConfigError("mean_vector: mean shifts not fitted");
  const CovariateConfig& cov = config_.covariates[j - 1];
  const Eigen::MatrixXd& gamma = mean_shift_[j - 1];
  Eigen::VectorXd phi_ms = cov.time_basis.eval_all(t);
  Eigen::VectorXd theta_values = gamma.transpose() * phi_ms.head(gamma.rows());
  Eigen::VectorXd phi = phi_ms.head(cov.c());
  const int q = cov.state_count();
  Eigen::VectorXd out(cov.block_size());
  for (int l1 = 1; l1 <= cov.c(); ++l1)
    for (int idx = 0; idx < q; ++idx) out((l1 - 1) * q + idx) = phi(l1 - 1) * theta_values(idx);
  return out;
}

Eigen::VectorXd SieveFit::basis_vector(int j, double t, double x) const {
  const CovariateConfig& cov = config_.covariates[j - 1];
  return cov.tensor().eval(t, x);
}

Eigen::VectorXd SieveFit::r_bar(int j, double t, double x) const {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(total_params());
  out.segment(config_.block_offset(j), config_.covariates[j - 1].block_size()) =
      basis_vector(j, t, x) - mean_vector(j, t);
  return out;
}

double SieveFit::eval_chi(int j, double t) const {
  if (j < 1 || j > config_.r()) throw ConfigError("eval_chi: component index out of range");
  return beta_.segment(config_.block_offset(j), config_.covariates[j - 1].block_size())
      .dot(mean_vector(j, t));
}

double SieveFit::eval_corrected(int j, double t, double x) const {
  if (j == 0) {
    double total = eval_pilot(0, t);
    for (int k = 1; k <= config_.r(); ++k) total += eval_chi(k, t);
    return total;
  }
  return eval_pilot(j, t, x) - eval_chi(j, t);
}

std::shared_ptr<SieveFit> fit_pilot(const RegressionData& data, const SieveConfig& config) {
  return std::make_shared<SieveFit>(data, config);
}

std::shared_ptr<SieveFit> fit_model(const RegressionData& data, const SieveConfig& config) {
  auto fit = std::make_shared<SieveFit>(data, config);
  fit->fit_mean_shifts();
  return fit;
}

}  // namespace tvsieve
