#include "tvsieve/tuning.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "tvsieve/errors.hpp"
#include "tvsieve/inference.hpp"

namespace tvsieve {

namespace {

/// One-step-ahead conditional-mean forecast at time t given the lag values.
double forecast(const SieveFit& fit, double t, const Eigen::VectorXd& lags) {
  double value = fit.eval_corrected(0, t);
  for (int j = 1; j <= fit.config().r(); ++j)
    value += fit.eval_corrected(j, t, lags(j - 1));
  return value;
}

CdSelection pick(const std::vector<CdCandidate>& candidates, std::vector<double> scores) {
  CdSelection selection;
  selection.candidates = candidates;
  selection.scores = std::move(scores);
  int best_index = -1;
  for (size_t i = 0; i < candidates.size(); ++i) {
    double s = selection.scores[i];
    if (std::isnan(s)) continue;
    if (best_index < 0) {
      best_index = static_cast<int>(i);
      continue;
    }
    double incumbent_score = selection.scores[best_index];
    if (s < incumbent_score - 1e-12) {
      best_index = static_cast<int>(i);
    } else if (std::abs(s - incumbent_score) <= 1e-12) {
      const CdCandidate& cand = candidates[i];
      const CdCandidate& incumbent = candidates[best_index];
      long cd_new = static_cast<long>(cand.c) * cand.d;
      long cd_old = static_cast<long>(incumbent.c) * incumbent.d;
      if (cd_new < cd_old || (cd_new == cd_old && cand.c < incumbent.c))
        best_index = static_cast<int>(i);
    }
  }
  if (best_index < 0) throw TuningError("select_cd: every candidate fit failed");
  selection.best = candidates[best_index];
  return selection;
}

}  // namespace

CdSelection select_cd(const std::vector<double>& series, int lags, const SieveTemplate& sieve,
                      const std::vector<CdCandidate>& candidates, int validation_length) {
  const long total = static_cast<long>(series.size());
  if (validation_length < 1 || validation_length >= total / 2)
    throw ConfigError("select_cd: validation length must satisfy 1 <= l < n/2");
  if (candidates.empty()) throw ConfigError("select_cd: empty candidate set");

  std::vector<double> training(series.begin(), series.end() - validation_length);
  std::vector<double> scores(candidates.size(), std::numeric_limits<double>::quiet_NaN());
  for (size_t idx = 0; idx < candidates.size(); ++idx) {
    try {
      RegressionData data = RegressionData::from_series(training, lags);
      auto fit = fit_model(data, sieve.instantiate(candidates[idx].c, candidates[idx].d));
      double sse = 0.0;
      for (long k = total - validation_length; k < total; ++k) {
        double t = static_cast<double>(k + 1) / total;
        Eigen::VectorXd lag_values(lags);
        for (int j = 1; j <= lags; ++j) lag_values(j - 1) = series[k - j];
        double predicted = forecast(*fit, t, lag_values);
        double err = series[k] - predicted;
        sse += err * err;
      }
      scores[idx] = sse / validation_length;
    } catch (const std::exception&) {
      // infeasible candidate: leave NaN
    }
  }
  return pick(candidates, std::move(scores));
}

CdSelection select_cd(const RegressionData& data, const SieveTemplate& sieve,
                      const std::vector<CdCandidate>& candidates, int validation_length) {
  const long n = data.n();
  if (validation_length < 1 || validation_length >= n / 2)
    throw ConfigError("select_cd: validation length must satisfy 1 <= l < n/2");
  if (candidates.empty()) throw ConfigError("select_cd: empty candidate set");

  RegressionData training;
  const long keep = n - validation_length;
  training.y = data.y.head(keep);
  training.x = data.x.topRows(keep);
  training.times = data.times.head(keep);

  std::vector<double> scores(candidates.size(), std::numeric_limits<double>::quiet_NaN());
  for (size_t idx = 0; idx < candidates.size(); ++idx) {
    try {
      auto fit = fit_model(training, sieve.instantiate(candidates[idx].c, candidates[idx].d));
      double sse = 0.0;
      for (long k = keep; k < n; ++k) {
        double predicted = forecast(*fit, data.times(k), data.x.row(k).transpose());
        double err = data.y(k) - predicted;
        sse += err * err;
      }
      scores[idx] = sse / validation_length;
    } catch (const std::exception&) {
    }
  }
  return pick(candidates, std::move(scores));
}

MSelection select_m(const SieveFit& fit, const std::vector<int>& candidates, int h0) {
  if (h0 < 1) throw ConfigError("select_m: h0 must be >= 1");
  if (candidates.size() < 1) throw ConfigError("select_m: need at least one candidate");
  for (size_t i = 1; i < candidates.size(); ++i)
    if (candidates[i] <= candidates[i - 1])
      throw ConfigError("select_m: candidates must be strictly increasing");

  // extend the ladder h0 steps beyond both ends: unit steps downward (block
  // lengths are integers >= 1), edge spacing upward
  MSelection selection;
  selection.interior = candidates;
  std::vector<int> ladder = candidates;
  int back_step =
      candidates.size() > 1 ? candidates.back() - candidates[candidates.size() - 2] : 1;
  for (int k = 1; k <= h0; ++k) {
    int below = candidates.front() - k;
    if (below < 1)
      throw ConfigError("select_m: ladder extension falls below 1; raise the smallest "
                        "candidate above h0");
    ladder.insert(ladder.begin(), below);
    ladder.push_back(candidates.back() + k * back_step);
  }
  if (static_cast<int>(ladder.size()) < 2 * h0 + 1)
    throw ConfigError("select_m: extended ladder has fewer than 2*h0+1 points");
  const long n = fit.n();
  const int r = fit.config().r();
  if (ladder.back() >= n / 2 || ladder.back() + r >= n)
    throw ConfigError("select_m: extended ladder exceeds n/2");
  selection.ladder = ladder;

  // blocked covariance per ladder point, Frobenius dispersion per interior one
  std::vector<Eigen::MatrixXd> omegas(ladder.size());
  for (size_t i = 0; i < ladder.size(); ++i) {
    const int m = ladder[i];
    Eigen::MatrixXd blocked = blocked_u_matrix(fit, m);
    double norm = 1.0 / (static_cast<double>(n - m - r + 1) * m);
    omegas[i] = norm * (blocked.transpose() * blocked);
  }
  std::vector<double> scores = volatility_scores(omegas, h0);

  selection.se.assign(candidates.size(), 0.0);
  double best_score = std::numeric_limits<double>::infinity();
  int best_index = -1;
  for (size_t ci = 0; ci < candidates.size(); ++ci) {
    auto it = std::find(ladder.begin(), ladder.end(), candidates[ci]);
    long center = it - ladder.begin();
    if (center < h0 || center + h0 >= static_cast<long>(ladder.size()))
      throw ConfigError("select_m: candidate too close to the ladder edge");
    selection.se[ci] = scores[center - h0];
    if (selection.se[ci] < best_score - 1e-15) {
      best_score = selection.se[ci];
      best_index = static_cast<int>(ci);
    }
  }
  selection.best = candidates[best_index];
  return selection;
}

std::vector<double> volatility_scores(const std::vector<Eigen::MatrixXd>& omegas, int h0) {
  if (static_cast<int>(omegas.size()) < 2 * h0 + 1)
    throw ConfigError("volatility_scores: need at least 2*h0+1 matrices");
  std::vector<double> scores;
  for (long center = h0; center + h0 < static_cast<long>(omegas.size()); ++center) {
    Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(omegas[0].rows(), omegas[0].cols());
    for (int k = -h0; k <= h0; ++k) mean += omegas[center + k];
    mean /= static_cast<double>(2 * h0 + 1);
    double acc = 0.0;
    for (int k = -h0; k <= h0; ++k) acc += (mean - omegas[center + k]).squaredNorm();
    scores.push_back(std::sqrt(acc / (2.0 * h0)));
  }
  return scores;
}

std::vector<int> default_m_ladder(long n) {
  // nine uniformly spaced block lengths bracketing n^(1/3); the floor of 4
  // leaves room for the h0 = 3 downward extension
  double center = std::cbrt(static_cast<double>(n));
  int lo = 4;
  int hi = std::max(lo + 16, static_cast<int>(std::lround(2.5 * center)));
  std::vector<int> ladder;
  std::set<int> seen;
  for (int k = 0; k < 9; ++k) {
    int m = lo + static_cast<int>(std::lround((hi - lo) * static_cast<double>(k) / 8.0));
    while (!seen.insert(m).second) ++m;
    ladder.push_back(m);
  }
  std::sort(ladder.begin(), ladder.end());
  return ladder;
}

std::vector<CdCandidate> default_cd_candidates(long n) {
  int top = static_cast<int>(std::ceil(2.0 * std::log(static_cast<double>(n))));
  std::vector<CdCandidate> out;
  for (int c = 2; c <= top; ++c)
    for (int d = 2; d <= top; ++d) out.push_back({c, d});
  return out;
}

int default_validation_length(long n) {
  return static_cast<int>(std::floor(3.0 * std::log2(static_cast<double>(n))));
}

}  // namespace tvsieve
