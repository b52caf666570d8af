#pragma once

#include <vector>

#include "tvsieve/estimator.hpp"

namespace tvsieve {

struct CdCandidate {
  int c = 2;
  int d = 2;
};

struct CdSelection {
  CdCandidate best;
  std::vector<CdCandidate> candidates;
  std::vector<double> scores;  // forecast MSE per candidate; NaN when infeasible
};

/// Factory for the sieve configuration a candidate (c,d) induces; lets the
/// selector share basis choices with the caller.
struct SieveTemplate {
  int c0 = 4;
  int r = 1;
  BasisFamily time_family = BasisFamily::fourier();
  BasisFamily state_family = BasisFamily::fourier();
  Mapping mapping;
  bool jacobian_weight = true;

  SieveConfig instantiate(int c, int d) const {
    return SieveConfig::uniform(r, c0, c, d, time_family, state_family, mapping, jacobian_weight);
  }
};

/// Out-of-sample forecast cross-validation over (c,d) for the nonlinear AR
/// setting: fit on the first n-l samples, one-step-ahead forecast the last l
/// with the corrected surfaces, keep the minimum MSE.  Ties break toward
/// smaller c*d, then smaller c.
CdSelection select_cd(const std::vector<double>& series, int lags, const SieveTemplate& sieve,
                      const std::vector<CdCandidate>& candidates, int validation_length);

/// Exogenous-covariate variant: held-out prediction MSE of the response.
CdSelection select_cd(const RegressionData& data, const SieveTemplate& sieve,
                      const std::vector<CdCandidate>& candidates, int validation_length);

struct MSelection {
  int best = 0;
  std::vector<int> ladder;    // extended ladder actually evaluated
  std::vector<int> interior;  // candidates eligible for selection
  std::vector<double> se;     // volatility score per interior candidate
};

/// Minimum-volatility selection of the bootstrap block length: Frobenius
/// dispersion of the blocked covariance over a +-h0 neighborhood, minimized
/// over the interior candidates.
MSelection select_m(const SieveFit& fit, const std::vector<int>& candidates, int h0 = 3);

/// Neighborhood dispersion profile behind select_m: for each interior index
/// j = h0 .. size-1-h0, the root mean squared Frobenius distance between the
/// neighborhood average and its members.
std::vector<double> volatility_scores(const std::vector<Eigen::MatrixXd>& omegas, int h0);

/// Geometric ladder of 9 block lengths bracketing n^(1/3).
std::vector<int> default_m_ladder(long n);
/// Candidate (c,d) pairs up to ceil(2 log n) per axis.
std::vector<CdCandidate> default_cd_candidates(long n);

/// Default validation length l = floor(3 log2 n).
int default_validation_length(long n);

}  // namespace tvsieve
