#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tvsieve/inference.hpp"
#include "tvsieve/process.hpp"
#include "tvsieve/tuning.hpp"

namespace tvsieve {

enum class StudyMode { coverage, test };

struct StudyConfig {
  Scenario scenario;
  long n = 500;
  int replicates = 100;
  int workers = 1;
  std::uint64_t seed = 1;
  StudyMode mode = StudyMode::coverage;
  TestKind test_kind = TestKind::homogeneity;
  int component = 1;  // j under study
  SieveTemplate sieve;
  int c = 4;
  int d = 7;
  BootstrapConfig bootstrap;
  long centering_samples = 1000000;  // Monte Carlo size of the truth-centering oracle
};

struct ReplicateOutcome {
  int id = 0;
  bool ok = false;
  int hit = 0;          // covered / rejected indicator
  double statistic = 0.0;  // sup coverage margin or test statistic
  double p_value = 1.0;
  std::string error;
};

struct StudyResult {
  std::vector<ReplicateOutcome> outcomes;
  int successes = 0;
  int failures = 0;
  double rate = 0.0;  // empirical coverage or rejection rate
  double standard_error = 0.0;
};

/// chi(t) = E m(t, X_t) under the stationary-at-t law, by long-run Monte
/// Carlo of the frozen-t recursion; one value per grid point.
Eigen::VectorXd centering_curve(const Scenario& scenario, const Eigen::VectorXd& t_grid,
                                long samples, std::uint64_t seed = 0x27ce11u);

/// Identifiability-centered truth m(t,x) - chi(t) on a (t,x) grid.
Eigen::MatrixXd centered_truth(const Scenario& scenario, const Eigen::VectorXd& t_grid,
                               const Eigen::VectorXd& x_grid, long samples);

/// Seeded Monte Carlo study over independent replicates; outcomes do not
/// depend on the worker count.  Failures are recorded per replicate and the
/// study aborts only past a 5% failure budget.
StudyResult run_study(const StudyConfig& config);

}  // namespace tvsieve
