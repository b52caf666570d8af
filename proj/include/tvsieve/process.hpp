#pragma once

#include <cstdint>
#include <functional>
#include <vector>

namespace tvsieve {

enum class InnovationKind { tv_ar2, setar, bilinear };

/// Locally stationary innovation process with the embedded coefficient
/// functions a1(t) = 0.3 and a2(t) = 0.3 sin(2 pi t).
struct InnovationModel {
  InnovationKind kind = InnovationKind::tv_ar2;

  double a1(double t) const;
  double a2(double t) const;
};

struct InnovationOptions {
  /// Optional shock override; receives the step index (0-based over the full
  /// run including burn-in) and replaces the Gaussian draw.  Test hook.
  std::function<double(long)> shock;
  /// Records which coefficient branch the SETAR recursion applied per kept
  /// sample (1 or 2); other models record 0.
  std::vector<int>* branch_trace = nullptr;
};

/// Length-n innovation path; the time argument of the coefficient functions is
/// frozen at 0 during burn-in and runs over i/n afterwards.
std::vector<double> simulate_innovations(const InnovationModel& model, long n, std::uint64_t seed,
                                         long burn_in);
std::vector<double> simulate_innovations(const InnovationModel& model, long n, std::uint64_t seed,
                                         long burn_in, const InnovationOptions& options);

/// Generative nonlinear AR scenario: setup selects the (m, sigma) pair, delta
/// the deviation from the null form, lags the autoregression order (1 or 2).
struct Scenario {
  int setup = 1;
  double delta = 0.0;
  InnovationModel innovation;
  int lags = 1;
};

struct SimulatedSeries {
  std::vector<double> values;
  std::vector<double> times;  // t_i = i/n
  std::uint64_t seed = 0;
  long burn_in = 0;
};

struct SimulateOptions {
  long burn_in = 200;
  bool zero_noise = false;  // test hook: forces sigma * eps to zero
};

SimulatedSeries simulate_scenario(const Scenario& scenario, long n, std::uint64_t seed);
SimulatedSeries simulate_scenario(const Scenario& scenario, long n, std::uint64_t seed,
                                  const SimulateOptions& options);

/// True regression surface m(t,x) of the r=1 scenarios, or component j of the
/// r=2 scenarios (j = 0 is the intercept; x is ignored there).
double eval_true_m(const Scenario& scenario, double t, double x);
double eval_true_m(const Scenario& scenario, int j, double t, double x);
double eval_true_sigma(const Scenario& scenario, double t, double x);

}  // namespace tvsieve
