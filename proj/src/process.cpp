#include "tvsieve/process.hpp"

#include <cmath>
#include <string>

#include "tvsieve/errors.hpp"
#include "tvsieve/rng.hpp"

namespace tvsieve {

double InnovationModel::a1(double) const { return 0.3; }
double InnovationModel::a2(double t) const { return 0.3 * std::sin(2.0 * M_PI * t); }

std::vector<double> simulate_innovations(const InnovationModel& model, long n, std::uint64_t seed,
                                         long burn_in) {
  return simulate_innovations(model, n, seed, burn_in, InnovationOptions{});
}

std::vector<double> simulate_innovations(const InnovationModel& model, long n, std::uint64_t seed,
                                         long burn_in, const InnovationOptions& options) {
  if (n < 1) throw ConfigError("simulate_innovations: n must be >= 1");
  if (burn_in < 0) throw ConfigError("simulate_innovations: burn_in must be >= 0");

  CounterRng rng(seed, /*stream_id=*/0x1e5u);
  std::vector<double> path;
  path.reserve(n);
  if (options.branch_trace) options.branch_trace->clear();

  double prev1 = 0.0, prev2 = 0.0;  // eps_{i-1}, eps_{i-2}
  double prev_shock = 0.0;          // eta_{i-1} for the bilinear model
  for (long step = 0; step < burn_in + n; ++step) {
    double t = step < burn_in ? 0.0 : static_cast<double>(step - burn_in + 1) / n;
    double shock = options.shock ? options.shock(step) : rng.normal();
    double value = 0.0;
    int branch = 0;
    switch (model.kind) {
      case InnovationKind::tv_ar2:
        value = model.a1(t) * prev1 + model.a2(t) * prev2 + shock;
        break;
      case InnovationKind::setar:
        branch = prev1 >= 0.0 ? 1 : 2;
        value = (branch == 1 ? model.a1(t) : model.a2(t)) * prev1 + shock;
        break;
      case InnovationKind::bilinear:
        value = (model.a1(t) * prev_shock + model.a2(t)) * prev1 + shock;
        break;
    }
    prev2 = prev1;
    prev1 = value;
    prev_shock = shock;
    if (step >= burn_in) {
      path.push_back(value);
      if (options.branch_trace) options.branch_trace->push_back(branch);
    }
  }
  return path;
}

namespace {

double true_m_r1(int setup, double delta, double t, double x) {
  switch (setup) {
    case 1:
      return std::pow(1.0 + x * x, -4.0) + delta * std::sin(2.0 * M_PI * t) * std::exp(-x * x);
    case 2:
      return (delta * std::sin(2.0 * M_PI * t) + 1.0) * std::exp(-0.5 * x * x);
    case 3:
      return 2.0 * t *
             (delta * std::exp(-2.0 * t * x * x) +
              std::exp(-0.5 * x * x) / std::sqrt(M_PI));
  }
  throw ConfigError("Scenario: setup must be 1, 2 or 3");
}

double true_sigma_r1(int setup, double t, double x) {
  switch (setup) {
    case 1:
      return 1.5 * std::exp(-0.5 * x * x) * (2.0 + std::sin(2.0 * M_PI * t));
    case 2:
      return 0.5 * std::exp(-x * x) * std::cos(2.0 * M_PI * t) + 1.0;
    case 3:
      if (std::abs(x) <= 1.0) return 0.7 * (1.0 + x * x);
      return t < 0.5 ? 1.4 : 2.0;
  }
  throw ConfigError("Scenario: setup must be 1, 2 or 3");
}

// r = 2 components; setups (I)-(III) of the two-lag extension.
double true_m_r2(int setup, double delta, int j, double t, double x) {
  switch (setup) {
    case 1:
      if (j == 0) return 2.0 * t * std::cos(2.0 * M_PI * t);
      if (j == 1) return std::pow(2.0 + x * x, -4.0);
      return (1.0 + delta * std::sin(2.0 * M_PI * t)) * std::exp(-x * x);
    case 2:
      if (j == 0) return 2.0;
      if (j == 1) return std::cos(2.0 * M_PI * t) * std::exp(-x * x);
      return (1.0 + delta * std::sin(2.0 * M_PI * t)) * std::exp(-x * x);
    case 3:
      if (j == 0) return 2.0 * t;
      if (j == 1) return std::exp(-x * x);
      return 2.0 * t *
             (delta * std::exp(-2.0 * t * x * x) + std::exp(-0.5 * x * x) / std::sqrt(M_PI));
  }
  throw ConfigError("Scenario: setup must be 1, 2 or 3");
}

}  // namespace

double eval_true_m(const Scenario& scenario, double t, double x) {
  if (scenario.lags != 1)
    throw ConfigError("eval_true_m: use the component form for two-lag scenarios");
  return true_m_r1(scenario.setup, scenario.delta, t, x);
}

double eval_true_m(const Scenario& scenario, int j, double t, double x) {
  if (scenario.lags == 1) {
    if (j < 0 || j > 1) throw ConfigError("eval_true_m: component index out of range");
    if (j == 0) return 0.0;
    return true_m_r1(scenario.setup, scenario.delta, t, x);
  }
  if (j < 0 || j > 2) throw ConfigError("eval_true_m: component index out of range");
  return true_m_r2(scenario.setup, scenario.delta, j, t, x);
}

double eval_true_sigma(const Scenario& scenario, double t, double x) {
  return true_sigma_r1(scenario.setup, t, x);
}

SimulatedSeries simulate_scenario(const Scenario& scenario, long n, std::uint64_t seed) {
  return simulate_scenario(scenario, n, seed, SimulateOptions{});
}

SimulatedSeries simulate_scenario(const Scenario& scenario, long n, std::uint64_t seed,
                                  const SimulateOptions& options) {
  if (n < 50) throw ConfigError("simulate_scenario: n must be >= 50");
  if (scenario.lags != 1 && scenario.lags != 2)
    throw ConfigError("simulate_scenario: lag order must be 1 or 2");

  const long burn = options.burn_in;
  const long total = burn + n;
  // Innovation steps share the scenario's clock: frozen at t = 0 through the
  // burn-in, then i/n over the kept samples.
  std::vector<double> eps(total);
  {
    CounterRng rng(seed, 0x1e5u);
    double prev1 = 0.0, prev2 = 0.0, prev_shock = 0.0;
    const InnovationModel& model = scenario.innovation;
    for (long step = 0; step < total; ++step) {
      double t = step < burn ? 0.0 : static_cast<double>(step - burn + 1) / n;
      double shock = rng.normal();
      double value = 0.0;
      switch (model.kind) {
        case InnovationKind::tv_ar2:
          value = model.a1(t) * prev1 + model.a2(t) * prev2 + shock;
          break;
        case InnovationKind::setar:
          value = (prev1 >= 0.0 ? model.a1(t) : model.a2(t)) * prev1 + shock;
          break;
        case InnovationKind::bilinear:
          value = (model.a1(t) * prev_shock + model.a2(t)) * prev1 + shock;
          break;
      }
      prev2 = prev1;
      prev1 = value;
      prev_shock = shock;
      eps[step] = value;
    }
  }

  SimulatedSeries series;
  series.seed = seed;
  series.burn_in = burn;
  series.values.resize(n);
  series.times.resize(n);

  double x_prev1 = 0.0, x_prev2 = 0.0;  // X_{i-1}, X_{i-2}; X_0 = 0
  for (long step = 0; step < total; ++step) {
    double t = step < burn ? 0.0 : static_cast<double>(step - burn + 1) / n;
    double drift, spread;
    if (scenario.lags == 1) {
      drift = true_m_r1(scenario.setup, scenario.delta, t, x_prev1);
      spread = true_sigma_r1(scenario.setup, t, x_prev1);
    } else {
      drift = true_m_r2(scenario.setup, scenario.delta, 0, t, 0.0) +
              true_m_r2(scenario.setup, scenario.delta, 1, t, x_prev1) +
              true_m_r2(scenario.setup, scenario.delta, 2, t, x_prev2);
      spread = true_sigma_r1(scenario.setup, t, x_prev1);
    }
    double value = drift + (options.zero_noise ? 0.0 : spread * eps[step]);
    if (!std::isfinite(value))
      throw SimulationDivergence(
          "simulate_scenario: non-finite value at step " + std::to_string(step), step);
    x_prev2 = x_prev1;
    x_prev1 = value;
    if (step >= burn) {
      long i = step - burn;
      series.values[i] = value;
      series.times[i] = t;
    }
  }
  return series;
}

}  // namespace tvsieve
