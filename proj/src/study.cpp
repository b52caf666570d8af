#include "tvsieve/study.hpp"

#include <atomic>
#include <cmath>
#include <thread>

#include "tvsieve/errors.hpp"
#include "tvsieve/rng.hpp"

namespace tvsieve {

namespace {

// E f(t, X_t) under the stationary-at-t law of `law`, one value per grid t.
Eigen::VectorXd frozen_law_mean(const Scenario& law,
                                const std::function<double(double, double)>& f,
                                const Eigen::VectorXd& t_grid, long samples,
                                std::uint64_t seed) {
  if (law.lags != 1)
    throw ConfigError("centering_curve: only the one-lag scenarios are supported");
  Eigen::VectorXd curve(t_grid.size());
  const long burn = 500;
  for (long gi = 0; gi < t_grid.size(); ++gi) {
    const double t = t_grid(gi);
    CounterRng rng(seed, 0xce17u + static_cast<std::uint64_t>(gi));
    const InnovationModel& model = law.innovation;
    double eps1 = 0.0, eps2 = 0.0, shock_prev = 0.0;
    double x = 0.0;
    double acc = 0.0;
    for (long k = 0; k < burn + samples; ++k) {
      double shock = rng.normal();
      double eps = 0.0;
      switch (model.kind) {
        case InnovationKind::tv_ar2:
          eps = model.a1(t) * eps1 + model.a2(t) * eps2 + shock;
          break;
        case InnovationKind::setar:
          eps = (eps1 >= 0.0 ? model.a1(t) : model.a2(t)) * eps1 + shock;
          break;
        case InnovationKind::bilinear:
          eps = (model.a1(t) * shock_prev + model.a2(t)) * eps1 + shock;
          break;
      }
      eps2 = eps1;
      eps1 = eps;
      shock_prev = shock;
      if (k >= burn) acc += f(t, x);
      x = eval_true_m(law, t, x) + eval_true_sigma(law, t, x) * eps;
    }
    curve(gi) = acc / static_cast<double>(samples);
  }
  return curve;
}

std::uint64_t replicate_seed(std::uint64_t master, int id) {
  std::uint64_t z = master + 0x6b43a9b5u + 0x9e3779b97f4a7c15ull * static_cast<std::uint64_t>(id);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

}  // namespace

Eigen::VectorXd centering_curve(const Scenario& scenario, const Eigen::VectorXd& t_grid,
                                long samples, std::uint64_t seed) {
  return frozen_law_mean(
      scenario, [&](double t, double x) { return eval_true_m(scenario, t, x); }, t_grid, samples,
      seed);
}

Eigen::MatrixXd centered_truth(const Scenario& scenario, const Eigen::VectorXd& t_grid,
                               const Eigen::VectorXd& x_grid, long samples) {
  Eigen::VectorXd chi = centering_curve(scenario, t_grid, samples);
  Eigen::MatrixXd truth(t_grid.size(), x_grid.size());
  for (long i = 0; i < t_grid.size(); ++i)
    for (long l = 0; l < x_grid.size(); ++l)
      truth(i, l) = eval_true_m(scenario, t_grid(i), x_grid(l)) - chi(i);
  return truth;
}

StudyResult run_study(const StudyConfig& config) {
  if (config.replicates < 1) throw ConfigError("run_study: replicate count must be >= 1");
  if (config.scenario.lags != 1 &&
      (config.mode == StudyMode::coverage || config.test_kind == TestKind::exact_form))
    throw ConfigError("run_study: the centering oracle covers one-lag scenarios only");
  const int workers = std::max(1, config.workers);

  Eigen::VectorXd t_grid(config.bootstrap.t_grid);
  for (int i = 0; i < config.bootstrap.t_grid; ++i)
    t_grid(i) = static_cast<double>(i) / (config.bootstrap.t_grid - 1);
  const Mapping mapping = config.sieve.mapping;
  Eigen::VectorXd x_grid(config.bootstrap.y_grid);
  {
    double y_lo = mapping.unit_from_x(config.bootstrap.x_lo);
    double y_hi = mapping.unit_from_x(config.bootstrap.x_hi);
    for (int l = 0; l < config.bootstrap.y_grid; ++l)
      x_grid(l) = mapping.x_from_unit(y_lo + (y_hi - y_lo) * static_cast<double>(l) /
                                                 (config.bootstrap.y_grid - 1));
  }

  // Shared targets: the centered truth for coverage scoring, or the centered
  // null surface for the exact-form test.  Both center per the
  // identifiability convention under the data-generating law.
  std::optional<Eigen::MatrixXd> target;
  if (config.mode == StudyMode::coverage) {
    target = centered_truth(config.scenario, t_grid, x_grid, config.centering_samples);
  } else if (config.test_kind == TestKind::exact_form) {
    Scenario null_scenario = config.scenario;
    null_scenario.delta = 0.0;
    Eigen::VectorXd chi = frozen_law_mean(
        config.scenario,
        [&](double t, double x) { return eval_true_m(null_scenario, t, x); }, t_grid,
        config.centering_samples, 0x27ce11u);
    Eigen::MatrixXd surface(t_grid.size(), x_grid.size());
    for (long i = 0; i < t_grid.size(); ++i)
      for (long l = 0; l < x_grid.size(); ++l)
        surface(i, l) = eval_true_m(null_scenario, t_grid(i), x_grid(l)) - chi(i);
    target = surface;
  }

  auto target_lookup = [&](double t, double x) {
    long i = std::llround(t * (t_grid.size() - 1));
    i = std::clamp<long>(i, 0, t_grid.size() - 1);
    long best_l = 0;
    double best = std::numeric_limits<double>::max();
    for (long q = 0; q < x_grid.size(); ++q) {
      double dist = std::abs(x_grid(q) - x);
      if (dist < best) {
        best = dist;
        best_l = q;
      }
    }
    return (*target)(i, best_l);
  };

  std::vector<ReplicateOutcome> outcomes(config.replicates);
  std::atomic<int> next{0};
  auto worker = [&]() {
    while (true) {
      int id = next.fetch_add(1);
      if (id >= config.replicates) break;
      ReplicateOutcome outcome;
      outcome.id = id;
      try {
        std::uint64_t seed = replicate_seed(config.seed, id);
        SimulatedSeries series = simulate_scenario(config.scenario, config.n, seed);
        RegressionData data = RegressionData::from_series(series.values, config.scenario.lags);
        SieveConfig sieve = config.sieve.instantiate(config.c, config.d);
        auto fit = fit_model(data, sieve);
        BootstrapConfig boot = config.bootstrap;
        boot.seed = replicate_seed(seed, 7919);
        ScrGrid scr = build_scr(fit, boot, config.component);
        if (config.mode == StudyMode::coverage) {
          outcome.hit = scr.contains(*target) ? 1 : 0;
          double worst = 0.0;
          for (long i = 0; i < scr.m_hat.rows(); ++i)
            for (long l = 0; l < scr.m_hat.cols(); ++l)
              worst = std::max(worst,
                               std::abs((*target)(i, l) - scr.m_hat(i, l)) / scr.h_hat(i, l));
          outcome.statistic = worst * std::sqrt(static_cast<double>(scr.n));
        } else {
          TestReport report;
          switch (config.test_kind) {
            case TestKind::exact_form:
              report = test_exact_form(scr, target_lookup);
              break;
            case TestKind::homogeneity:
              report = test_homogeneity(scr);
              break;
            case TestKind::separability:
              report = test_separability(scr);
              break;
          }
          outcome.hit = report.reject ? 1 : 0;
          outcome.statistic = report.t_obs;
          outcome.p_value = report.p_value;
        }
        outcome.ok = true;
      } catch (const std::exception& err) {
        outcome.ok = false;
        outcome.error = err.what();
      }
      outcomes[id] = std::move(outcome);
    }
  };

  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (auto& th : pool) th.join();

  StudyResult result;
  result.outcomes = std::move(outcomes);
  int hits = 0;
  std::string first_error;
  for (const auto& outcome : result.outcomes) {
    if (outcome.ok) {
      ++result.successes;
      hits += outcome.hit;
    } else {
      ++result.failures;
      if (first_error.empty()) first_error = outcome.error;
    }
  }
  if (result.failures > config.replicates / 20)
    throw TuningError("run_study: failure budget (5%) exceeded, " +
                      std::to_string(result.failures) + " of " +
                      std::to_string(config.replicates) + " failed; first error: " + first_error);
  if (result.successes > 0) {
    result.rate = static_cast<double>(hits) / result.successes;
    result.standard_error = std::sqrt(result.rate * (1.0 - result.rate) / result.successes);
  }
  return result;
}

}  // namespace tvsieve
