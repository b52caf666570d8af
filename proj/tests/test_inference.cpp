#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "tvsieve/errors.hpp"
#include "tvsieve/inference.hpp"
#include "tvsieve/process.hpp"
#include "tvsieve/rng.hpp"
#include "tvsieve/study.hpp"

using namespace tvsieve;

namespace {

Mapping whole() { return {MapKind::algebraic, MapDomain::whole_line, 1.0}; }

SieveConfig fourier_config(int r, int c0, int c, int d) {
  return SieveConfig::uniform(r, c0, c, d, BasisFamily::fourier(), BasisFamily::fourier(),
                              whole(), true);
}

std::shared_ptr<SieveFit> scenario_fit(int setup, double delta, long n, std::uint64_t seed,
                                       int c0 = 3, int c = 3, int d = 5) {
  Scenario sc{setup, delta, InnovationModel{InnovationKind::tv_ar2}, 1};
  SimulatedSeries series = simulate_scenario(sc, n, seed);
  RegressionData data = RegressionData::from_series(series.values, 1);
  return fit_model(data, fourier_config(1, c0, c, d));
}

BootstrapConfig small_boot(int b = 200, int m_draws = 200, int grid = 12) {
  BootstrapConfig config;
  config.block_length = 6;
  config.h_draws = b;
  config.c_draws = m_draws;
  config.t_grid = grid;
  config.y_grid = grid;
  config.alpha = 0.1;
  config.seed = 99;
  return config;
}

}  // namespace

TEST_CASE("zero multipliers give a zero statistic and draws are centered") {
  auto fit = scenario_fit(1, 0.0, 400, 3);
  MultiplierBootstrap bootstrap(fit, 8, 17);
  Eigen::VectorXd zero = Eigen::VectorXd::Zero(bootstrap.term_count());
  CHECK(bootstrap.xi_from_multipliers(zero).cwiseAbs().maxCoeff() == 0.0);

  const int draws = 5000;
  Eigen::MatrixXd pool = bootstrap.draw_pool(draws);
  Eigen::VectorXd mean = pool.colwise().mean();
  Eigen::VectorXd sd =
      ((pool.rowwise() - mean.transpose()).colwise().squaredNorm() / (draws - 1.0))
          .cwiseSqrt();
  for (int k = 0; k < mean.size(); ++k)
    CHECK(std::abs(mean(k)) <= 3.0 * sd(k) / std::sqrt(static_cast<double>(draws)) + 1e-12);
}

TEST_CASE("bootstrap covariance matches the blocked-sum oracle") {
  auto fit = scenario_fit(1, 1.0, 400, 5);
  MultiplierBootstrap bootstrap(fit, 8, 23);
  Eigen::MatrixXd oracle = bootstrap.conditional_covariance();

  const int draws = 5000;
  Eigen::MatrixXd pool = bootstrap.draw_pool(draws);
  Eigen::VectorXd mean = pool.colwise().mean();
  Eigen::MatrixXd centered = pool.rowwise() - mean.transpose();
  Eigen::MatrixXd sample = centered.transpose() * centered / (draws - 1.0);

  for (int a = 0; a < oracle.rows(); ++a)
    for (int b = 0; b < oracle.cols(); ++b) {
      double se = std::sqrt((oracle(a, a) * oracle(b, b) + oracle(a, b) * oracle(a, b)) / draws);
      CHECK(std::abs(sample(a, b) - oracle(a, b)) <= 5.0 * se + 1e-14);
    }
}

TEST_CASE("statistic is linear in xi and matches a dense recomputation") {
  auto fit = scenario_fit(2, 1.0, 300, 7);
  MultiplierBootstrap bootstrap(fit, 6, 29);
  Eigen::VectorXd xi = bootstrap.draw_xi(0);
  CounterRng rng(1, 1);
  for (int rep = 0; rep < 10; ++rep) {
    double t = rng.uniform();
    double x = 6.0 * (rng.uniform() - 0.5);
    double value = eval_T(*fit, xi, 1, t, x);
    CHECK(eval_T(*fit, 2.0 * xi, 1, t, x) == doctest::Approx(2.0 * value).epsilon(1e-12));

    // dense recomputation from scratch
    Eigen::MatrixXd gram =
        fit->design().transpose() * fit->design() / static_cast<double>(fit->n());
    Eigen::VectorXd direction = gram.ldlt().solve(fit->r_bar(1, t, x));
    CHECK(value == doctest::Approx(xi.dot(direction)).epsilon(1e-8));
  }
  CHECK(eval_T(*fit, Eigen::VectorXd::Zero(xi.size()), 1, 0.5, 0.0) == 0.0);
}

TEST_CASE("h estimation flags degenerate pools and ignores draw order") {
  Eigen::MatrixXd directions = Eigen::MatrixXd::Random(4, 6);
  Eigen::MatrixXd zero_pool = Eigen::MatrixXd::Zero(120, 4);
  int degenerate = 0;
  Eigen::MatrixXd h = estimate_h(zero_pool, directions, 2, 3, &degenerate);
  CHECK(degenerate == 6);
  CHECK(h.minCoeff() == 1e-12);

  Eigen::MatrixXd pool = Eigen::MatrixXd::Random(200, 4);
  Eigen::MatrixXd h1 = estimate_h(pool, directions, 2, 3, nullptr);
  Eigen::MatrixXd shuffled = pool.colwise().reverse();
  Eigen::MatrixXd h2 = estimate_h(shuffled, directions, 2, 3, nullptr);
  CHECK((h1 - h2).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("h squared matches the conditional covariance oracle on the grid") {
  auto fit = scenario_fit(1, 1.0, 400, 11);
  const int b_draws = 4000;
  MultiplierBootstrap bootstrap(fit, 8, 31);
  Eigen::MatrixXd pool = bootstrap.draw_pool(b_draws);
  Eigen::MatrixXd cov = bootstrap.conditional_covariance();

  CounterRng rng(2, 1);
  Eigen::MatrixXd directions(fit->total_params(), 10);
  for (int g = 0; g < 10; ++g) {
    double t = rng.uniform();
    double x = 8.0 * (rng.uniform() - 0.5);
    directions.col(g) = fit->gram_inverse() * fit->r_bar(1, t, x);
  }
  Eigen::MatrixXd h = estimate_h(pool, directions, 1, 10, nullptr);
  for (int g = 0; g < 10; ++g) {
    double variance = directions.col(g).dot(cov * directions.col(g));
    // sample variance of a Gaussian: sd(s^2) = variance * sqrt(2/(B-1))
    double se = variance * std::sqrt(2.0 / (b_draws - 1.0));
    CHECK(std::abs(h(0, g) * h(0, g) - variance) <= 5.0 * se);
  }
}

TEST_CASE("critical value definition, monotonicity, and gaussian sanity") {
  // synthetic standard-normal pool on a single grid point
  const int m_draws = 2000;
  CounterRng rng(77, 7);
  Eigen::VectorXd stats(m_draws);
  for (int k = 0; k < m_draws; ++k) stats(k) = std::abs(rng.normal());
  std::sort(stats.data(), stats.data() + stats.size());
  double c05 = critical_value(stats, 0.05);
  CHECK(c05 == doctest::Approx(1.96).epsilon(0.15 / 1.96));
  CHECK(critical_value(stats, 0.01) >= critical_value(stats, 0.05));
  CHECK(critical_value(stats, 0.05) >= critical_value(stats, 0.10));
  CHECK(critical_value(stats, 0.10) >= critical_value(stats, 0.20));

  // definition: the floor(M(1-alpha)) order statistic
  Eigen::VectorXd tiny(5);
  tiny << 1.0, 2.0, 3.0, 4.0, 5.0;
  CHECK(critical_value(tiny, 0.2) == 4.0);
  CHECK(critical_value(tiny, 0.999) == 1.0);  // clamped low
}

TEST_CASE("scr bands contain the estimate and have positive width") {
  auto fit = scenario_fit(1, 1.0, 400, 13);
  ScrGrid scr = build_scr(fit, small_boot(), 1);
  CHECK(scr.c_alpha > 0.0);
  for (long i = 0; i < scr.m_hat.rows(); ++i)
    for (long l = 0; l < scr.m_hat.cols(); ++l) {
      CHECK(scr.upper(i, l) - scr.lower(i, l) > 0.0);
      CHECK(scr.m_hat(i, l) > scr.lower(i, l));
      CHECK(scr.m_hat(i, l) < scr.upper(i, l));
      double width = scr.upper(i, l) - scr.lower(i, l);
      double expect = 2.0 * scr.c_alpha * scr.h_hat(i, l) / std::sqrt(static_cast<double>(scr.n));
      CHECK(width == doctest::Approx(expect).epsilon(1e-10));
    }
  // grid transport: x values come from the uniform y grid
  const Mapping& mapping = fit->config().covariates[0].state_basis.mapping();
  for (long l = 0; l < scr.y.size(); ++l)
    CHECK(scr.x(l) == doctest::Approx(mapping.x_from_unit(scr.y(l))));
}

TEST_CASE("median band width shrinks with sample size") {
  auto width_at = [&](long n) {
    auto fit = scenario_fit(1, 1.0, n, 41);
    ScrGrid scr = build_scr(fit, small_boot(), 1);
    std::vector<double> widths;
    for (long i = 0; i < scr.m_hat.rows(); ++i)
      for (long l = 0; l < scr.m_hat.cols(); ++l)
        widths.push_back(scr.upper(i, l) - scr.lower(i, l));
    std::nth_element(widths.begin(), widths.begin() + widths.size() / 2, widths.end());
    return widths[widths.size() / 2];
  };
  CHECK(width_at(2000) < width_at(500));
}

TEST_CASE("scr is equivariant under a constant response shift") {
  Scenario sc{2, 1.0, InnovationModel{InnovationKind::tv_ar2}, 1};
  SimulatedSeries series = simulate_scenario(sc, 400, 19);
  RegressionData data = RegressionData::from_series(series.values, 1);
  SieveConfig config = fourier_config(1, 3, 3, 5);

  auto fit = fit_model(data, config);
  RegressionData shifted = data;
  shifted.y.array() += 5.0;
  auto fit_shifted = fit_model(shifted, config);

  BootstrapConfig boot = small_boot();
  ScrGrid scr = build_scr(fit, boot, 1);
  ScrGrid scr_shifted = build_scr(fit_shifted, boot, 1);
  CHECK((scr.m_hat - scr_shifted.m_hat).cwiseAbs().maxCoeff() <= 1e-8);
  CHECK((scr.lower - scr_shifted.lower).cwiseAbs().maxCoeff() <= 1e-8);
  CHECK(fit_shifted->eval_corrected(0, 0.37) ==
        doctest::Approx(fit->eval_corrected(0, 0.37) + 5.0).epsilon(1e-8));
}

TEST_CASE("critical value is stable under pool swapping") {
  // repeat-run dispersion oracle: the swap perturbation must sit within the
  // spread of independent reruns
  auto fit = scenario_fit(1, 1.0, 400, 43);
  BootstrapConfig boot = small_boot(400, 400, 8);
  std::vector<double> reruns;
  for (std::uint64_t s = 0; s < 12; ++s) {
    BootstrapConfig alt = boot;
    alt.seed = 1000 + s;
    reruns.push_back(build_scr(fit, alt, 1).c_alpha);
  }
  double mean = 0.0, var = 0.0;
  for (double v : reruns) mean += v;
  mean /= reruns.size();
  for (double v : reruns) var += (v - mean) * (v - mean);
  double sd = std::sqrt(var / (reruns.size() - 1));

  // swapped pools: h from the back half, stats from the front
  ScrGrid base = build_scr(fit, boot, 1);
  MultiplierBootstrap bootstrap(fit, boot.block_length, boot.seed);
  Eigen::MatrixXd swapped_h = bootstrap.draw_pool(boot.c_draws, boot.h_draws);
  const long grid_size = base.t.size() * base.x.size();
  Eigen::MatrixXd directions(fit->total_params(), grid_size);
  for (long i = 0; i < base.t.size(); ++i)
    for (long l = 0; l < base.x.size(); ++l)
      directions.col(i * base.x.size() + l) =
          fit->gram_inverse() * fit->r_bar(1, base.t(i), base.x(l));
  Eigen::MatrixXd h = estimate_h(swapped_h, directions, base.t.size(), base.x.size(), nullptr);
  Eigen::VectorXd stats(boot.h_draws);
  for (int k = 0; k < boot.h_draws; ++k) {
    Eigen::VectorXd values = directions.transpose() * bootstrap.draw_xi(k);
    double worst = 0.0;
    for (long g = 0; g < grid_size; ++g)
      worst = std::max(worst, std::abs(values(g)) / h(g / base.x.size(), g % base.x.size()));
    stats(k) = worst;
  }
  std::sort(stats.data(), stats.data() + stats.size());
  double swapped_c = critical_value(stats, boot.alpha);
  CHECK(std::abs(swapped_c - mean) <= 5.0 * sd + 1e-12);
}

TEST_CASE("exact-form test trivial cases and decision consistency") {
  auto fit = scenario_fit(1, 1.0, 400, 47);
  ScrGrid scr = build_scr(fit, small_boot(), 1);

  TestReport self = test_exact_form(
      scr, [&](double t, double x) { return fit->eval_corrected(1, t, x); });
  CHECK_FALSE(self.reject);
  CHECK(self.t_obs == 0.0);
  CHECK(self.p_value == 1.0);
  CHECK(self.band_exits == 0);

  double blowup = 10.0 * (scr.upper - scr.lower).maxCoeff();
  TestReport far = test_exact_form(scr, [&](double t, double x) {
    return fit->eval_corrected(1, t, x) + blowup;
  });
  CHECK(far.reject);
  CHECK(far.p_value == doctest::Approx(0.0));
  CHECK(far.band_exits > 0);

  // three-way agreement on a borderline family of shifts
  for (double shift : {0.001, 0.003, 0.01, 0.03, 0.1, 0.3}) {
    TestReport report = test_exact_form(scr, [&](double t, double x) {
      return fit->eval_corrected(1, t, x) + shift;
    });
    CHECK(report.reject == (report.p_value < scr.alpha));
    CHECK(report.reject == (report.band_exits > 0));
  }
}

TEST_CASE("homogeneity test accepts an exactly time-constant in-span target") {
  // noiseless data from a function in the restricted span
  SieveConfig config = fourier_config(1, 3, 3, 5);
  const auto& cov = config.covariates[0];
  RegressionData data;
  const long n = 500;
  data.y.resize(n);
  data.x.resize(n, 1);
  data.times.resize(n);
  CounterRng rng(3, 9);
  for (long i = 0; i < n; ++i) {
    data.times(i) = static_cast<double>(i + 1) / n;
    data.x(i, 0) = 2.0 * rng.normal();
    data.y(i) = 0.7 * cov.state_basis.eval_mapped(1, data.x(i, 0)) +
                0.3 * cov.state_basis.eval_mapped(2, data.x(i, 0));
  }
  auto fit = fit_model(data, config);
  ScrGrid scr = build_scr(fit, small_boot(), 1);
  TestReport report = test_homogeneity(scr);
  CHECK_FALSE(report.reject);
  CHECK(report.p_value == 1.0);
}

TEST_CASE("separability test factorizes an exactly separable surface") {
  auto fit = scenario_fit(3, 0.0, 400, 53);
  ScrGrid scr = build_scr(fit, small_boot(), 1);
  // overwrite the estimate with an exactly separable synthetic surface
  ScrGrid synthetic = scr;
  for (long i = 0; i < synthetic.t.size(); ++i)
    for (long l = 0; l < synthetic.x.size(); ++l)
      synthetic.m_hat(i, l) =
          (1.0 + 0.5 * synthetic.t(i)) * std::exp(-0.2 * synthetic.x(l) * synthetic.x(l));
  synthetic.lower = synthetic.m_hat.array() - 1.0;
  synthetic.upper = synthetic.m_hat.array() + 1.0;
  TestReport report = test_separability(synthetic);
  CHECK((report.restricted - synthetic.m_hat).cwiseAbs().maxCoeff() <= 1e-8);
  CHECK_FALSE(report.reject);

  // degenerate normalization: surface integrating to zero
  ScrGrid odd = scr;
  for (long i = 0; i < odd.t.size(); ++i)
    for (long l = 0; l < odd.x.size(); ++l) odd.m_hat(i, l) = odd.x(l) * std::exp(-odd.x(l) * odd.x(l));
  CHECK_THROWS_AS(test_separability(odd), DegenerateNormalization);
}

TEST_CASE("bootstrap pools are deterministic and honor their sizes") {
  auto fit = scenario_fit(1, 0.0, 300, 59);
  MultiplierBootstrap a(fit, 6, 1234);
  MultiplierBootstrap b(fit, 6, 1234);
  Eigen::MatrixXd pool_a = a.draw_pool(50);
  Eigen::MatrixXd pool_b = b.draw_pool(50);
  CHECK(pool_a.rows() == 50);
  CHECK((pool_a - pool_b).cwiseAbs().maxCoeff() == 0.0);
  MultiplierBootstrap c(fit, 6, 1235);
  CHECK((pool_a - c.draw_pool(50)).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("bootstrap configuration validation") {
  auto fit = scenario_fit(1, 0.0, 300, 61);
  BootstrapConfig bad = small_boot();
  bad.block_length = 200;
  CHECK_THROWS_AS(build_scr(fit, bad, 1), ConfigError);
  bad = small_boot();
  bad.h_draws = 10;
  CHECK_THROWS_AS(build_scr(fit, bad, 1), ConfigError);
  bad = small_boot();
  bad.alpha = 1.5;
  CHECK_THROWS_AS(build_scr(fit, bad, 1), ConfigError);
}

TEST_CASE("two-lag scenario: regions and tests for each component") {
  Scenario sc{2, 0.5, InnovationModel{InnovationKind::tv_ar2}, 2};
  SimulatedSeries series = simulate_scenario(sc, 600, 71);
  RegressionData data = RegressionData::from_series(series.values, 2);
  SieveConfig config = fourier_config(2, 3, 3, 4);
  auto fit = fit_model(data, config);

  BootstrapConfig boot = small_boot(150, 150, 8);
  for (int j : {1, 2}) {
    ScrGrid scr = build_scr(fit, boot, j);
    CHECK(scr.c_alpha > 0.0);
    CHECK(scr.m_hat.rows() == 8);
    TestReport homo = test_homogeneity(scr);
    CHECK(homo.p_value >= 0.0);
    CHECK(homo.p_value <= 1.0);
    CHECK(homo.reject == (homo.p_value < scr.alpha));
    TestReport sep = test_separability(scr);
    CHECK(sep.restricted.rows() == scr.m_hat.rows());
  }
  CHECK_THROWS_AS(build_scr(fit, boot, 3), ConfigError);

  // identifiability across components: corrected samples mean to zero
  for (int j : {1, 2}) {
    double acc = 0.0;
    for (long i = 0; i < data.n(); ++i)
      acc += fit->eval_corrected(j, data.times(i), data.x(i, j - 1));
    CHECK(std::abs(acc / data.n()) <= 1e-8);
  }
}

TEST_CASE("wavelet time basis fits and bootstraps") {
  Scenario sc{2, 0.0, InnovationModel{InnovationKind::tv_ar2}, 1};
  SimulatedSeries series = simulate_scenario(sc, 500, 73);
  RegressionData data = RegressionData::from_series(series.values, 1);
  SieveConfig config = SieveConfig::uniform(
      1, 4, 4, 8, BasisFamily::daubechies(4, 2), BasisFamily::daubechies(4, 3), whole(), true);
  auto fit = fit_model(data, config);
  CHECK(fit->condition_number() < 1e8);
  ScrGrid scr = build_scr(fit, small_boot(120, 120, 8), 1);
  CHECK(scr.c_alpha > 0.0);
  TestReport report = test_exact_form(
      scr, [&](double t, double x) { return fit->eval_corrected(1, t, x); });
  CHECK_FALSE(report.reject);
}

TEST_CASE("half-line mapped fit on positive covariates") {
  CounterRng rng(75, 2);
  RegressionData data;
  const long n = 400;
  data.y.resize(n);
  data.x.resize(n, 1);
  data.times.resize(n);
  for (long i = 0; i < n; ++i) {
    data.times(i) = static_cast<double>(i + 1) / n;
    double z = rng.normal();
    data.x(i, 0) = std::exp(0.5 * z);  // lognormal, strictly positive
    data.y(i) = std::exp(-data.x(i, 0)) + 0.2 * rng.normal();
  }
  Mapping half{MapKind::algebraic, MapDomain::half_line, 1.0};
  SieveConfig config = SieveConfig::uniform(1, 3, 3, 5, BasisFamily::fourier(),
                                            BasisFamily::legendre(), half, true);
  auto fit = fit_model(data, config);
  BootstrapConfig boot = small_boot(120, 120, 8);
  boot.x_lo = 0.05;
  boot.x_hi = 8.0;
  ScrGrid scr = build_scr(fit, boot, 1);
  CHECK(scr.x.minCoeff() > 0.0);
  CHECK(scr.c_alpha > 0.0);
}
