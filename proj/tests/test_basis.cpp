#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "tvsieve/basis.hpp"
#include "tvsieve/errors.hpp"
#include "tvsieve/rng.hpp"

using namespace tvsieve;

namespace {

Mapping algebraic_whole(double s = 1.0) { return {MapKind::algebraic, MapDomain::whole_line, s}; }
Mapping log_whole(double s = 1.0) { return {MapKind::logarithmic, MapDomain::whole_line, s}; }

// independent trapezoid oracle for inner products on [0,1]
double trapezoid_inner(const BasisSet& set, int k, int l, int grid) {
  double acc = 0.0;
  for (int i = 0; i <= grid; ++i) {
    double t = static_cast<double>(i) / grid;
    double w = (i == 0 || i == grid) ? 0.5 : 1.0;
    acc += w * set.eval_time(k, t) * set.eval_time(l, t);
  }
  return acc / grid;
}

}  // namespace

TEST_CASE("map_forward values and errors") {
  Mapping alg = algebraic_whole();
  CHECK(map_forward(0.0, alg) == doctest::Approx(0.0));
  CHECK(map_forward(1.0 / std::sqrt(2.0), alg) == doctest::Approx(1.0));
  Mapping lg = log_whole();
  CHECK(map_forward(0.0, lg) == doctest::Approx(0.0));
  CHECK_THROWS_AS(map_forward(1.0, alg), DomainError);
  CHECK_THROWS_AS(map_forward(-1.2, lg), DomainError);
}

TEST_CASE("map_inverse values and roundtrip") {
  Mapping alg = algebraic_whole();
  CHECK(map_inverse(0.0, alg) == doctest::Approx(0.0));
  CHECK(map_inverse(1.0, alg) == doctest::Approx(0.70710678).epsilon(1e-7));
  CHECK(map_inverse(map_forward(0.3, alg), alg) == doctest::Approx(0.3).epsilon(1e-10));
  Mapping half{MapKind::algebraic, MapDomain::half_line, 1.0};
  CHECK_THROWS_AS(map_inverse(-1.0, half), DomainError);
}

TEST_CASE("inverse-pair property on a log-spaced grid") {
  for (Mapping mapping : {algebraic_whole(), log_whole(), algebraic_whole(2.5),
                          Mapping{MapKind::algebraic, MapDomain::half_line, 1.0},
                          Mapping{MapKind::logarithmic, MapDomain::half_line, 0.7}}) {
    double prev = -std::numeric_limits<double>::max();
    // the logarithmic inverse saturates toward +-1 in doubles past ~8s, so its
    // grid stays inside the representable range
    double top = mapping.kind == MapKind::algebraic ? 2.0 : std::log10(6.0 * mapping.scale);
    for (int i = 0; i < 1000; ++i) {
      double mag = std::pow(10.0, -3.0 + (top + 3.0) * i / 999.0);
      double x = mapping.domain == MapDomain::whole_line ? (i % 2 == 0 ? mag : -mag) : mag;
      double y = mapping.inverse(x);
      CHECK(std::abs(mapping.forward(y) - x) <= 1e-10 * std::max(1.0, std::abs(x)));
    }
    // monotonicity over a sorted grid (inside the range where the inverse is
    // numerically distinguishable from its +-1 limits)
    for (int i = 0; i <= 200; ++i) {
      double x = mapping.domain == MapDomain::whole_line ? -10.0 + 0.1 * i : 1e-3 + 0.05 * i;
      double y = mapping.inverse(x);
      CHECK(y > prev);
      prev = y;
    }
    prev = -std::numeric_limits<double>::max();
  }
}

TEST_CASE("time basis values") {
  BasisSet fourier(BasisFamily::fourier(), 5);
  for (double t : {0.0, 0.3, 0.77, 1.0}) CHECK(fourier.eval_time(1, t) == doctest::Approx(1.0));
  CHECK(fourier.eval_time(3, 0.25) == doctest::Approx(std::sqrt(2.0)));
  CHECK(fourier.eval_time(2, 0.5) == doctest::Approx(-std::sqrt(2.0)));

  BasisSet legendre(BasisFamily::legendre(), 4);
  CHECK(legendre.eval_time(2, 1.0) == doctest::Approx(std::sqrt(3.0)));
  CHECK(legendre.eval_time(1, 0.31) == doctest::Approx(1.0));

  // jacobi(0,0) is Legendre; jacobi(-1/2,-1/2) is Chebyshev of the first kind
  BasisSet jacobi00(BasisFamily::jacobi(0.0, 0.0), 4);
  for (int k = 1; k <= 4; ++k)
    CHECK(jacobi00.eval_time(k, 0.37) == doctest::Approx(legendre.eval_time(k, 0.37)));
  BasisSet chebyshev(BasisFamily::chebyshev(), 3);
  // k=1 at t=1/2: sqrt(2*omega(0)/gamma_0) = sqrt(2/pi)
  CHECK(chebyshev.eval_time(1, 0.5) == doctest::Approx(std::sqrt(2.0 / M_PI)));
  // k=3 at t=1/2: T_2(0) = -1, gamma_2 = pi/2 -> -sqrt(4/pi)*... = -2/sqrt(pi)
  CHECK(chebyshev.eval_time(3, 0.5) == doctest::Approx(-2.0 / std::sqrt(M_PI)));

  CHECK_THROWS_AS(fourier.eval_time(6, 0.5), DomainError);
  CHECK_THROWS_AS(fourier.eval_time(1, 1.5), DomainError);
}

TEST_CASE("mapped basis values") {
  BasisSet plain(BasisFamily::fourier(), 3, algebraic_whole(), /*jacobian_weight=*/false);
  for (double x : {-4.0, 0.0, 13.0}) CHECK(plain.eval_mapped(1, x) == doctest::Approx(1.0));
  CHECK(plain.eval_mapped(2, 0.0) == doctest::Approx(-std::sqrt(2.0)));

  // weighted squared-integral over the real line is 1 (quadrature in y)
  BasisSet weighted(BasisFamily::fourier(), 4, algebraic_whole(), true);
  for (int k = 1; k <= 4; ++k) {
    const int grid = 20000;
    double acc = 0.0;
    for (int i = 1; i < grid; ++i) {
      double y = static_cast<double>(i) / grid;
      double x = weighted.mapping().x_from_unit(y);
      double v = weighted.eval_mapped(k, x);
      acc += v * v / weighted.mapping().unit_deriv(x);
    }
    CHECK(acc / grid == doctest::Approx(1.0).epsilon(1e-3));
  }

  // decay of the weighted family far out in the tails
  CHECK(std::abs(weighted.eval_mapped(2, 1e6)) <= 1e-3);
  CHECK(std::abs(weighted.eval_mapped(4, -1e6)) <= 1e-3);
}

TEST_CASE("gram matrices are identity for fourier and legendre") {
  for (int count : {5, 16}) {
    BasisSet fourier(BasisFamily::fourier(), count);
    Eigen::MatrixXd gram = gram_matrix(fourier, 4096);
    CHECK((gram - Eigen::MatrixXd::Identity(count, count)).cwiseAbs().maxCoeff() <= 1e-3);

    BasisSet legendre(BasisFamily::legendre(), count);
    gram = gram_matrix(legendre, 4096);
    CHECK((gram - Eigen::MatrixXd::Identity(count, count)).cwiseAbs().maxCoeff() <= 1e-3);
  }

  // cross-check one entry against the standalone trapezoid oracle
  BasisSet fourier(BasisFamily::fourier(), 5);
  CHECK(gram_matrix(fourier, 4096)(2, 3) ==
        doctest::Approx(trapezoid_inner(fourier, 3, 4, 4096)).epsilon(1e-12));

  BasisSet constant(BasisFamily::fourier(), 1);
  Eigen::MatrixXd gram1 = gram_matrix(constant, 64);
  CHECK(gram1(0, 0) == doctest::Approx(1.0));

  // mapped family with the jacobian weight stays orthonormal
  BasisSet mapped(BasisFamily::legendre(), 6, algebraic_whole(), true);
  Eigen::MatrixXd gram_mapped = gram_matrix(mapped, 8192);
  CHECK((gram_mapped - Eigen::MatrixXd::Identity(6, 6)).cwiseAbs().maxCoeff() <= 2e-3);
}

TEST_CASE("tensor basis layout and consistency") {
  BasisSet time_basis(BasisFamily::fourier(), 2);
  BasisSet state_basis(BasisFamily::fourier(), 1, algebraic_whole(), false);
  TensorBasis tb(time_basis, state_basis, 1);
  Eigen::VectorXd v = tensor_eval(tb, 0.25, 3.7);
  CHECK(v.size() == 2);
  CHECK(v(0) == doctest::Approx(1.0));
  CHECK(v(1) == doctest::Approx(0.0).epsilon(1e-12));

  BasisSet t3(BasisFamily::fourier(), 3);
  BasisSet s4(BasisFamily::fourier(), 4, algebraic_whole(), true);
  TensorBasis tb34(t3, s4, 1);
  CHECK(tensor_eval(tb34, 0.4, 1.0).size() == 12);

  // outer-product identity at random points, exact
  CounterRng rng(42, 0);
  for (int rep = 0; rep < 100; ++rep) {
    double t = rng.uniform();
    double x = 4.0 * (rng.uniform() - 0.5);
    Eigen::VectorXd tensor = tb34.eval(t, x);
    for (int l1 = 1; l1 <= 3; ++l1)
      for (int l2 = 1; l2 <= 4; ++l2)
        CHECK(tensor(tb34.flat_index(l1, l2)) ==
              t3.eval_time(l1, t) * s4.eval_mapped(l2, x));
  }
}

TEST_CASE("first mapped function constancy drives the state offset") {
  BasisSet weight_off(BasisFamily::fourier(), 3, algebraic_whole(), false);
  CHECK(weight_off.first_function_constant());
  TensorBasis tb(BasisSet(BasisFamily::fourier(), 2), weight_off);
  CHECK(tb.state_start == 2);
  CHECK(tb.size() == 2 * 2);

  BasisSet weight_on(BasisFamily::fourier(), 3, algebraic_whole(), true);
  CHECK_FALSE(weight_on.first_function_constant());
}

TEST_CASE("daubechies filters satisfy the defining identities") {
  for (int order : {1, 2, 3, 4, 5, 6, 7, 8, 9, 10}) {
    DaubechiesFilter filter = DaubechiesFilter::make(order);
    REQUIRE(filter.h.size() == static_cast<size_t>(2 * order));
    double even = 0.0, odd = 0.0;
    for (int k = 0; k < 2 * order; ++k) (k % 2 == 0 ? even : odd) += filter.h[k];
    CHECK(std::abs(even - 1.0 / std::sqrt(2.0)) <= 1e-12);
    CHECK(std::abs(odd - 1.0 / std::sqrt(2.0)) <= 1e-12);
    for (int l = 0; l < order; ++l) {
      double acc = 0.0;
      for (int k = 2 * l; k < 2 * order; ++k) acc += filter.h[k] * filter.h[k - 2 * l];
      CHECK(std::abs(acc - (l == 0 ? 1.0 : 0.0)) <= 1e-10);
    }
  }
  CHECK_THROWS_AS(DaubechiesFilter::make(0), ConfigError);
}

TEST_CASE("cascade tables integrate to one") {
  for (int order : {1, 2, 4, 9}) {
    auto table = daubechies_scaling(order, 10);
    CHECK(std::abs(table->integral() - 1.0) <= 1e-6);
  }
  // Haar scaling function is the unit box
  auto haar = daubechies_scaling(1, 10);
  for (double x : {0.0, 0.25, 0.5, 0.9990234375}) CHECK(haar->value(x) == doctest::Approx(1.0));
  CHECK(haar->value(1.0) == 0.0);
  CHECK_THROWS_AS(ScalingTable(2, 0), ConfigError);
}

TEST_CASE("periodized wavelet basis is near-orthonormal") {
  BasisSet wavelets(BasisFamily::daubechies(4, 3), 8);
  Eigen::MatrixXd gram = gram_matrix(wavelets, 4096);
  CHECK((gram - Eigen::MatrixXd::Identity(8, 8)).cwiseAbs().maxCoeff() <= 2e-2);
  // resolution 0 gives the constant via partition of unity
  BasisSet flat(BasisFamily::daubechies(4, 0), 1);
  CHECK(flat.first_function_constant());
}

TEST_CASE("basis norm diagnostics") {
  std::vector<double> t_grid, x_grid;
  for (int i = 0; i <= 200; ++i) t_grid.push_back(i / 200.0);
  for (int i = 0; i <= 200; ++i) x_grid.push_back(-10.0 + 0.1 * i);

  {
    std::vector<BasisSet> times = {BasisSet(BasisFamily::fourier(), 5)};
    std::vector<TensorBasis> tensors;
    tensors.emplace_back(BasisSet(BasisFamily::fourier(), 5),
                         BasisSet(BasisFamily::fourier(), 4, algebraic_whole(), true), 1);
    BasisDiagnostics diag = compute_basis_norms(times, tensors, t_grid, x_grid);
    CHECK(diag.xi == doctest::Approx(std::sqrt(2.0)).epsilon(1e-2));
    CHECK(diag.zeta > 0.0);
    CHECK(std::isfinite(diag.varsigma));
    CHECK(diag.iota >= 0.0);
  }
  {
    std::vector<BasisSet> times = {BasisSet(BasisFamily::fourier(), 1)};
    std::vector<TensorBasis> tensors;
    tensors.emplace_back(BasisSet(BasisFamily::fourier(), 1),
                         BasisSet(BasisFamily::fourier(), 1, algebraic_whole(), false), 1);
    BasisDiagnostics diag = compute_basis_norms(times, tensors, t_grid, x_grid);
    CHECK(diag.xi == doctest::Approx(1.0));
    CHECK(diag.gamma == doctest::Approx(1.0));
  }
  // zeta grows with the tensor dimension
  auto zeta_of = [&](int c, int d) {
    std::vector<BasisSet> times = {BasisSet(BasisFamily::fourier(), c)};
    std::vector<TensorBasis> tensors;
    tensors.emplace_back(BasisSet(BasisFamily::fourier(), c),
                         BasisSet(BasisFamily::fourier(), d, algebraic_whole(), true), 1);
    return compute_basis_norms(times, tensors, t_grid, x_grid).zeta;
  };
  CHECK(zeta_of(4, 4) > zeta_of(2, 2));
}
