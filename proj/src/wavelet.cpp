#include "tvsieve/wavelet.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <mutex>
#include <string>

#include "tvsieve/errors.hpp"

namespace tvsieve {

namespace {

using Cplx = std::complex<double>;

// Multiply two real polynomials given by ascending coefficient vectors.
std::vector<double> poly_mul(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> out(a.size() + b.size() - 1, 0.0);
  for (size_t i = 0; i < a.size(); ++i)
    for (size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  return out;
}

// Coefficients of z^{N-1} * P((2 - z - 1/z)/4) where
// P(y) = sum_{k<N} binom(N-1+k, k) y^k is the Daubechies polynomial.
std::vector<double> halfband_remainder(int order) {
  const int n = order;
  // binomial coefficients of P
  std::vector<double> pcoef(n);
  pcoef[0] = 1.0;
  for (int k = 1; k < n; ++k) pcoef[k] = pcoef[k - 1] * (n - 1 + k) / k;

  // y(z) = (2 - z - 1/z)/4 as a Laurent polynomial times z: store
  // q_k(z) = z^k * y(z)^k with ascending powers starting at z^0.
  std::vector<double> acc(2 * n - 1, 0.0);
  std::vector<double> ypow = {1.0};                  // y^0, degree offset 0
  const std::vector<double> ybase = {-0.25, 0.5, -0.25};  // z * y(z)
  for (int k = 0; k < n; ++k) {
    // z^{n-1} y^k = z^{n-1-k} * (z y)^k
    int offset = n - 1 - k;
    for (size_t j = 0; j < ypow.size(); ++j) acc[offset + j] += pcoef[k] * ypow[j];
    if (k + 1 < n) ypow = poly_mul(ypow, ybase);
  }
  return acc;
}

std::vector<Cplx> polynomial_roots(const std::vector<double>& coef) {
  int deg = static_cast<int>(coef.size()) - 1;
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(deg, deg);
  for (int i = 0; i < deg; ++i) companion(0, i) = -coef[deg - 1 - i] / coef[deg];
  for (int i = 1; i < deg; ++i) companion(i, i - 1) = 1.0;
  Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);
  std::vector<Cplx> roots(deg);
  for (int i = 0; i < deg; ++i) roots[i] = solver.eigenvalues()(i);

  // Newton polish against the original polynomial.
  auto eval = [&](Cplx z, Cplx* deriv) {
    Cplx v = 0.0, d = 0.0;
    for (int i = deg; i >= 0; --i) {
      d = d * z + v;
      v = v * z + coef[i];
    }
    *deriv = d;
    return v;
  };
  for (auto& r : roots) {
    for (int it = 0; it < 4; ++it) {
      Cplx d;
      Cplx v = eval(r, &d);
      if (std::abs(d) == 0.0) break;
      r -= v / d;
    }
  }
  return roots;
}

}  // namespace

DaubechiesFilter DaubechiesFilter::make(int order) {
  if (order < 1 || order > 20)
    throw ConfigError("DaubechiesFilter: unsupported order N = " + std::to_string(order));

  DaubechiesFilter filter;
  filter.order = order;

  // m0(z) = ((1+z)/2)^N * q(z), q built from the spectral factor of the
  // Daubechies polynomial with roots outside the unit circle (minimal phase).
  std::vector<double> q = {1.0};
  if (order > 1) {
    std::vector<Cplx> roots = polynomial_roots(halfband_remainder(order));
    std::vector<Cplx> outside;
    for (const auto& r : roots)
      if (std::abs(r) > 1.0) outside.push_back(r);
    std::sort(outside.begin(), outside.end(), [](const Cplx& a, const Cplx& b) {
      if (a.real() != b.real()) return a.real() < b.real();
      return a.imag() < b.imag();
    });
    std::vector<bool> used(outside.size(), false);
    for (size_t i = 0; i < outside.size(); ++i) {
      if (used[i]) continue;
      const Cplx r = outside[i];
      if (std::abs(r.imag()) < 1e-9) {
        q = poly_mul(q, {-r.real(), 1.0});
        used[i] = true;
        continue;
      }
      // pair with the conjugate to keep coefficients real
      size_t match = i;
      double best = std::numeric_limits<double>::max();
      for (size_t j = i + 1; j < outside.size(); ++j) {
        if (used[j]) continue;
        double dist = std::abs(outside[j] - std::conj(r));
        if (dist < best) {
          best = dist;
          match = j;
        }
      }
      used[i] = used[match] = true;
      q = poly_mul(q, {std::norm(r), -2.0 * r.real(), 1.0});
    }
    double q_at_one = 0.0;
    for (double c : q) q_at_one += c;
    for (double& c : q) c /= q_at_one;
  }

  std::vector<double> m0 = q;
  for (int k = 0; k < order; ++k) m0 = poly_mul(m0, {0.5, 0.5});

  filter.h.resize(2 * order);
  for (int k = 0; k < 2 * order; ++k) filter.h[k] = std::sqrt(2.0) * m0[k];

  // Enforce sum(h) = sqrt(2) exactly; the even/odd split then holds to
  // rounding because m0(-1) = 0 structurally.
  double total = 0.0;
  for (double v : filter.h) total += v;
  double rescale = std::sqrt(2.0) / total;
  for (double& v : filter.h) v *= rescale;
  return filter;
}

ScalingTable::ScalingTable(int order, int level) : order_(order), level_(level) {
  if (level < 1) throw ConfigError("ScalingTable: level must be >= 1");
  const DaubechiesFilter filter = DaubechiesFilter::make(order);
  const auto& h = filter.h;
  const int support = 2 * order - 1;

  // Values at the integers solve the two-scale eigenproblem
  //   phi(j) = sqrt(2) sum_k h_k phi(2j - k),  sum_j phi(j) = 1.
  std::vector<double> at_int(support + 1, 0.0);
  if (order == 1) {
    at_int[0] = 1.0;
  } else {
    int dim = support;  // integer points 0 .. 2N-2; phi(2N-1) = 0
    Eigen::MatrixXd system = Eigen::MatrixXd::Zero(dim + 1, dim);
    for (int j = 0; j < dim; ++j)
      for (int i = 0; i < dim; ++i) {
        int k = 2 * j - i;
        if (k >= 0 && k < 2 * order) system(j, i) = std::sqrt(2.0) * h[k];
        if (i == j) system(j, i) -= 1.0;
      }
    for (int i = 0; i < dim; ++i) system(dim, i) = 1.0;
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(dim + 1);
    rhs(dim) = 1.0;
    Eigen::VectorXd sol = system.colPivHouseholderQr().solve(rhs);
    for (int i = 0; i < dim; ++i) at_int[i] = sol(i);
  }

  // Cascade refinement down to the requested level.
  std::vector<double> current = at_int;  // spacing 2^-lvl, includes right endpoint
  for (int lvl = 0; lvl < level; ++lvl) {
    size_t fine_count = 2 * (current.size() - 1) + 1;
    std::vector<double> fine(fine_count, 0.0);
    double coarse_step = 1.0 / static_cast<double>(1 << lvl);
    double fine_step = 0.5 * coarse_step;
    for (size_t j = 0; j < fine_count; ++j) {
      double x = static_cast<double>(j) * fine_step;
      if (j % 2 == 0) {
        fine[j] = current[j / 2];
        continue;
      }
      double acc = 0.0;
      for (int k = 0; k < 2 * order; ++k) {
        double arg = 2.0 * x - k;
        if (arg < 0.0 || arg >= support) continue;
        double pos = arg / coarse_step;
        auto idx = static_cast<size_t>(std::llround(pos));
        if (std::abs(pos - static_cast<double>(idx)) < 1e-9) {
          acc += h[k] * current[idx];
        } else {
          size_t lo = static_cast<size_t>(pos);
          double frac = pos - static_cast<double>(lo);
          acc += h[k] * ((1.0 - frac) * current[lo] + frac * current[lo + 1]);
        }
      }
      fine[j] = std::sqrt(2.0) * acc;
    }
    current = std::move(fine);
  }

  step_ = 1.0 / static_cast<double>(1 << level);
  samples_.assign(current.begin(), current.end() - 1);  // drop the open endpoint
}

double ScalingTable::value(double x) const {
  if (x < 0.0 || x >= support_end()) return 0.0;
  double pos = x / step_;
  auto lo = static_cast<size_t>(pos);
  double frac = pos - static_cast<double>(lo);
  double left = samples_[lo];
  double right = (lo + 1 < samples_.size()) ? samples_[lo + 1] : 0.0;
  return (1.0 - frac) * left + frac * right;
}

double ScalingTable::integral() const {
  double total = 0.0;
  for (double v : samples_) total += v;
  return total * step_;
}

std::shared_ptr<const ScalingTable> daubechies_scaling(int order, int level) {
  static std::mutex cache_mutex;
  static std::map<std::pair<int, int>, std::shared_ptr<const ScalingTable>> cache;
  std::lock_guard<std::mutex> lock(cache_mutex);
  auto key = std::make_pair(order, level);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  auto table = std::make_shared<const ScalingTable>(order, level);
  cache.emplace(key, table);
  return table;
}

double periodized_scaling(const ScalingTable& table, int resolution, int shift, double x) {
  const double scale = static_cast<double>(1 << resolution);
  const double support = table.support_end();
  // phi(scale*x + scale*l - shift) is nonzero for arguments in [0, support)
  double base = scale * x - shift;
  long l_min = static_cast<long>(std::ceil((0.0 - base) / scale));
  long l_max = static_cast<long>(std::floor((support - base) / scale));
  double acc = 0.0;
  for (long l = l_min; l <= l_max; ++l) acc += table.value(base + scale * static_cast<double>(l));
  return std::sqrt(scale) * acc;
}

}  // namespace tvsieve
