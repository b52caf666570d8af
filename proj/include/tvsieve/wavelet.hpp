#pragma once

#include <memory>
#include <vector>

namespace tvsieve {

/// Daubechies scaling (low-pass) filter of class D-N, normalized so that
/// sum(h) = sqrt(2).  Computed by spectral factorization of the Daubechies
/// polynomial, minimal-phase branch, so the coefficients agree with the
/// standard tables.
struct DaubechiesFilter {
  int order = 0;                 // N; filter length 2N
  std::vector<double> h;

  static DaubechiesFilter make(int order);
};

/// Father wavelet phi of class D-N tabulated on the dyadic grid of spacing
/// 2^-level over the support [0, 2N-1).  Values between dyadic points come
/// from linear interpolation.
class ScalingTable {
 public:
  ScalingTable(int order, int level);

  int order() const { return order_; }
  int level() const { return level_; }
  double support_end() const { return static_cast<double>(2 * order_ - 1); }

  /// phi(x); zero outside [0, 2N-1).
  double value(double x) const;

  /// Riemann sum of the table, exactly the mass preserved by the cascade.
  double integral() const;

  const std::vector<double>& samples() const { return samples_; }
  double step() const { return step_; }

 private:
  int order_;
  int level_;
  double step_;
  std::vector<double> samples_;  // phi(j * step), j = 0 .. (2N-1)*2^level - 1
};

/// Tabulates phi for class D-N at the given dyadic resolution (level >= 1).
std::shared_ptr<const ScalingTable> daubechies_scaling(int order, int level);

/// Periodized scaling function phi_{J,k}(x) = 2^{J/2} sum_l phi(2^J x + 2^J l - k)
/// on [0,1], for 0 <= k <= 2^J - 1.
double periodized_scaling(const ScalingTable& table, int resolution, int shift, double x);

}  // namespace tvsieve
