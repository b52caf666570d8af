#pragma once

#include "tvsieve/errors.hpp"

namespace tvsieve {

enum class MapKind { algebraic, logarithmic };
enum class MapDomain { whole_line, half_line };

/// Invertible monotone mapping x = g(y;s) from y in (-1,1) onto the whole or
/// half real line, with inverse y = u(x;s).  The unit-interval coordinate is
/// yhat(x) = (u(x;s)+1)/2.
struct Mapping {
  MapKind kind = MapKind::algebraic;
  MapDomain domain = MapDomain::whole_line;
  double scale = 1.0;

  /// g(y;s) for |y| < 1.
  double forward(double y) const;
  /// u(x;s) for x in the target domain (x > 0 on the half line).
  double inverse(double x) const;
  /// du/dx.
  double inverse_deriv(double x) const;

  bool contains(double x) const {
    return domain == MapDomain::whole_line ? true : x > 0.0;
  }

  /// yhat(x) = (u(x;s)+1)/2 in [0,1].
  double unit_from_x(double x) const { return 0.5 * (inverse(x) + 1.0); }
  /// x = g(2y-1; s) for y in (0,1).
  double x_from_unit(double y) const { return forward(2.0 * y - 1.0); }
  /// d(yhat)/dx.
  double unit_deriv(double x) const { return 0.5 * inverse_deriv(x); }
};

/// g(y;s); throws DomainError for |y| >= 1.
double map_forward(double y, const Mapping& mapping);
/// u(x;s); throws DomainError for x outside the mapping's domain.
double map_inverse(double x, const Mapping& mapping);

}  // namespace tvsieve
