#include "tvsieve/mapping.hpp"

#include <cmath>
#include <string>

namespace tvsieve {

double Mapping::forward(double y) const {
  const double s = scale;
  if (domain == MapDomain::whole_line) {
    if (kind == MapKind::algebraic) return s * y / std::sqrt((1.0 - y) * (1.0 + y));
    return 0.5 * s * std::log((1.0 + y) / (1.0 - y));
  }
  if (kind == MapKind::algebraic) return s * (1.0 + y) / (1.0 - y);
  return 0.5 * s * std::log((3.0 + y) / (1.0 - y));
}

double Mapping::inverse(double x) const {
  const double s = scale;
  if (domain == MapDomain::whole_line) {
    if (kind == MapKind::algebraic) return x / std::sqrt(x * x + s * s);
    return std::tanh(x / s);
  }
  if (kind == MapKind::algebraic) return (x - s) / (x + s);
  // Inverse of x = (s/2) log((3+y)/(1-y)); the half-line counterpart of the
  // logarithmic map.
  return 2.0 * std::tanh(x / s) - 1.0;
}

double Mapping::inverse_deriv(double x) const {
  const double s = scale;
  if (domain == MapDomain::whole_line) {
    if (kind == MapKind::algebraic) return s * s / std::pow(x * x + s * s, 1.5);
    double c = std::cosh(x / s);
    return 1.0 / (s * c * c);
  }
  if (kind == MapKind::algebraic) return 2.0 * s / ((x + s) * (x + s));
  double c = std::cosh(x / s);
  return 2.0 / (s * c * c);
}

double map_forward(double y, const Mapping& mapping) {
  if (!(std::abs(y) < 1.0))
    throw DomainError("map_forward: y = " + std::to_string(y) + " outside (-1,1)");
  return mapping.forward(y);
}

double map_inverse(double x, const Mapping& mapping) {
  if (!mapping.contains(x))
    throw DomainError("map_inverse: x = " + std::to_string(x) + " outside mapping domain");
  return mapping.inverse(x);
}

}  // namespace tvsieve
