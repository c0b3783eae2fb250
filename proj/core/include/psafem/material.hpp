#pragma once

#include <limits>
#include <stdexcept>

namespace psafem {

/// Lame parametrization from Young's modulus and Poisson ratio.
/// nu = 1/2 selects the perfectly incompressible limit (lambda = infinity).
struct MaterialParams {
  double E = 1.0;
  double nu = 0.35;
  double lambda = 0.0; // +inf flag when limit
  double mu = 0.0;
  bool limit = false;

  /// (lambda+mu)/(n lambda + (n+1) mu); tends to 1/n in the limit.
  double c_trace(int n) const {
    if (limit) return 1.0 / n;
    return (lambda + mu) / (n * lambda + (n + 1) * mu);
  }
};

inline MaterialParams material(double E, double nu) {
  if (!(E > 0.0)) throw std::invalid_argument("material: E must be positive");
  if (!(nu > 0.0 && nu <= 0.5)) throw std::invalid_argument("material: nu must be in (0, 1/2]");
  MaterialParams m;
  m.E = E;
  m.nu = nu;
  m.mu = E / (2.0 * (1.0 + nu));
  m.limit = (nu == 0.5);
  m.lambda = m.limit ? std::numeric_limits<double>::infinity()
                     : E * nu / ((1.0 + nu) * (1.0 - 2.0 * nu));
  return m;
}

} // namespace psafem
