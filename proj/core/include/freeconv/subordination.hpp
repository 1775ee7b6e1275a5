#ifndef FREECONV_SUBORDINATION_HPP
#define FREECONV_SUBORDINATION_HPP

#include <functional>

#include "freeconv/measure.hpp"
#include "freeconv/transforms.hpp"

namespace freeconv {

struct subordination_config {
  double tol = 1e-12;
  int max_iter = 100000;
  double eps0 = 1e-2;     // boundary-extension schedule eps_k = eps0 * ratio^k
  double eps_ratio = 0.5;
  int eps_steps = 20;
  double damping = 1.0;   // w <- (1-d) w + d phi(w)
};

struct subordination_value {
  cdouble omega1;
  cdouble omega2;
  cdouble f_value;   // F_mu(z) on the line, eta_mu(z) on the multiplicative branches
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;
  bool exceptional = false; // two-atom identity-map case solved algebraically
};

/// omega_1, omega_2 for the additive convolution at z in the upper half
/// plane, as the Denjoy-Wolff limit of w -> z + h2(z + h1(w)).
subordination_value omega_additive(const measure& m1, const measure& m2, cdouble z,
                                   const subordination_config& cfg = {});

/// Half-line multiplicative branch: w -> z k2(z k1(w)) on H, also valid for
/// real z < 0 where the map preserves C \ R+.
subordination_value omega_mult_halfline(const measure& m1, const measure& m2, cdouble z,
                                        const subordination_config& cfg = {});

/// Circle multiplicative branch on the open disk; omega_j(0) = 0 exactly.
subordination_value omega_mult_circle(const measure& m1, const measure& m2, cdouble z,
                                      const subordination_config& cfg = {});

struct boundary_value {
  cdouble value;
  bool infinite = false;
};

/// Continuous boundary extension along x + i*eps_k (upper half plane).
boundary_value boundary_extend(const std::function<cdouble(cdouble)>& f, double x,
                               const subordination_config& cfg = {});

/// Radial boundary extension along (1 - eps_k) e^{i angle} (unit disk).
boundary_value boundary_extend_circle(const std::function<cdouble(cdouble)>& f, double angle,
                                      const subordination_config& cfg = {});

} // namespace freeconv

#endif
