#ifndef FREECONV_TRANSFORMS_HPP
#define FREECONV_TRANSFORMS_HPP

#include "freeconv/measure.hpp"
#include "freeconv/numerics.hpp"

namespace freeconv {

/// Cauchy transform G(z) = int d mu(t) / (z - t). Closed forms for
/// semicircle, arcsine, Marchenko-Pastur, Cauchy and uniform components;
/// Gauss-Legendre sums otherwise. Real z must stay off the support.
cdouble cauchy_g(const measure& m, cdouble z);
cdouble cauchy_g_prime(const measure& m, cdouble z);

// Real-axis fast paths (z real, off support).
double cauchy_g_real(const measure& m, double t);
double cauchy_g_prime_real(const measure& m, double t);

/// g1(t) = int x dmu(x)/(t - x) = t G(t) - 1, evaluated without the large-t
/// cancellation of the naive form. Feeds the stable t - F(t) and psi below.
double cauchy_g1_real(const measure& m, double t);

/// t - F(t) in a form stable far from the support (t - F tends to a
/// constant there while t and F both blow up).
double t_minus_f_real(const measure& m, double t);

/// psi(t) on the real axis via psi(t) = g1(1/t); exact 0 at t = 0.
double psi_real(const measure& m, double t);

struct f_value {
  cdouble value;
  bool infinite = false; // pole of F (zero of G)
};

/// Reciprocal Cauchy transform F = 1/G; flags a pole instead of overflowing.
f_value recip_f(const measure& m, cdouble z);

/// F'(t) = -G'(t)/G(t)^2 at real t off the support; >= 1 on the set A_mu.
double f_prime(const measure& m, double t);

/// F'(t) - 1 = Var(1/(t-s))/G(t)^2, evaluated through the shifted kernel
/// (s - s0)/((t-s)(t-s0)) so the value keeps full relative accuracy where
/// F' - 1 is tiny. The support-pair criteria depend on this.
double f_prime_minus_one_real(const measure& m, double t);

struct transform_bundle {
  cdouble psi;
  cdouble eta;     // psi / (1 + psi)
  cdouble k;       // eta / z (first moment at z = 0)
  cdouble k_prime; // (M2 - M1^2) / (z^2 * M1^2)
};

/// Resolvent moments M1 = int d mu/(1 - z t), M2 = int d mu/(1 - z t)^2.
void moments_m1_m2(const measure& m, cdouble z, cdouble& m1, cdouble& m2);

/// psi/eta/k and k' for half-line and circle measures.
transform_bundle psi_eta_k(const measure& m, cdouble z);

/// Variance of s -> 1/(1 - t s) in L^2(mu): M2 - M1^2 on the half-line
/// (t real), |M2 - M1^2| on the circle (t an angle).
double variance_v(const measure& m, double t);

/// u(z) = log(eta(z)/z) with 0 <= Im u <= pi, real where eta/z > 0 on gap
/// intervals and Im u = pi where eta/z < 0.
cdouble u_log_eta(const measure& m, cdouble z);

/// Zeros of G on the bounded gaps of the support (at most one per gap,
/// located by bisection; G is strictly decreasing there).
std::vector<double> g_zeros_on_gaps(const measure& m);

} // namespace freeconv

#endif
