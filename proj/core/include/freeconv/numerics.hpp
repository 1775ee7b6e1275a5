#ifndef FREECONV_NUMERICS_HPP
#define FREECONV_NUMERICS_HPP

#include <complex>
#include <functional>
#include <utility>
#include <vector>

namespace freeconv {

using cdouble = std::complex<double>;

inline constexpr double pi = 3.14159265358979323846;
inline constexpr double two_pi = 2.0 * pi;

/// Gauss-Legendre nodes and weights on [-1, 1], computed by Newton iteration
/// on the Legendre recurrence and cached per order.
struct quadrature_rule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
const quadrature_rule& gauss_legendre(int n);

/// Bisection for a strictly monotone continuous f on [lo, hi] with
/// f(lo), f(hi) bracketing `target`. Returns the abscissa; the bracket is
/// shrunk to width `xtol` or until it stops moving in double precision.
double bisect_monotone(const std::function<double(double)>& f, double lo, double hi,
                       double target, double xtol);

/// Bisection on a boolean predicate that flips exactly once between lo
/// (where it is `at_lo`) and hi. Returns the flip location within xtol.
double bisect_predicate(const std::function<bool(double)>& pred, double lo, double hi,
                        bool at_lo, double xtol);

/// sqrt((z-a)(z-b)) with the branch cut exactly on [a, b] and value ~ +z at
/// +infinity. Used by all closed-form Cauchy transforms.
cdouble sqrt_cut(cdouble z, double a, double b);

/// Angle normalized to [0, 2*pi).
double wrap_angle(double theta);

/// Deterministic 64-bit splitmix; used to derive per-trial RNG streams.
std::uint64_t splitmix64(std::uint64_t& state);

/// Standard normal pairs from explicit Box-Muller over a splitmix stream,
/// so results do not depend on libstdc++'s distribution internals.
class gaussian_stream {
public:
  explicit gaussian_stream(std::uint64_t seed) : state_(seed ^ 0x9e3779b97f4a7c15ull) {}
  double next();
  cdouble next_complex(); // re and im each N(0, 1)

private:
  double uniform01();
  std::uint64_t state_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

} // namespace freeconv

#endif
