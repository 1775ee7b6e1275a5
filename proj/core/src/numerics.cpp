#include "freeconv/numerics.hpp"
#include "freeconv/errors.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace freeconv {

const char* errc_name(errc c) {
  switch (c) {
    case errc::negative_mass: return "NegativeMass";
    case errc::mass_not_one: return "MassNotOne";
    case errc::domain_violation: return "DomainViolation";
    case errc::unbounded_support: return "UnboundedSupport";
    case errc::infinitely_many_components: return "InfinitelyManyComponents";
    case errc::eval_on_support: return "EvalOnSupport";
    case errc::pole_of_f: return "PoleOfF";
    case errc::psi_is_minus_one: return "PsiIsMinusOne";
    case errc::eta_zero: return "EtaZero";
    case errc::branch_undetermined: return "BranchUndetermined";
    case errc::point_mass_input: return "PointMassInput";
    case errc::degenerate_input: return "DegenerateInput";
    case errc::not_converged: return "NotConverged";
    case errc::no_limit: return "NoLimit";
    case errc::criterion_failed: return "CriterionFailed";
    case errc::non_hermitian_fallout: return "NonHermitianFallout";
    case errc::parse_error: return "ParseError";
  }
  return "UnknownError";
}

namespace {

quadrature_rule compute_gauss_legendre(int n) {
  quadrature_rule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    // Tricomi initial guess, then Newton on P_n.
    double x = std::cos(pi * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      pp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    double w = 2.0 / ((1.0 - x * x) * pp * pp);
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  return rule;
}

} // namespace

const quadrature_rule& gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: order must be >= 1");
  static std::mutex mtx;
  static std::map<int, quadrature_rule> cache;
  std::lock_guard<std::mutex> lock(mtx);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, compute_gauss_legendre(n)).first;
  return it->second;
}

double bisect_monotone(const std::function<double(double)>& f, double lo, double hi,
                       double target, double xtol) {
  double flo = f(lo) - target;
  double fhi = f(hi) - target;
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0.0) == (fhi > 0.0)) {
    // No bracket; return the endpoint closer in value.
    return std::abs(flo) <= std::abs(fhi) ? lo : hi;
  }
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    double fm = f(mid) - target;
    if (fm == 0.0) return mid;
    if ((fm > 0.0) == (flo > 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
    if (hi - lo < xtol) break;
  }
  return 0.5 * (lo + hi);
}

double bisect_predicate(const std::function<bool(double)>& pred, double lo, double hi,
                        bool at_lo, double xtol) {
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    if (pred(mid) == at_lo)
      lo = mid;
    else
      hi = mid;
    if (hi - lo < xtol) break;
  }
  return 0.5 * (lo + hi);
}

cdouble sqrt_cut(cdouble z, double a, double b) {
  return std::sqrt(z - a) * std::sqrt(z - b);
}

double wrap_angle(double theta) {
  double t = std::fmod(theta, two_pi);
  if (t < 0.0) t += two_pi;
  if (t == two_pi) t = 0.0;
  return t;
}

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

double gaussian_stream::uniform01() {
  // 53-bit mantissa in (0, 1]; never returns 0 so log() below is safe.
  std::uint64_t u = splitmix64(state_);
  return ((u >> 11) + 1.0) * 0x1.0p-53;
}

double gaussian_stream::next() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  double u1 = uniform01();
  double u2 = uniform01();
  double r = std::sqrt(-2.0 * std::log(u1));
  spare_ = r * std::sin(two_pi * u2);
  have_spare_ = true;
  return r * std::cos(two_pi * u2);
}

cdouble gaussian_stream::next_complex() {
  double re = next();
  double im = next();
  return {re, im};
}

} // namespace freeconv
