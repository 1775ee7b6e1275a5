#include "freeconv/transforms.hpp"

#include <cmath>

namespace freeconv {

namespace {

constexpr double support_eval_tol = 1e-13;

double sqrt_cut_real(double z, double a, double b) {
  // Real branch of sqrt((z-a)(z-b)) matching sqrt_cut off [a, b].
  if (z >= b) return std::sqrt((z - a) * (z - b));
  return -std::sqrt((a - z) * (b - z));
}

template <typename S>
void add_atom(double pos, double mass, S z, S& g, S& gp) {
  S d = z - pos;
  g += mass / d;
  gp -= mass / (d * d);
}

// log(1 + u) accurate for small complex u.
cdouble clog1p(cdouble u) {
  if (std::abs(u) < 1e-4)
    return u * (1.0 - u * (0.5 - u * (1.0 / 3.0 - u * 0.25)));
  return std::log(1.0 + u);
}
double clog1p(double u) { return std::log1p(u); }

// Closed-form component contributions; S is double or cdouble. All forms
// are rationalized so they stay accurate at |z| up to the tan-compactified
// range used by the support tracer (~1e9).
template <typename S, typename SqrtCut>
void add_component(const ac_component& c, S z, S& g, S& gp, SqrtCut sc) {
  switch (c.family) {
    case ac_family::semicircle: {
      double s = std::sqrt(c.variance);
      S zeta = z - c.center;
      S w = sc(zeta, -2.0 * s, 2.0 * s);
      S den = zeta + w; // (zeta - w)/(2v) = 2/(zeta + w)
      g += c.mass * 2.0 / den;
      gp += -c.mass * 2.0 / (w * den);
      return;
    }
    case ac_family::arcsine: {
      S w = sc(z, c.a, c.b);
      g += c.mass / w;
      gp += -c.mass * (z - 0.5 * (c.a + c.b)) / (w * w * w);
      return;
    }
    case ac_family::marchenko_pastur: {
      double unit = std::min(1.0, 1.0 / c.lambda);
      double scale = c.mass / unit;
      double atom0 = std::max(0.0, 1.0 - 1.0 / c.lambda);
      if (std::abs(z) < 1e-6 * (1.0 + c.b)) break; // fall through to quadrature
      S w = sc(z, c.a, c.b);
      S den = z - (1.0 - c.lambda) + w; // G_full = 2/den
      S dp = (w + z - (1.0 + c.lambda)) / w;
      g += scale * (2.0 / den - atom0 / z);
      gp += scale * (-2.0 * dp / (den * den) + atom0 / (z * z));
      return;
    }
    case ac_family::uniform: {
      S la = clog1p((c.b - c.a) / (z - c.b));
      double d = c.mass / (c.b - c.a);
      g += d * la;
      gp += -d * (c.b - c.a) / ((z - c.a) * (z - c.b));
      return;
    }
    default:
      break;
  }
  // Quadrature fallback (jacobi, table, small-z marchenko_pastur).
  for (size_t i = 0; i < c.quad_x.size(); ++i) {
    S d = z - c.quad_x[i];
    g += c.quad_w[i] / d;
    gp -= c.quad_w[i] / (d * d);
  }
}

// g1(t) = int x dmu(x) / (t - x) = t G(t) - 1, in forms that do not cancel
// for |t| far beyond the support.
double g1_component_real(const ac_component& c, double t) {
  switch (c.family) {
    case ac_family::semicircle: {
      double s = std::sqrt(c.variance);
      double zeta = t - c.center;
      double w = sqrt_cut_real(zeta, -2.0 * s, 2.0 * s);
      double den = zeta + w;
      return c.mass * (2.0 * c.center + 4.0 * c.variance / den) / den;
    }
    case ac_family::arcsine: {
      double w = sqrt_cut_real(t, c.a, c.b);
      return c.mass * ((c.a + c.b) * t - c.a * c.b) / (w * (t + w));
    }
    case ac_family::marchenko_pastur: {
      double unit = std::min(1.0, 1.0 / c.lambda);
      double scale = c.mass / unit;
      double w = sqrt_cut_real(t, c.a, c.b);
      double den = t - (1.0 - c.lambda) + w;
      double e = t + (1.0 - c.lambda) + w;
      // t*G_full - 1 = 4t/(e*den); the atom at 0 contributes nothing.
      return scale * 4.0 * t / (e * den);
    }
    case ac_family::uniform: {
      double u = (c.b - c.a) / (t - c.b);
      if (std::abs(u) < 1e-4) {
        // t*log1p(u) - (b-a) expanded in u
        double tu2 = t * u * u;
        return c.mass / (c.b - c.a) *
               ((c.b - c.a) * c.b / (t - c.b) - 0.5 * tu2 + tu2 * u / 3.0 - 0.25 * tu2 * u * u);
      }
      return c.mass * (t * std::log1p(u) / (c.b - c.a) - 1.0);
    }
    default: {
      double acc = 0.0;
      for (size_t i = 0; i < c.quad_x.size(); ++i)
        acc += c.quad_w[i] * c.quad_x[i] / (t - c.quad_x[i]);
      return acc;
    }
  }
}

void check_real_eval(const measure& m, double x) {
  if (m.support().distance(x) < support_eval_tol)
    fail(errc::eval_on_support, "evaluation point within 1e-13 of the support");
}

void eval_g_complex(const measure& m, cdouble z, cdouble& g, cdouble& gp) {
  if (std::imag(z) == 0.0) check_real_eval(m, std::real(z));
  g = 0.0;
  gp = 0.0;
  for (const auto& at : m.atoms) add_atom(at.position, at.mass, z, g, gp);
  for (const auto& c : m.ac) {
    if (c.family == ac_family::cauchy) {
      if (std::imag(z) == 0.0) fail(errc::eval_on_support, "cauchy support is the whole line");
      cdouble pole = std::imag(z) > 0.0 ? cdouble(c.location, -c.scale) : cdouble(c.location, c.scale);
      cdouble d = z - pole;
      g += c.mass / d;
      gp -= c.mass / (d * d);
      continue;
    }
    add_component(c, z, g, gp, [](cdouble w, double a, double b) { return sqrt_cut(w, a, b); });
  }
}

void eval_g_real(const measure& m, double t, double& g, double& gp) {
  check_real_eval(m, t);
  g = 0.0;
  gp = 0.0;
  for (const auto& at : m.atoms) add_atom(at.position, at.mass, t, g, gp);
  for (const auto& c : m.ac) {
    if (c.family == ac_family::cauchy)
      fail(errc::eval_on_support, "cauchy support is the whole line");
    add_component(c, t, g, gp, [](double w, double a, double b) { return sqrt_cut_real(w, a, b); });
  }
}

} // namespace

cdouble cauchy_g(const measure& m, cdouble z) {
  cdouble g, gp;
  eval_g_complex(m, z, g, gp);
  return g;
}

cdouble cauchy_g_prime(const measure& m, cdouble z) {
  cdouble g, gp;
  eval_g_complex(m, z, g, gp);
  return gp;
}

double cauchy_g_real(const measure& m, double t) {
  double g, gp;
  eval_g_real(m, t, g, gp);
  return g;
}

double cauchy_g_prime_real(const measure& m, double t) {
  double g, gp;
  eval_g_real(m, t, g, gp);
  return gp;
}

double cauchy_g1_real(const measure& m, double t) {
  check_real_eval(m, t);
  double acc = 0.0;
  for (const auto& at : m.atoms) acc += at.mass * at.position / (t - at.position);
  for (const auto& c : m.ac) {
    if (c.family == ac_family::cauchy)
      fail(errc::eval_on_support, "cauchy support is the whole line");
    acc += g1_component_real(c, t);
  }
  return acc;
}

double t_minus_f_real(const measure& m, double t) {
  // t - F(t) = g1(t)/G(t); stable where t - F cancels (|t| large).
  return cauchy_g1_real(m, t) / cauchy_g_real(m, t);
}

double psi_real(const measure& m, double t) {
  if (t == 0.0) return 0.0;
  return cauchy_g1_real(m, 1.0 / t);
}

f_value recip_f(const measure& m, cdouble z) {
  cdouble g = cauchy_g(m, z);
  if (std::abs(g) < support_eval_tol) return {cdouble(0.0, 0.0), true};
  return {1.0 / g, false};
}

double f_prime(const measure& m, double t) {
  double g, gp;
  eval_g_real(m, t, g, gp);
  if (std::abs(g) < support_eval_tol) fail(errc::pole_of_f, "G vanishes at t");
  return -gp / (g * g);
}

namespace {

// Any fixed support point works as the shift; the evaluation point is
// always separated from the support, so t - s0 stays bounded away from 0.
double shift_point(const measure& m) {
  if (!m.atoms.empty()) return m.atoms.front().position;
  for (const auto& c : m.ac)
    if (!c.quad_x.empty()) return c.quad_x.front();
  return 0.0;
}

} // namespace

double f_prime_minus_one_real(const measure& m, double t) {
  check_real_eval(m, t);
  double g = cauchy_g_real(m, t);
  if (std::abs(g) < support_eval_tol) fail(errc::pole_of_f, "G vanishes at t");
  double s0 = shift_point(m);
  double e1 = 0.0, e2 = 0.0;
  auto acc = [&](double x, double w) {
    double h = (x - s0) / ((t - x) * (t - s0));
    e1 += w * h;
    e2 += w * h * h;
  };
  for (const auto& at : m.atoms) acc(at.position, at.mass);
  for (const auto& c : m.ac) {
    if (c.family == ac_family::cauchy)
      fail(errc::eval_on_support, "cauchy support is the whole line");
    for (size_t i = 0; i < c.quad_x.size(); ++i) acc(c.quad_x[i], c.quad_w[i]);
  }
  return (e2 - e1 * e1) / (g * g);
}

namespace {

// Direct resolvent-moment sums; valid for any |z| and the only route on
// the circle. x enters as a support point (complex on the circle).
void moments_direct(const measure& m, cdouble z, cdouble& m1, cdouble& m2) {
  m1 = 0.0;
  m2 = 0.0;
  const bool circ = m.domain == domain_kind::circle;
  auto accumulate = [&](double x_or_angle, double w) {
    cdouble x = circ ? std::polar(1.0, x_or_angle) : cdouble(x_or_angle, 0.0);
    cdouble d = 1.0 - z * x;
    m1 += w / d;
    m2 += w / (d * d);
  };
  for (const auto& at : m.atoms) accumulate(at.position, at.mass);
  for (const auto& c : m.ac)
    for (size_t i = 0; i < c.quad_x.size(); ++i) accumulate(c.quad_x[i], c.quad_w[i]);
}

bool is_real(cdouble z) { return std::imag(z) == 0.0; }

} // namespace

void moments_m1_m2(const measure& m, cdouble z, cdouble& m1, cdouble& m2) {
  if (m.domain == domain_kind::circle) {
    if (m.is_haar()) { // all positive moments vanish
      m1 = 1.0;
      m2 = 1.0;
      return;
    }
    if (std::abs(std::abs(z) - 1.0) < 1e-12) {
      double inv_angle = wrap_angle(-std::arg(z));
      if (m.support().distance(inv_angle) < support_eval_tol)
        fail(errc::eval_on_support, "1/z lies on the support");
    }
    moments_direct(m, z, m1, m2);
    return;
  }

  if (is_real(z) && std::abs(z) > support_eval_tol) {
    double inv = 1.0 / std::real(z);
    if (m.support().distance(inv) < support_eval_tol)
      fail(errc::eval_on_support, "1/z lies on the support");
  }

  bool closed = true;
  for (const auto& c : m.ac)
    if (!c.has_closed_form_g() || c.family == ac_family::cauchy) closed = false;

  if (!closed || std::abs(z) < 1e-8) {
    moments_direct(m, z, m1, m2);
    return;
  }
  // M1(z) = (1/z) G(1/z), M2(z) = -G'(1/z)/z^2.
  cdouble w = 1.0 / z;
  cdouble g, gp;
  eval_g_complex(m, w, g, gp);
  m1 = g / z;
  m2 = -gp / (z * z);
}

transform_bundle psi_eta_k(const measure& m, cdouble z) {
  transform_bundle out;
  cdouble m1, m2;
  moments_m1_m2(m, z, m1, m2);
  out.psi = m1 - 1.0;
  if (std::abs(m1) < 1e-14) fail(errc::psi_is_minus_one, "psi = -1, eta pole");
  out.eta = out.psi / m1;
  if (std::abs(z) < 1e-8) {
    // k(0) = first moment, k'(0) = second central moment.
    cdouble mom1 = 0.0, mom2 = 0.0;
    const bool circ = m.domain == domain_kind::circle;
    auto acc = [&](double x_or_angle, double w) {
      cdouble x = circ ? std::polar(1.0, x_or_angle) : cdouble(x_or_angle, 0.0);
      mom1 += w * x;
      mom2 += w * x * x;
    };
    for (const auto& at : m.atoms) acc(at.position, at.mass);
    for (const auto& c : m.ac)
      for (size_t i = 0; i < c.quad_x.size(); ++i) acc(c.quad_x[i], c.quad_w[i]);
    out.k = mom1 + z * (mom2 - mom1 * mom1);
    out.k_prime = mom2 - mom1 * mom1;
    return out;
  }
  out.k = out.eta / z;
  out.k_prime = (m2 - m1 * m1) / (z * z * m1 * m1);
  return out;
}

double variance_v(const measure& m, double t) {
  // Variance of the kernel 1/(1-ts) is shift invariant; subtracting its
  // value at a fixed support point in product form keeps full relative
  // accuracy when the kernel is nearly constant over the support.
  if (m.domain == domain_kind::circle) {
    cdouble z = std::polar(1.0, t);
    double inv_angle = wrap_angle(-t);
    if (m.support().distance(inv_angle) < support_eval_tol)
      fail(errc::eval_on_support, "1/t lies on the support");
    cdouble s0 = std::polar(1.0, shift_point(m));
    cdouble e1 = 0.0, e2 = 0.0;
    auto acc = [&](double angle, double w) {
      cdouble x = std::polar(1.0, angle);
      cdouble h = z * (x - s0) / ((1.0 - z * x) * (1.0 - z * s0));
      e1 += w * h;
      e2 += w * h * h;
    };
    for (const auto& at : m.atoms) acc(at.position, at.mass);
    for (const auto& c : m.ac)
      for (size_t i = 0; i < c.quad_x.size(); ++i) acc(c.quad_x[i], c.quad_w[i]);
    return std::abs(e2 - e1 * e1);
  }
  if (t != 0.0 && m.support().distance(1.0 / t) < support_eval_tol)
    fail(errc::eval_on_support, "1/t lies on the support");
  double s0 = shift_point(m);
  double e1 = 0.0, e2 = 0.0;
  auto acc = [&](double x, double w) {
    double h = t * (x - s0) / ((1.0 - t * x) * (1.0 - t * s0));
    e1 += w * h;
    e2 += w * h * h;
  };
  for (const auto& at : m.atoms) acc(at.position, at.mass);
  for (const auto& c : m.ac)
    for (size_t i = 0; i < c.quad_x.size(); ++i) acc(c.quad_x[i], c.quad_w[i]);
  return e2 - e1 * e1;
}

cdouble u_log_eta(const measure& m, cdouble z) {
  if (m.domain != domain_kind::half_line)
    fail(errc::domain_violation, "u = log(eta/z) is the half-line branch");
  transform_bundle b = psi_eta_k(m, z);
  if (std::abs(b.k) < 1e-300) fail(errc::eta_zero, "eta(z) = 0");
  if (is_real(z)) {
    double k = std::real(b.k);
    if (k > 0.0) return cdouble(std::log(k), 0.0);
    return cdouble(std::log(-k), pi);
  }
  cdouble u = std::log(b.k);
  if (std::imag(u) < -1e-9 || std::imag(u) > pi + 1e-9)
    fail(errc::branch_undetermined, "Im u outside [0, pi]");
  if (std::imag(u) < 0.0) u = cdouble(std::real(u), 0.0);
  if (std::imag(u) > pi) u = cdouble(std::real(u), pi);
  return u;
}

std::vector<double> g_zeros_on_gaps(const measure& m) {
  if (m.domain == domain_kind::circle) fail(errc::domain_violation, "real-line measure required");
  std::vector<double> zeros;
  if (!m.compact()) return zeros; // cauchy: no gaps

  const support_set s = m.support();
  std::vector<std::array<double, 2>> hulls(s.intervals);
  for (double p : s.isolated_points) hulls.push_back({p, p});
  std::sort(hulls.begin(), hulls.end());

  for (size_t i = 0; i + 1 < hulls.size(); ++i) {
    double lo = hulls[i][1], hi = hulls[i + 1][0];
    double d = 1e-9 * (1.0 + std::abs(lo) + std::abs(hi));
    if (hi - lo <= 3.0 * d) continue;
    double glo = cauchy_g_real(m, lo + d);
    double ghi = cauchy_g_real(m, hi - d);
    if (glo > 0.0 && ghi < 0.0) {
      double z = bisect_monotone([&](double t) { return -cauchy_g_real(m, t); }, lo + d, hi - d,
                                 0.0, 1e-15 * (1.0 + std::abs(lo) + std::abs(hi)));
      zeros.push_back(z);
    }
  }
  return zeros;
}

} // namespace freeconv
