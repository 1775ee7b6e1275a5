#include "freeconv/subordination.hpp"

#include <array>
#include <cmath>

namespace freeconv {

namespace {

struct iterate_result {
  cdouble w;
  double fp_residual = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Plain Denjoy-Wolff iteration with optional damping. Every few steps an
/// Aitken delta-squared candidate is tried and kept only if it stays in the
/// domain and strictly reduces the fixed-point defect; the plain iterate is
/// the fallback, so global convergence is untouched. The acceleration is
/// what makes near-rotation maps (radii 1 - 1e-8 on the disk) tractable.
iterate_result iterate_dw(const std::function<cdouble(cdouble)>& phi, cdouble w0,
                          const std::function<bool(cdouble)>& in_domain,
                          const subordination_config& cfg) {
  iterate_result out;
  cdouble w = w0, wm1 = w0, wm2 = w0;
  int have = 0;
  for (int n = 0; n < cfg.max_iter; ++n) {
    cdouble fw = phi(w);
    double res = std::abs(fw - w);
    out.iterations = n + 1;
    if (res <= cfg.tol * std::max(1.0, std::abs(w))) {
      out.w = w;
      out.fp_residual = res;
      out.converged = true;
      return out;
    }
    cdouble w_next = (1.0 - cfg.damping) * w + cfg.damping * fw;
    if (have >= 2 && (n % 4) == 3) {
      cdouble d1 = w - wm1, d0 = wm1 - wm2;
      cdouble den = d1 - d0;
      if (std::abs(den) > 1e-300) {
        cdouble cand = w - d1 * d1 / den;
        if (in_domain(cand)) {
          cdouble fc = phi(cand);
          if (std::abs(fc - cand) < res) w_next = cand;
        }
      }
    }
    if (!in_domain(w_next) || !std::isfinite(std::abs(w_next))) {
      out.w = w;
      out.fp_residual = res;
      return out;
    }
    wm2 = wm1;
    wm1 = w;
    w = w_next;
    have = std::min(have + 1, 2);
  }
  out.w = w;
  out.fp_residual = std::abs(phi(w) - w);
  return out;
}

// Moebius 2x2 representation; maps compose by matrix product.
struct moebius {
  cdouble a{1.0}, b{0.0}, c{0.0}, d{1.0};
  cdouble operator()(cdouble w) const { return (a * w + b) / (c * w + d); }
  moebius operator*(const moebius& o) const {
    return {a * o.a + b * o.c, a * o.b + b * o.d, c * o.a + d * o.c, c * o.b + d * o.d};
  }
};

// h(w) = F(w) - w for a two-atom measure is a Moebius map.
moebius h_moebius(const measure& m) {
  double a = m.atoms[0].position, b = m.atoms[1].position;
  double p = m.atoms[0].mass;
  double c = p * b + (1.0 - p) * a;
  return {cdouble(c - a - b), cdouble(a * b), cdouble(1.0), cdouble(-c)};
}

moebius translate(cdouble z) { return {1.0, z, 0.0, 1.0}; }

std::array<cdouble, 2> moebius_fixed_points(const moebius& m) {
  // c w^2 + (d - a) w - b = 0
  if (std::abs(m.c) < 1e-300) {
    cdouble w = m.b / (m.a - m.d);
    return {w, w};
  }
  cdouble half = (m.a - m.d) / (2.0 * m.c);
  cdouble disc = std::sqrt(half * half + m.b / m.c);
  return {half + disc, half - disc};
}

double identity_defect(const moebius& phi, cdouble z) {
  std::array<cdouble, 3> probes{z + cdouble(0, 1), z + cdouble(0.7, 2.0), cdouble(0.3, 1.7)};
  double worst = 0.0;
  for (cdouble w : probes) worst = std::max(worst, std::abs(phi(w) - w));
  return worst;
}

} // namespace

subordination_value omega_additive(const measure& m1, const measure& m2, cdouble z,
                                   const subordination_config& cfg) {
  if (m1.is_point_mass() || m2.is_point_mass())
    fail(errc::point_mass_input, "additive subordination needs non-point-mass inputs");
  if (!(std::imag(z) > 0.0))
    fail(errc::domain_violation, "z must lie in the upper half plane (use boundary_extend)");

  subordination_value out;

  if (m1.is_two_atom() && m2.is_two_atom()) {
    // phi_z is an exact Moebius map here, so its Denjoy-Wolff point is a
    // root of a quadratic. Near the theorem's exceptional alpha the map is
    // a near-identity rotation that plain iteration cannot resolve; the
    // algebra covers every z on this class uniformly.
    moebius phi = translate(z) * h_moebius(m2) * translate(z) * h_moebius(m1);
    auto roots = moebius_fixed_points(phi);
    cdouble det = phi.a * phi.d - phi.b * phi.c;
    auto multiplier = [&](cdouble w) {
      cdouble den = phi.c * w + phi.d;
      return std::abs(det / (den * den));
    };
    cdouble w;
    bool r0_upper = std::imag(roots[0]) > 1e-15 * std::abs(roots[0]);
    bool r1_upper = std::imag(roots[1]) > 1e-15 * std::abs(roots[1]);
    if (r0_upper != r1_upper)
      w = r0_upper ? roots[0] : roots[1];
    else
      w = multiplier(roots[0]) <= multiplier(roots[1]) ? roots[0] : roots[1];
    out.omega1 = w;
    f_value f1 = recip_f(m1, w);
    out.f_value = f1.value;
    out.omega2 = f1.value + z - w;
    f_value f2 = recip_f(m2, out.omega2);
    double defect = f2.infinite ? 1.0 / cfg.tol : std::abs(f2.value - f1.value);
    out.residual = std::max(defect, std::abs(phi(w) - w));
    out.iterations = 0;
    out.exceptional = identity_defect(phi, z) < std::max(cfg.tol, 1e-8);
    out.converged = defect <= 100.0 * cfg.tol * std::max(1.0, std::abs(f1.value));
    return out;
  }

  auto h = [](const measure& m, cdouble w) { return recip_f(m, w).value - w; };
  auto phi = [&](cdouble w) { return z + h(m2, z + h(m1, w)); };
  auto dom = [](cdouble w) { return std::imag(w) > 0.0; };

  iterate_result it = iterate_dw(phi, z, dom, cfg);
  out.omega1 = it.w;
  out.iterations = it.iterations;
  f_value f1 = recip_f(m1, out.omega1);
  out.f_value = f1.value;
  out.omega2 = f1.value + z - out.omega1;
  double defect = 0.0;
  if (std::imag(out.omega2) > 0.0 || m2.support().distance(std::real(out.omega2)) > 1e-13) {
    f_value f2 = recip_f(m2, out.omega2);
    defect = f2.infinite ? 1.0 / cfg.tol : std::abs(f2.value - f1.value);
  }
  out.residual = std::max(defect, it.fp_residual);
  out.converged = it.converged && defect <= 100.0 * cfg.tol * std::max(1.0, std::abs(f1.value));
  return out;
}

subordination_value omega_mult_halfline(const measure& m1, const measure& m2, cdouble z,
                                        const subordination_config& cfg) {
  if (m1.is_point_mass() || m2.is_point_mass())
    fail(errc::degenerate_input, "multiplicative subordination needs non-degenerate inputs");
  bool on_negative_axis = std::imag(z) == 0.0 && std::real(z) < 0.0;
  if (!(std::imag(z) > 0.0 || on_negative_axis))
    fail(errc::domain_violation, "z must lie in H or on (-inf, 0)");

  auto k_of = [](const measure& m, cdouble w) { return psi_eta_k(m, w).k; };
  auto phi = [&](cdouble w) { return z * k_of(m2, z * k_of(m1, w)); };
  auto dom = on_negative_axis
                 ? std::function<bool(cdouble)>(
                       [](cdouble w) { return std::imag(w) == 0.0 && std::real(w) < 0.0; })
                 : std::function<bool(cdouble)>([](cdouble w) { return std::imag(w) > 0.0; });

  iterate_result it = iterate_dw(phi, z, dom, cfg);
  subordination_value out;
  out.omega1 = it.w;
  out.iterations = it.iterations;
  cdouble eta1 = psi_eta_k(m1, out.omega1).eta;
  out.f_value = eta1;
  out.omega2 = z * eta1 / out.omega1;
  cdouble eta2 = psi_eta_k(m2, out.omega2).eta;
  double defect = std::abs(eta2 - eta1);
  out.residual = std::max(defect, it.fp_residual);
  out.converged = it.converged && defect <= 100.0 * cfg.tol * std::max(1.0, std::abs(eta1));
  return out;
}

subordination_value omega_mult_circle(const measure& m1, const measure& m2, cdouble z,
                                      const subordination_config& cfg) {
  if (m1.is_point_mass() || m2.is_point_mass())
    fail(errc::degenerate_input, "multiplicative subordination needs non-degenerate inputs");
  if (!(std::abs(z) < 1.0))
    fail(errc::domain_violation, "z must lie in the open disk (use boundary_extend)");

  subordination_value out;
  if (std::abs(z) < 1e-14) { // omega_j(0) = 0
    out.converged = true;
    return out;
  }

  auto k_of = [](const measure& m, cdouble w) { return psi_eta_k(m, w).k; };
  auto phi1 = [&](cdouble w) { return z * k_of(m2, z * k_of(m1, w)); };
  auto phi2 = [&](cdouble w) { return z * k_of(m1, z * k_of(m2, w)); };
  auto dom = [](cdouble w) { return std::abs(w) < 1.0; };

  iterate_result it1 = iterate_dw(phi1, z, dom, cfg);
  iterate_result it2 = iterate_dw(phi2, z, dom, cfg);
  out.omega1 = it1.w;
  out.omega2 = it2.w;
  out.iterations = it1.iterations + it2.iterations;
  cdouble eta1 = psi_eta_k(m1, out.omega1).eta;
  cdouble eta2 = psi_eta_k(m2, out.omega2).eta;
  out.f_value = eta1;
  double defect = std::abs(eta1 - eta2);
  double pairing = std::abs(out.omega1 * out.omega2 / z - eta1);
  out.residual = std::max({defect, pairing, it1.fp_residual, it2.fp_residual});
  out.converged = it1.converged && it2.converged &&
                  defect <= 100.0 * cfg.tol * std::max(1.0, std::abs(eta1));
  return out;
}

namespace {

boundary_value extend_along(const std::function<cdouble(double)>& eval,
                            const subordination_config& cfg) {
  cdouble prev = 0.0, prev_diff = 0.0;
  bool have_prev = false, have_diff = false;
  int growth_run = 0;
  double prev_mag = 0.0;
  for (int k = 0; k < cfg.eps_steps; ++k) {
    double eps = cfg.eps0 * std::pow(cfg.eps_ratio, k);
    cdouble v = eval(eps);
    double mag = std::abs(v);
    if (mag > 1.0 / cfg.tol) return {v, true};
    growth_run = (have_prev && mag > 1.5 * prev_mag) ? growth_run + 1 : 0;
    if (have_prev) {
      cdouble diff = v - prev;
      if (std::abs(diff) < 10.0 * cfg.tol * std::max(1.0, mag)) return {v, false};
      if (have_diff && k == cfg.eps_steps - 1) {
        if (growth_run >= 3) return {v, true}; // diverging along the schedule
        cdouble q = diff / prev_diff;
        if (std::abs(q) < 0.9) return {v + diff * q / (1.0 - q), false};
        fail(errc::no_limit, "no boundary limit along the eps schedule");
      }
      prev_diff = diff;
      have_diff = true;
    }
    prev = v;
    prev_mag = mag;
    have_prev = true;
  }
  return {prev, false};
}

} // namespace

boundary_value boundary_extend(const std::function<cdouble(cdouble)>& f, double x,
                               const subordination_config& cfg) {
  return extend_along([&](double eps) { return f(cdouble(x, eps)); }, cfg);
}

boundary_value boundary_extend_circle(const std::function<cdouble(cdouble)>& f, double angle,
                                      const subordination_config& cfg) {
  return extend_along([&](double eps) { return f(std::polar(1.0 - eps, angle)); }, cfg);
}

} // namespace freeconv
