#include "freeconv/density.hpp"

#include <cmath>

namespace freeconv {

namespace {

double schedule_eps(const subordination_config& cfg, int k) {
  return cfg.eps0 * std::pow(cfg.eps_ratio, k);
}

struct point_eval {
  double value = 0.0;
  double eps = 0.0;
  density_flag flag = density_flag::ok;
};

// Evaluate the Poisson-smoothed density at the two smallest scheduled eps
// and extrapolate linearly; fall back to the raw value near edges where the
// extrapolation is unstable.
point_eval extrapolate(const std::function<double(double, bool&)>& value_at,
                       const subordination_config& cfg) {
  point_eval out;
  double e1 = schedule_eps(cfg, cfg.eps_steps - 2);
  double e2 = schedule_eps(cfg, cfg.eps_steps - 1);
  bool ok1 = true, ok2 = true;
  double v1 = value_at(e1, ok1);
  double v2 = value_at(e2, ok2);
  out.eps = e2;
  if (!ok2 && !ok1) {
    out.value = v2;
    out.flag = density_flag::not_converged;
    return out;
  }
  if (!ok2) {
    out.value = v1;
    out.eps = e1;
    out.flag = density_flag::not_converged;
    return out;
  }
  double extrap = (e1 * v2 - e2 * v1) / (e1 - e2);
  if (!ok1 || std::abs(extrap - v2) > 0.1 * std::max(std::abs(v2), 1e-3)) {
    out.value = v2; // square-root edges: report the raw smallest-eps value
    out.flag = density_flag::edge;
  } else {
    out.value = extrap;
  }
  if (out.value < 0.0 && out.value > -1e-9) out.value = 0.0;
  if (out.value < 0.0) {
    out.value = 0.0;
    if (out.flag == density_flag::ok) out.flag = density_flag::edge;
  }
  return out;
}

density_grid run_grid(domain_kind dom, const std::vector<double>& grid,
                      const std::function<point_eval(double)>& eval) {
  density_grid out;
  out.domain = dom;
  out.points = grid;
  out.values.reserve(grid.size());
  for (double x : grid) {
    point_eval pe = eval(x);
    out.values.push_back(pe.value);
    out.eps_used.push_back(pe.eps);
    out.flags.push_back(pe.flag);
  }
  return out;
}

} // namespace

double density_grid::integral() const {
  if (points.size() < 2) return 0.0;
  double acc = 0.0;
  for (size_t i = 0; i + 1 < points.size(); ++i)
    acc += 0.5 * (values[i] + values[i + 1]) * (points[i + 1] - points[i]);
  if (domain == domain_kind::circle) acc /= two_pi;
  return acc;
}

density_grid density_additive(const measure& m1, const measure& m2,
                              const std::vector<double>& grid,
                              const subordination_config& cfg) {
  // Point-mass inputs shift the other measure; evaluate its transform directly.
  if (m1.is_point_mass() || m2.is_point_mass()) {
    bool first = m1.is_point_mass();
    const measure& pm = first ? m1 : m2;
    const measure& other = first ? m2 : m1;
    double c = pm.atoms[0].position;
    if (other.is_point_mass()) {
      return run_grid(domain_kind::real_line, grid, [&](double) {
        point_eval pe;
        pe.eps = schedule_eps(cfg, cfg.eps_steps - 1);
        return pe; // pure atom: no absolutely continuous part
      });
    }
    return run_grid(domain_kind::real_line, grid, [&](double x) {
      return extrapolate(
          [&](double eps, bool& ok) {
            ok = true;
            return -std::imag(cauchy_g(other, cdouble(x - c, eps))) / pi;
          },
          cfg);
    });
  }

  return run_grid(domain_kind::real_line, grid, [&](double x) {
    return extrapolate(
        [&](double eps, bool& ok) {
          subordination_value sv = omega_additive(m1, m2, cdouble(x, eps), cfg);
          ok = sv.converged;
          cdouble g = 1.0 / sv.f_value;
          return -std::imag(g) / pi;
        },
        cfg);
  });
}

density_grid density_mult_halfline(const measure& m1, const measure& m2,
                                   const std::vector<double>& grid,
                                   const subordination_config& cfg) {
  if (m1.is_point_mass() || m2.is_point_mass()) {
    bool first = m1.is_point_mass();
    const measure& pm = first ? m1 : m2;
    const measure& other = first ? m2 : m1;
    double c = pm.atoms[0].position;
    return run_grid(domain_kind::half_line, grid, [&](double x) {
      point_eval pe;
      pe.eps = schedule_eps(cfg, cfg.eps_steps - 1);
      if (c == 0.0 || other.is_point_mass()) return pe; // delta_0 or atom only
      return extrapolate(
          [&](double eps, bool& ok) {
            ok = true;
            return -std::imag(cauchy_g(other, cdouble(x / c, eps / c))) / (pi * c);
          },
          cfg);
    });
  }

  return run_grid(domain_kind::half_line, grid, [&](double x) {
    return extrapolate(
        [&](double eps, bool& ok) {
          // G_mu(x + i eps) = (psi_mu(1/(x+i eps)) + 1)/(x + i eps) with
          // psi_mu(conj(v)) = conj(psi_mu(v)) and v = 1/(x - i eps) in H.
          cdouble w(x, eps);
          cdouble v = 1.0 / std::conj(w);
          subordination_value sv = omega_mult_halfline(m1, m2, v, cfg);
          ok = sv.converged;
          cdouble psi_up = psi_eta_k(m1, sv.omega1).psi;
          cdouble g = (std::conj(psi_up) + 1.0) / w;
          return -std::imag(g) / pi;
        },
        cfg);
  });
}

density_grid density_mult_circle(const measure& m1, const measure& m2,
                                 const std::vector<double>& grid,
                                 const subordination_config& cfg) {
  if (m1.is_haar() || m2.is_haar()) {
    return run_grid(domain_kind::circle, grid, [&](double) {
      point_eval pe;
      pe.value = 1.0;
      pe.eps = 0.0;
      return pe;
    });
  }
  if (m1.is_point_mass() || m2.is_point_mass()) {
    bool first = m1.is_point_mass();
    const measure& pm = first ? m1 : m2;
    const measure& other = first ? m2 : m1;
    double c = pm.atoms[0].position;
    return run_grid(domain_kind::circle, grid, [&](double theta) {
      point_eval pe;
      pe.eps = schedule_eps(cfg, cfg.eps_steps - 1);
      if (other.is_point_mass()) return pe;
      return extrapolate(
          [&](double eps, bool& ok) {
            ok = true;
            // Rotation: psi_mu(z) = psi_other(z e^{i c})
            cdouble z = std::polar(1.0 - eps, -theta) * std::polar(1.0, c);
            cdouble mm1, mm2;
            moments_m1_m2(other, z, mm1, mm2);
            return std::real(1.0 + 2.0 * (mm1 - 1.0));
          },
          cfg);
    });
  }

  return run_grid(domain_kind::circle, grid, [&](double theta) {
    return extrapolate(
        [&](double eps, bool& ok) {
          cdouble z = std::polar(1.0 - eps, -theta);
          subordination_value sv = omega_mult_circle(m1, m2, z, cfg);
          ok = sv.converged;
          cdouble psi_mu = psi_eta_k(m1, sv.omega1).psi;
          return std::real(1.0 + 2.0 * psi_mu);
        },
        cfg);
  });
}

} // namespace freeconv
