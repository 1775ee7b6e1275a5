#include "freeconv/measure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace freeconv {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();
constexpr double merge_tol = 1e-12; // endpoints closer than this are touching

double beta_integral(double p, double q) {
  return std::exp(std::lgamma(p) + std::lgamma(q) - std::lgamma(p + q));
}

// Antiderivative of sqrt(4 - x^2) relative to x = -2.
double semicircle_primitive(double x) {
  x = std::clamp(x, -2.0, 2.0);
  return 0.5 * x * std::sqrt(std::max(0.0, 4.0 - x * x)) + 2.0 * std::asin(0.5 * x) + pi;
}

} // namespace

const char* ac_family_name(ac_family f) {
  switch (f) {
    case ac_family::semicircle: return "semicircle";
    case ac_family::arcsine: return "arcsine";
    case ac_family::marchenko_pastur: return "marchenko_pastur";
    case ac_family::cauchy: return "cauchy";
    case ac_family::uniform: return "uniform";
    case ac_family::jacobi: return "jacobi";
    case ac_family::table: return "table";
  }
  return "?";
}

double ac_component::density_at(double t) const {
  if (family == ac_family::cauchy)
    return mass * scale / (pi * ((t - location) * (t - location) + scale * scale));
  if (t < a || t > b) return 0.0;
  switch (family) {
    case ac_family::semicircle: {
      double s = std::sqrt(variance);
      double z = (t - center) / s;
      return mass * std::sqrt(std::max(0.0, 4.0 - z * z)) / (2.0 * pi * s);
    }
    case ac_family::arcsine: {
      double r = (t - a) * (b - t);
      if (r <= 0.0) return 0.0;
      return mass / (pi * std::sqrt(r));
    }
    case ac_family::marchenko_pastur: {
      double lm = (1.0 - std::sqrt(lambda)) * (1.0 - std::sqrt(lambda));
      double lp = (1.0 + std::sqrt(lambda)) * (1.0 + std::sqrt(lambda));
      double r = (lp - t) * (t - lm);
      if (r <= 0.0 || t <= 0.0) return 0.0;
      double unit = std::min(1.0, 1.0 / lambda);
      return (mass / unit) * std::sqrt(r) / (2.0 * pi * lambda * t);
    }
    case ac_family::uniform:
      return mass / (b - a);
    case ac_family::jacobi:
      return normalizer * std::pow(t - a, alpha) * std::pow(b - t, beta);
    case ac_family::table: {
      auto it = std::upper_bound(nodes.begin(), nodes.end(), t);
      if (it == nodes.begin() || it == nodes.end()) {
        if (it == nodes.end() && t == nodes.back()) return weights.back();
        return (it == nodes.begin() && t == nodes.front()) ? weights.front() : 0.0;
      }
      size_t i = it - nodes.begin() - 1;
      double u = (t - nodes[i]) / (nodes[i + 1] - nodes[i]);
      return weights[i] + u * (weights[i + 1] - weights[i]);
    }
    case ac_family::cauchy: break;
  }
  return 0.0;
}

double ac_component::cdf_local(double t) const {
  if (family == ac_family::cauchy)
    return mass * (0.5 + std::atan((t - location) / scale) / pi);
  if (t <= a) return 0.0;
  if (t >= b) return mass;
  switch (family) {
    case ac_family::semicircle: {
      double s = std::sqrt(variance);
      double z = (t - center) / s;
      return mass * semicircle_primitive(z) / (2.0 * pi);
    }
    case ac_family::arcsine:
      return mass * (2.0 / pi) * std::asin(std::sqrt((t - a) / (b - a)));
    case ac_family::uniform:
      return mass * (t - a) / (b - a);
    case ac_family::jacobi: {
      if (beta == 0.0)
        return normalizer * std::pow(t - a, alpha + 1.0) / (alpha + 1.0);
      if (alpha == 0.0)
        return mass - normalizer * std::pow(b - t, beta + 1.0) / (beta + 1.0);
      if (alpha == 0.5 && beta == 0.5) {
        double r = 0.5 * (b - a);
        double u = std::clamp((t - 0.5 * (a + b)) / r, -1.0, 1.0);
        double prim = std::asin(u) + u * std::sqrt(std::max(0.0, 1.0 - u * u)) + 0.5 * pi;
        return normalizer * r * r * 0.5 * prim;
      }
      break; // generic jacobi: interpolated table below
    }
    case ac_family::table: {
      auto it = std::upper_bound(nodes.begin(), nodes.end(), t);
      size_t i = (it - nodes.begin() == 0) ? 0 : it - nodes.begin() - 1;
      if (i >= nodes.size() - 1) i = nodes.size() - 2;
      double acc = 0.0;
      for (size_t k = 0; k < i; ++k)
        acc += 0.5 * (weights[k] + weights[k + 1]) * (nodes[k + 1] - nodes[k]);
      double dx = t - nodes[i];
      double seg = nodes[i + 1] - nodes[i];
      double wt = weights[i] + (weights[i + 1] - weights[i]) * dx / seg;
      acc += 0.5 * (weights[i] + wt) * dx;
      return acc;
    }
    default: break;
  }
  // Interpolate the cached cumulative (marchenko_pastur, generic jacobi).
  auto it = std::upper_bound(cdf_x.begin(), cdf_x.end(), t);
  if (it == cdf_x.begin()) return 0.0;
  if (it == cdf_x.end()) return mass;
  size_t i = it - cdf_x.begin() - 1;
  double u = (t - cdf_x[i]) / (cdf_x[i + 1] - cdf_x[i]);
  return cdf_y[i] + u * (cdf_y[i + 1] - cdf_y[i]);
}

bool ac_component::has_closed_form_g() const {
  switch (family) {
    case ac_family::semicircle:
    case ac_family::arcsine:
    case ac_family::marchenko_pastur:
    case ac_family::cauchy:
    case ac_family::uniform:
      return true;
    default:
      return false;
  }
}

// ---- support_set ----

double support_set::distance(double x) const {
  double best = inf;
  if (domain == domain_kind::circle) {
    double xa = wrap_angle(x);
    for (const auto& iv : intervals) {
      // Arc (start, end) with end possibly > 2*pi.
      double rel = xa - iv[0];
      if (rel < 0.0) rel += two_pi;
      if (rel <= iv[1] - iv[0]) return 0.0;
      double d1 = std::min(rel - (iv[1] - iv[0]), two_pi - rel);
      best = std::min(best, d1);
    }
    for (double p : isolated_points) {
      double d = std::abs(xa - wrap_angle(p));
      best = std::min(best, std::min(d, two_pi - d));
    }
    return best;
  }
  for (const auto& iv : intervals) {
    if (x >= iv[0] && x <= iv[1]) return 0.0;
    best = std::min(best, x < iv[0] ? iv[0] - x : x - iv[1]);
  }
  for (double p : isolated_points) best = std::min(best, std::abs(x - p));
  return best;
}

double support_set::min() const {
  double m = inf;
  for (const auto& iv : intervals) m = std::min(m, iv[0]);
  for (double p : isolated_points) m = std::min(m, p);
  return m;
}

double support_set::max() const {
  double m = -inf;
  for (const auto& iv : intervals) m = std::max(m, iv[1]);
  for (double p : isolated_points) m = std::max(m, p);
  return m;
}

bool support_set::is_full_circle() const {
  return domain == domain_kind::circle && intervals.size() == 1 &&
         intervals[0][1] - intervals[0][0] >= two_pi - 1e-9;
}

// ---- measure queries ----

bool measure::is_point_mass() const { return atoms.size() == 1 && ac.empty(); }

bool measure::is_two_atom() const { return atoms.size() == 2 && ac.empty(); }

bool measure::is_haar() const {
  return domain == domain_kind::circle && atoms.empty() && ac.size() == 1 &&
         ac[0].family == ac_family::uniform && ac[0].b - ac[0].a >= two_pi - 1e-12 &&
         std::abs(ac[0].mass - 1.0) < 1e-9;
}

bool measure::compact() const {
  for (const auto& c : ac)
    if (c.family == ac_family::cauchy) return false;
  return true;
}

double measure::total_mass() const {
  double t = 0.0;
  for (const auto& at : atoms) t += at.mass;
  for (const auto& c : ac) t += c.mass;
  return t;
}

double measure::cdf(double t) const {
  double f = 0.0;
  for (const auto& at : atoms)
    if (at.position <= t) f += at.mass;
  for (const auto& c : ac) f += c.cdf_local(t);
  return f;
}

double measure::mean() const {
  double m = 0.0;
  for (const auto& at : atoms) m += at.mass * at.position;
  for (const auto& c : ac)
    for (size_t i = 0; i < c.quad_x.size(); ++i) m += c.quad_w[i] * c.quad_x[i];
  return m;
}

double measure::variance() const {
  double mu = mean(), v = 0.0;
  for (const auto& at : atoms) v += at.mass * (at.position - mu) * (at.position - mu);
  for (const auto& c : ac)
    for (size_t i = 0; i < c.quad_x.size(); ++i)
      v += c.quad_w[i] * (c.quad_x[i] - mu) * (c.quad_x[i] - mu);
  return v;
}

double measure::density_at(double t) const {
  double d = 0.0;
  for (const auto& c : ac) d += c.density_at(t);
  return d;
}

// ---- validation ----

namespace {

void build_quadrature(ac_component& c, int n, domain_kind dom) {
  c.quad_x.clear();
  c.quad_w.clear();
  if (c.family == ac_family::cauchy) return; // closed forms only

  if (dom == domain_kind::circle) {
    // Trapezoid in the angle over the arc (midpoint lattice on a full circle).
    int k = std::max(8, n);
    bool full = c.b - c.a >= two_pi - 1e-12;
    c.quad_x.reserve(k);
    c.quad_w.reserve(k);
    if (full) {
      double dtheta = (c.b - c.a) / k;
      for (int i = 0; i < k; ++i) {
        double th = c.a + (i + 0.5) * dtheta;
        c.quad_x.push_back(wrap_angle(th));
        c.quad_w.push_back(c.density_at(th) * dtheta);
      }
    } else {
      double dtheta = (c.b - c.a) / (k - 1);
      for (int i = 0; i < k; ++i) {
        double th = c.a + i * dtheta;
        double w = c.density_at(th) * dtheta * ((i == 0 || i == k - 1) ? 0.5 : 1.0);
        c.quad_x.push_back(wrap_angle(th));
        c.quad_w.push_back(w);
      }
    }
    // Renormalize the trapezoid mass defect onto the weights.
    double s = 0.0;
    for (double w : c.quad_w) s += w;
    if (s > 0.0)
      for (double& w : c.quad_w) w *= c.mass / s;
    return;
  }

  switch (c.family) {
    case ac_family::uniform: {
      const auto& gl = gauss_legendre(n);
      double mid = 0.5 * (c.a + c.b), half = 0.5 * (c.b - c.a);
      for (int i = 0; i < n; ++i) {
        c.quad_x.push_back(mid + half * gl.nodes[i]);
        c.quad_w.push_back(gl.weights[i] * half * c.mass / (c.b - c.a));
      }
      break;
    }
    case ac_family::table: {
      int segs = static_cast<int>(c.nodes.size()) - 1;
      double total = c.b - c.a;
      for (int s = 0; s < segs; ++s) {
        double len = c.nodes[s + 1] - c.nodes[s];
        int k = std::clamp(static_cast<int>(std::lround(n * len / total)), 2, 24);
        const auto& gl = gauss_legendre(k);
        double mid = 0.5 * (c.nodes[s] + c.nodes[s + 1]), half = 0.5 * len;
        for (int i = 0; i < k; ++i) {
          double t = mid + half * gl.nodes[i];
          c.quad_x.push_back(t);
          c.quad_w.push_back(gl.weights[i] * half * c.density_at(t));
        }
      }
      break;
    }
    default: {
      // Edge-regularizing substitution t = mid - half*cos(pi*s), s in [0,1].
      const auto& gl = gauss_legendre(n);
      double mid = 0.5 * (c.a + c.b), half = 0.5 * (c.b - c.a);
      for (int i = 0; i < n; ++i) {
        double s = 0.5 * (gl.nodes[i] + 1.0);
        double t = mid - half * std::cos(pi * s);
        double jac = half * pi * std::sin(pi * s);
        c.quad_x.push_back(t);
        c.quad_w.push_back(0.5 * gl.weights[i] * jac * c.density_at(t));
      }
      break;
    }
  }
  double s = 0.0;
  for (double w : c.quad_w) s += w;
  if (s > 0.0)
    for (double& w : c.quad_w) w *= c.mass / s;
}

void build_cdf_cache(ac_component& c) {
  bool needs = c.family == ac_family::marchenko_pastur ||
               (c.family == ac_family::jacobi &&
                !(c.beta == 0.0 || c.alpha == 0.0 || (c.alpha == 0.5 && c.beta == 0.5)));
  if (!needs) return;
  const int cells = 1024;
  const auto& gl = gauss_legendre(8);
  c.cdf_x.resize(cells + 1);
  c.cdf_y.resize(cells + 1);
  double mid = 0.5 * (c.a + c.b), half = 0.5 * (c.b - c.a);
  for (int i = 0; i <= cells; ++i)
    c.cdf_x[i] = mid - half * std::cos(pi * i / cells);
  c.cdf_y[0] = 0.0;
  for (int i = 0; i < cells; ++i) {
    double lo = c.cdf_x[i], hi = c.cdf_x[i + 1];
    double cm = 0.5 * (lo + hi), ch = 0.5 * (hi - lo);
    double acc = 0.0;
    for (int k = 0; k < 8; ++k) acc += gl.weights[k] * c.density_at(cm + ch * gl.nodes[k]);
    c.cdf_y[i + 1] = c.cdf_y[i] + acc * ch;
  }
  // Pin the total to the declared mass.
  double total = c.cdf_y[cells];
  if (total > 0.0)
    for (double& y : c.cdf_y) y *= c.mass / total;
}

support_set compute_support(const measure& m) {
  support_set s;
  s.domain = m.domain;
  std::vector<std::array<double, 2>> ivs;
  for (const auto& c : m.ac) {
    if (c.family == ac_family::cauchy)
      ivs.push_back({-inf, inf});
    else
      ivs.push_back({c.a, c.b});
  }

  if (m.domain == domain_kind::circle) {
    double covered = 0.0;
    for (auto& iv : ivs) covered += iv[1] - iv[0];
    if (covered >= two_pi - merge_tol) {
      s.intervals.push_back({0.0, two_pi});
      return s;
    }
    std::sort(ivs.begin(), ivs.end());
    std::vector<std::array<double, 2>> merged;
    for (auto& iv : ivs) {
      if (!merged.empty() && iv[0] <= merged.back()[1] + merge_tol)
        merged.back()[1] = std::max(merged.back()[1], iv[1]);
      else
        merged.push_back(iv);
    }
    // Wrap merge: last arc reaching around to the first.
    if (merged.size() > 1 && merged.back()[1] >= merged.front()[0] + two_pi - merge_tol) {
      merged.front()[0] = merged.back()[0] - two_pi;
      merged.pop_back();
    }
    for (const auto& at : m.atoms) {
      bool inside = false;
      for (auto& iv : merged) {
        double rel = wrap_angle(at.position) - wrap_angle(iv[0]);
        if (rel < 0.0) rel += two_pi;
        if (rel <= iv[1] - iv[0] + merge_tol) {
          inside = true;
          break;
        }
      }
      if (!inside) s.isolated_points.push_back(wrap_angle(at.position));
    }
    for (auto& iv : merged) {
      double a0 = wrap_angle(iv[0]);
      s.intervals.push_back({a0, a0 + (iv[1] - iv[0])});
    }
    std::sort(s.intervals.begin(), s.intervals.end());
    std::sort(s.isolated_points.begin(), s.isolated_points.end());
    return s;
  }

  std::sort(ivs.begin(), ivs.end());
  std::vector<std::array<double, 2>> merged;
  for (auto& iv : ivs) {
    if (!merged.empty() && iv[0] <= merged.back()[1] + merge_tol)
      merged.back()[1] = std::max(merged.back()[1], iv[1]);
    else
      merged.push_back(iv);
  }
  for (const auto& at : m.atoms) {
    bool inside = false;
    for (auto& iv : merged)
      if (at.position >= iv[0] - merge_tol && at.position <= iv[1] + merge_tol) {
        inside = true;
        iv[0] = std::min(iv[0], at.position);
        iv[1] = std::max(iv[1], at.position);
        break;
      }
    if (!inside) s.isolated_points.push_back(at.position);
  }
  s.intervals = std::move(merged);
  std::sort(s.intervals.begin(), s.intervals.end());
  std::sort(s.isolated_points.begin(), s.isolated_points.end());
  return s;
}

} // namespace

measure validate(measure m, int quad_nodes) {
  if (quad_nodes < 8) quad_nodes = 8;

  for (auto& c : m.ac) {
    switch (c.family) {
      case ac_family::semicircle: {
        if (c.variance <= 0.0) fail(errc::domain_violation, "semicircle variance must be > 0");
        double s = std::sqrt(c.variance);
        c.a = c.center - 2.0 * s;
        c.b = c.center + 2.0 * s;
        break;
      }
      case ac_family::marchenko_pastur: {
        if (c.lambda <= 0.0) fail(errc::domain_violation, "marchenko_pastur lambda must be > 0");
        double r = std::sqrt(c.lambda);
        c.a = (1.0 - r) * (1.0 - r);
        c.b = (1.0 + r) * (1.0 + r);
        break;
      }
      case ac_family::cauchy: {
        if (c.scale <= 0.0) fail(errc::domain_violation, "cauchy scale must be > 0");
        if (m.domain != domain_kind::real_line || m.ac.size() != 1 || !m.atoms.empty())
          fail(errc::domain_violation, "cauchy is allowed only as a full measure on the real line");
        c.a = -inf;
        c.b = inf;
        break;
      }
      case ac_family::jacobi: {
        if (c.alpha <= -1.0 || c.beta <= -1.0)
          fail(errc::domain_violation, "jacobi exponents must be > -1");
        if (c.normalizer < 0.0) fail(errc::negative_mass, "jacobi normalizer must be >= 0");
        double computed = c.normalizer * std::pow(c.b - c.a, c.alpha + c.beta + 1.0) *
                          beta_integral(c.alpha + 1.0, c.beta + 1.0);
        // Keep a consistent caller-provided mass bit-exact; distribution
        // plateaus must match the approximated measure to the last bit or
        // generalized inverses flip across gaps.
        if (!(c.mass > 0.0) || std::abs(computed - c.mass) > 1e-9 * std::abs(computed))
          c.mass = computed;
        break;
      }
      case ac_family::table: {
        if (c.nodes.size() < 2 || c.nodes.size() != c.weights.size())
          fail(errc::domain_violation, "table needs >= 2 nodes with matching weights");
        for (size_t i = 0; i + 1 < c.nodes.size(); ++i)
          if (!(c.nodes[i] < c.nodes[i + 1]))
            fail(errc::domain_violation, "table nodes must be strictly increasing");
        for (double w : c.weights)
          if (w < 0.0) fail(errc::negative_mass, "table weights must be >= 0");
        c.a = c.nodes.front();
        c.b = c.nodes.back();
        double computed = 0.0;
        for (size_t i = 0; i + 1 < c.nodes.size(); ++i)
          computed += 0.5 * (c.weights[i] + c.weights[i + 1]) * (c.nodes[i + 1] - c.nodes[i]);
        if (!(c.mass > 0.0) || std::abs(computed - c.mass) > 1e-9 * std::abs(computed))
          c.mass = computed;
        break;
      }
      case ac_family::uniform:
      case ac_family::arcsine:
        break;
    }
    if (!(c.a < c.b)) fail(errc::domain_violation, "ac component needs a < b");
    if (!(c.mass > 0.0)) fail(errc::negative_mass, "ac component mass must be > 0");
  }

  for (const auto& at : m.atoms)
    if (!(at.mass > 0.0)) fail(errc::negative_mass, "atom mass must be > 0");

  switch (m.domain) {
    case domain_kind::half_line:
      for (const auto& at : m.atoms)
        if (at.position < 0.0) fail(errc::domain_violation, "half-line atom position must be >= 0");
      for (const auto& c : m.ac)
        if (c.a < -1e-12) fail(errc::domain_violation, "half-line ac interval must be >= 0");
      break;
    case domain_kind::circle:
      for (const auto& at : m.atoms)
        if (at.position < 0.0 || at.position >= two_pi)
          fail(errc::domain_violation, "circle atom angle must be in [0, 2*pi)");
      for (const auto& c : m.ac) {
        if (c.family != ac_family::uniform && c.family != ac_family::table)
          fail(errc::domain_violation, "circle ac components must be uniform or table arcs");
        if (c.a < 0.0 || c.a >= two_pi || c.b - c.a > two_pi + 1e-12)
          fail(errc::domain_violation, "circle arc must start in [0, 2*pi) and span <= 2*pi");
      }
      break;
    case domain_kind::real_line:
      break;
  }

  std::sort(m.atoms.begin(), m.atoms.end(),
            [](const atom& x, const atom& y) { return x.position < y.position; });
  for (size_t i = 0; i + 1 < m.atoms.size(); ++i)
    if (m.atoms[i + 1].position - m.atoms[i].position < merge_tol)
      fail(errc::domain_violation, "atom positions must be pairwise distinct");

  std::sort(m.ac.begin(), m.ac.end(),
            [](const ac_component& x, const ac_component& y) { return x.a < y.a; });
  for (size_t i = 0; i + 1 < m.ac.size(); ++i)
    if (m.ac[i + 1].a < m.ac[i].b - merge_tol)
      fail(errc::domain_violation, "ac component intervals must be pairwise disjoint");

  double total = m.total_mass();
  if (std::abs(total - 1.0) > 1e-6)
    fail(errc::mass_not_one, "total mass is " + std::to_string(total));
  double rescale = 1.0 / total;
  if (rescale != 1.0) {
    for (auto& at : m.atoms) at.mass *= rescale;
    for (auto& c : m.ac) {
      c.mass *= rescale;
      if (c.family == ac_family::jacobi) c.normalizer *= rescale;
      if (c.family == ac_family::table)
        for (double& w : c.weights) w *= rescale;
    }
  }

  for (auto& c : m.ac) {
    build_cdf_cache(c);
    build_quadrature(c, quad_nodes, m.domain);
  }

  m.quad_nodes_ = quad_nodes;
  m.support_ = compute_support(m);
  m.validated_ = true;
  return m;
}

// ---- quantiles ----

double quantile(const measure& m, double s) {
  if (!(s > 0.0 && s < 1.0)) fail(errc::domain_violation, "quantile needs s in (0,1)");
  if (m.domain == domain_kind::circle)
    fail(errc::domain_violation, "quantile is not defined for circle measures");

  if (m.ac.size() == 1 && m.ac[0].family == ac_family::cauchy && m.atoms.empty())
    return m.ac[0].location + m.ac[0].scale * std::tan(pi * (s - 0.5));

  if (m.ac.empty()) {
    double acc = 0.0;
    for (const auto& at : m.atoms) {
      acc += at.mass;
      if (acc > s) return at.position;
    }
    return m.atoms.back().position;
  }

  double lo = m.support_min() - 1.0;
  double hi = m.support_max();
  // Invariant: cdf(hi) > s >= cdf(lo); converges to inf{t : F(t) > s}.
  for (int it = 0; it < 120; ++it) {
    double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    if (m.cdf(mid) > s)
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

double circle_quantile(const measure& m, double s) {
  if (!(s > 0.0 && s < 1.0)) fail(errc::domain_violation, "quantile needs s in (0,1)");
  if (m.domain != domain_kind::circle) fail(errc::domain_violation, "circle measure required");
  double lo = 0.0, hi = two_pi;
  for (int it = 0; it < 120; ++it) {
    double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    if (m.cdf(mid) > s)
      hi = mid;
    else
      lo = mid;
  }
  return wrap_angle(hi);
}

support_set support_components(const measure& m) { return m.support(); }

// ---- Jacobi-type approximation ----

namespace {

double dist_to_grid(double x, double h) { return std::abs(x - h * std::round(x / h)); }

} // namespace

measure jacobi_approximate(const measure& m, double eps, double* grid_step_out) {
  if (!(eps > 0.0)) fail(errc::domain_violation, "eps must be > 0");
  if (m.domain == domain_kind::circle) fail(errc::domain_violation, "real-line measure required");
  if (!m.compact()) fail(errc::unbounded_support, "measure must be compactly supported");

  const support_set supp = m.support();
  struct comp {
    double lo, hi; // component hull
  };
  std::vector<comp> comps;
  for (const auto& iv : supp.intervals) comps.push_back({iv[0], iv[1]});
  for (double p : supp.isolated_points) comps.push_back({p, p});
  std::sort(comps.begin(), comps.end(), [](const comp& x, const comp& y) { return x.lo < y.lo; });
  const int n = static_cast<int>(comps.size());
  if (n == 0) fail(errc::domain_violation, "empty support");

  // Grid step below eps. Component edges may either sit exactly on the
  // grid (they become knots, or window endpoints for atom components) or
  // stay well clear of it; ambiguous near-collisions are nudged away.
  auto on_grid = [](double e, double hh) { return dist_to_grid(e, hh) <= 1e-9 * hh; };
  double h = 0.75 * eps;
  for (int attempt = 0; attempt < 400; ++attempt) {
    double cand = 0.75 * eps / (1.0 + attempt * 0.00379);
    bool ok = true;
    for (const auto& c : comps) {
      for (double e : {c.lo, c.hi}) {
        double d = dist_to_grid(e, cand);
        if (d > 1e-9 * cand && d < 1e-6 * cand) ok = false;
      }
    }
    if (ok) {
      h = cand;
      break;
    }
  }
  if (grid_step_out) *grid_step_out = h;

  const double big = 1e3 * (std::abs(supp.max()) + std::abs(supp.min()) + 1.0);
  measure nu;
  nu.domain = m.domain;

  for (int j = 0; j < n; ++j) {
    double gap_l = (j == 0) ? big : comps[j].lo - comps[j - 1].hi;
    double gap_r = (j == n - 1) ? big : comps[j + 1].lo - comps[j].hi;
    double a, b;
    if (comps[j].hi - comps[j].lo < merge_tol) {
      double p = comps[j].lo;
      if (on_grid(p, h)) {
        // The atom sits on the grid: make it the right endpoint, so the
        // window carries exactly the jump F(p) - F(p-).
        double L = std::min({eps / 2.0, 0.9 * h, 0.8 * gap_l});
        a = p - L;
        b = p;
      } else {
        // Widen to an interval inside the atom's grid cell.
        double k = std::floor(p / h);
        double margin = 1e-6 * h;
        double lo_bound = std::max(k * h + margin, p - gap_l / 3.0);
        double hi_bound = std::min((k + 1.0) * h - margin, p + gap_r / 3.0);
        double L = std::min({eps / 2.0, 0.9 * h, 0.95 * (hi_bound - lo_bound)});
        if (L <= 0.0) L = 0.5 * (hi_bound - lo_bound);
        double alo = std::max(lo_bound, p - L);
        double ahi = std::min(hi_bound - L, p);
        a = std::clamp(p - 0.5 * L, alo, std::max(alo, ahi));
        b = a + L;
      }
    } else {
      double dl = std::min(0.25 * h, gap_l / 3.0);
      double dr = std::min(0.25 * h, gap_r / 3.0);
      if (!on_grid(comps[j].lo, h)) dl = std::min(dl, 0.5 * dist_to_grid(comps[j].lo, h));
      if (!on_grid(comps[j].hi, h)) dr = std::min(dr, 0.5 * dist_to_grid(comps[j].hi, h));
      a = comps[j].lo - dl;
      b = comps[j].hi + dr;
    }

    double vL = m.cdf(a), vR = m.cdf(b);
    // Interior grid points (knots); none for atom components by construction.
    std::vector<double> knots;
    for (double k = std::floor(a / h) + 1.0; k * h < b; k += 1.0)
      if (k * h > a) knots.push_back(k * h);

    if (knots.empty()) {
      ac_component c;
      c.family = ac_family::jacobi;
      c.a = a;
      c.b = b;
      c.alpha = 0.5;
      c.beta = 0.5;
      c.normalizer = 8.0 * (vR - vL) / (pi * (b - a) * (b - a));
      c.mass = vR - vL;
      nu.ac.push_back(c);
      continue;
    }

    const int mk = static_cast<int>(knots.size());
    std::vector<double> v(mk);
    for (int i = 0; i < mk; ++i) v[i] = m.cdf(knots[i]);

    // Cell masses and average densities; cell 0 and cell mk are the edges.
    std::vector<double> cell_lo{a}, cell_hi, dmass, avg;
    for (int i = 0; i < mk; ++i) {
      cell_hi.push_back(knots[i]);
      cell_lo.push_back(knots[i]);
    }
    cell_hi.push_back(b);
    std::vector<double> vals{vL};
    for (double x : v) vals.push_back(x);
    vals.push_back(vR);
    for (int i = 0; i <= mk; ++i) {
      double dm = std::max(0.0, vals[i + 1] - vals[i]);
      dmass.push_back(dm);
      avg.push_back(dm / (cell_hi[i] - cell_lo[i]));
    }

    // Left edge: density ~ sqrt(t - a), exact mass.
    {
      double w = cell_hi[0] - cell_lo[0];
      ac_component c;
      c.family = ac_family::jacobi;
      c.a = a;
      c.b = cell_hi[0];
      c.alpha = 0.5;
      c.beta = 0.0;
      c.normalizer = 1.5 * dmass[0] / std::pow(w, 1.5);
      c.mass = dmass[0];
      if (dmass[0] > 0.0) nu.ac.push_back(c);
    }
    // Middle cells: two-segment linear density with exact mass.
    for (int i = 1; i < mk; ++i) {
      double len = cell_hi[i] - cell_lo[i];
      double rho_lo = std::min(avg[i - 1], avg[i]);
      double rho_hi = std::min(avg[i], avg[i + 1]);
      double mid_d = std::max(0.0, 0.5 * (4.0 * dmass[i] / len - rho_lo - rho_hi));
      ac_component c;
      c.family = ac_family::table;
      c.nodes = {cell_lo[i], 0.5 * (cell_lo[i] + cell_hi[i]), cell_hi[i]};
      c.weights = {rho_lo, mid_d, rho_hi};
      c.mass = dmass[i];
      if (dmass[i] > 0.0) nu.ac.push_back(c);
    }
    // Right edge: density ~ sqrt(b - t).
    {
      double w = cell_hi[mk] - cell_lo[mk];
      ac_component c;
      c.family = ac_family::jacobi;
      c.a = cell_lo[mk];
      c.b = b;
      c.alpha = 0.0;
      c.beta = 0.5;
      c.normalizer = 1.5 * dmass[mk] / std::pow(w, 1.5);
      c.mass = dmass[mk];
      if (dmass[mk] > 0.0) nu.ac.push_back(c);
    }
  }

  return validate(std::move(nu), m.quad_nodes());
}

// ---- builders ----

measure make_atomic(domain_kind d, std::vector<atom> atoms) {
  measure m;
  m.domain = d;
  m.atoms = std::move(atoms);
  return validate(std::move(m));
}

measure make_semicircle(double center, double variance) {
  measure m;
  ac_component c;
  c.family = ac_family::semicircle;
  c.center = center;
  c.variance = variance;
  m.ac.push_back(c);
  return validate(std::move(m));
}

measure make_arcsine(double a, double b) {
  measure m;
  ac_component c;
  c.family = ac_family::arcsine;
  c.a = a;
  c.b = b;
  m.ac.push_back(c);
  return validate(std::move(m));
}

measure make_cauchy(double location, double scale) {
  measure m;
  ac_component c;
  c.family = ac_family::cauchy;
  c.location = location;
  c.scale = scale;
  m.ac.push_back(c);
  return validate(std::move(m));
}

measure make_uniform(double a, double b, double mass) {
  measure m;
  ac_component c;
  c.family = ac_family::uniform;
  c.a = a;
  c.b = b;
  c.mass = mass;
  m.ac.push_back(c);
  if (mass != 1.0) {
    // Caller is expected to add atoms; leave unvalidated pieces to them.
    return m;
  }
  return validate(std::move(m));
}

measure make_marchenko_pastur(double lambda) {
  measure m;
  ac_component c;
  c.family = ac_family::marchenko_pastur;
  c.lambda = lambda;
  c.mass = std::min(1.0, 1.0 / lambda);
  m.ac.push_back(c);
  if (lambda > 1.0) {
    atom at;
    at.position = 0.0;
    at.mass = 1.0 - 1.0 / lambda;
    m.atoms.push_back(at);
    m.domain = domain_kind::half_line;
  }
  return validate(std::move(m));
}

measure make_haar() {
  measure m;
  m.domain = domain_kind::circle;
  ac_component c;
  c.family = ac_family::uniform;
  c.a = 0.0;
  c.b = two_pi;
  c.mass = 1.0;
  m.ac.push_back(c);
  return validate(std::move(m));
}

} // namespace freeconv
