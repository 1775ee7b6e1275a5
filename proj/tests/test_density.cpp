#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "freeconv/density.hpp"
#include "freeconv/support.hpp"
#include "helpers.hpp"

using namespace freeconv;

namespace {

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> g(n);
  for (int i = 0; i < n; ++i) g[i] = lo + (hi - lo) * i / (n - 1.0);
  return g;
}

// Chebyshev-type grid clustering at both edges; accurate trapezoid mass for
// square-root edge densities.
std::vector<double> cos_grid(double lo, double hi, int n) {
  std::vector<double> g(n);
  for (int i = 0; i < n; ++i)
    g[i] = 0.5 * (lo + hi) - 0.5 * (hi - lo) * std::cos(pi * i / (n - 1.0));
  return g;
}

} // namespace

TEST_CASE("bernoulli pair reproduces the arcsine density") {
  measure b = fct::bernoulli();
  density_grid d = density_additive(b, b, linspace(-1.8, 1.8, 19));
  for (size_t i = 0; i < d.points.size(); ++i) {
    double x = d.points[i];
    double expect = 1.0 / (pi * std::sqrt(4.0 - x * x));
    CHECK(d.values[i] == doctest::Approx(expect).epsilon(1e-6));
    CHECK(d.flags[i] == density_flag::ok);
  }
}

TEST_CASE("semicircle pair density at zero") {
  measure s = make_semicircle(0.0, 1.0);
  density_grid d = density_additive(s, s, {0.0});
  CHECK(d.values[0] == doctest::Approx(1.0 / (pi * std::sqrt(2.0))).epsilon(1e-8));
}

TEST_CASE("cauchy pair density is cauchy of double scale") {
  measure c = make_cauchy(0.0, 1.0);
  density_grid d = density_additive(c, c, {0.0, 1.0, -2.0});
  CHECK(d.values[0] == doctest::Approx(1.0 / (2.0 * pi)).epsilon(1e-9));
  CHECK(d.values[1] == doctest::Approx(2.0 / (pi * 5.0)).epsilon(1e-9));
  CHECK(d.values[2] == doctest::Approx(2.0 / (pi * 8.0)).epsilon(1e-9));
}

TEST_CASE("density vanishes on reported gaps") {
  measure b = fct::bernoulli();
  density_grid d = density_additive(b, b, {-2.5, 2.5, 3.5});
  for (double v : d.values) CHECK(v < 1e-3);
}

TEST_CASE("point-mass shift reduces to the other density") {
  measure s = make_semicircle(0.0, 1.0);
  measure dd = make_atomic(domain_kind::real_line, {{2.0, 1.0}});
  density_grid d = density_additive(s, dd, {2.0});
  CHECK(d.values[0] == doctest::Approx(1.0 / pi).epsilon(1e-6));
}

TEST_CASE("normalization of the additive density") {
  measure m1 = fct::random_connected(61);
  measure m2 = fct::random_connected(62);
  support_result r = support_additive(m1, m2);
  double lo = r.support.min(), hi = r.support.max();
  density_grid d = density_additive(m1, m2, cos_grid(lo, hi, 801));
  CHECK(d.integral() == doctest::Approx(1.0).epsilon(5e-3));
}

TEST_CASE("free projection density and unlocated mass") {
  measure p = fct::free_projection();
  density_grid at_half = density_mult_halfline(p, p, {0.5});
  CHECK(at_half.values[0] == doctest::Approx(1.0 / pi).epsilon(1e-6));

  density_grid d = density_mult_halfline(p, p, cos_grid(1e-6, 1.0 - 1e-6, 2001));
  CHECK(d.unlocated_mass() == doctest::Approx(0.5).epsilon(2e-3));
}

TEST_CASE("multiplicative identity with a unit point mass") {
  measure m = fct::two_atoms_13();
  measure one = make_atomic(domain_kind::half_line, {{1.0, 1.0}});
  density_grid d = density_mult_halfline(m, one, {0.5, 2.0});
  // atoms only: the absolutely continuous part is zero
  CHECK(d.values[0] == doctest::Approx(0.0));
  CHECK(d.values[1] == doctest::Approx(0.0));
}

TEST_CASE("two-atom half-line pair integrates to one") {
  measure m = fct::two_atoms_13();
  support_result r = support_mult_halfline(m, m);
  double lo = r.support.intervals[0][0], hi = r.support.intervals[0][1];
  density_grid d = density_mult_halfline(m, m, cos_grid(lo, hi, 601));
  CHECK(d.integral() + 0.0 == doctest::Approx(1.0).epsilon(5e-3));
}

TEST_CASE("circle densities") {
  measure haar = make_haar();
  measure c = fct::circle_two_atoms(0.7);
  density_grid dh = density_mult_circle(haar, c, linspace(0.0, two_pi, 17));
  for (double v : dh.values) CHECK(v == doctest::Approx(1.0));

  measure pm = fct::circle_pm_one();
  density_grid db = density_mult_circle(pm, pm, linspace(0.0, two_pi, 33));
  for (double v : db.values) CHECK(v == doctest::Approx(1.0).epsilon(1e-3));

  // conjugation-symmetric inputs give a density even in theta
  density_grid ds = density_mult_circle(c, c, linspace(0.1, 1.5, 8));
  density_grid ds2 = density_mult_circle(c, c, {two_pi - 0.1, two_pi - 0.3});
  density_grid ds3 = density_mult_circle(c, c, {0.1, 0.3});
  CHECK(ds2.values[0] == doctest::Approx(ds3.values[0]).epsilon(1e-6));
  CHECK(ds2.values[1] == doctest::Approx(ds3.values[1]).epsilon(1e-6));
  (void)ds;
}

TEST_CASE("epsilon robustness at interior points") {
  measure b = fct::bernoulli();
  subordination_config cfg;
  density_grid d1 = density_additive(b, b, {0.3, -0.7}, cfg);
  subordination_config finer = cfg;
  finer.eps_steps = cfg.eps_steps + 1; // halves the final eps
  density_grid d2 = density_additive(b, b, {0.3, -0.7}, finer);
  CHECK(std::abs(d1.values[0] - d2.values[0]) < 1e-3);
  CHECK(std::abs(d1.values[1] - d2.values[1]) < 1e-3);
}
