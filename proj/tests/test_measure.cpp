#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "freeconv/measure.hpp"
#include "helpers.hpp"

using namespace freeconv;

TEST_CASE("validate keeps a unit point mass unchanged") {
  measure m = make_atomic(domain_kind::real_line, {{0.0, 1.0}});
  CHECK(m.is_point_mass());
  CHECK(m.atoms[0].position == 0.0);
  CHECK(m.atoms[0].mass == doctest::Approx(1.0));
}

TEST_CASE("validate sorts atoms") {
  measure m = make_atomic(domain_kind::real_line, {{1.0, 0.5}, {-1.0, 0.5}});
  CHECK(m.atoms[0].position == -1.0);
  CHECK(m.atoms[1].position == 1.0);
}

TEST_CASE("validate rejects mass far from one") {
  measure m;
  m.atoms.push_back({0.0, 0.7});
  CHECK_THROWS_WITH_AS(validate(std::move(m)), doctest::Contains("MassNotOne"), error);
}

TEST_CASE("validate rescales near-one mass") {
  measure m;
  m.atoms.push_back({0.0, 0.5 + 2e-7});
  m.atoms.push_back({1.0, 0.5});
  measure v = validate(std::move(m));
  CHECK(v.total_mass() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("validate domain violations") {
  measure m;
  m.domain = domain_kind::half_line;
  m.atoms.push_back({-1.0, 1.0});
  CHECK_THROWS_AS(validate(std::move(m)), error);

  measure c;
  c.domain = domain_kind::circle;
  c.atoms.push_back({7.0, 1.0}); // angle outside [0, 2*pi)
  CHECK_THROWS_AS(validate(std::move(c)), error);

  measure dup;
  dup.atoms.push_back({0.0, 0.5});
  dup.atoms.push_back({0.0, 0.5});
  CHECK_THROWS_AS(validate(std::move(dup)), error);
}

TEST_CASE("quantile of a two-atom measure is a step") {
  measure m = fct::bernoulli();
  CHECK(quantile(m, 0.25) == doctest::Approx(-1.0));
  CHECK(quantile(m, 0.75) == doctest::Approx(1.0));
}

TEST_CASE("quantile of uniform and semicircle") {
  measure u = make_uniform(0.0, 1.0);
  CHECK(quantile(u, 0.3) == doctest::Approx(0.3).epsilon(1e-10));
  measure s = make_semicircle(0.0, 1.0);
  CHECK(std::abs(quantile(s, 0.5)) < 1e-9);
  measure c = fct::circle_pm_one();
  CHECK_THROWS_AS(quantile(c, 0.5), error);
}

TEST_CASE("quantile is nondecreasing") {
  for (std::uint64_t seed : {11u, 12u, 13u}) {
    measure m = fct::random_compact(seed);
    double prev = quantile(m, 1e-3);
    for (int i = 2; i <= 1000; ++i) {
      double q = quantile(m, i / 1001.0);
      CHECK(q >= prev - 1e-12);
      prev = q;
    }
  }
}

TEST_CASE("support components") {
  measure b = fct::bernoulli();
  support_set s = support_components(b);
  CHECK(s.component_count() == 2);
  REQUIRE(s.isolated_points.size() == 2);
  CHECK(s.isolated_points[0] == doctest::Approx(-1.0));

  measure sc = make_semicircle(0.0, 1.0);
  support_set s2 = support_components(sc);
  REQUIRE(s2.intervals.size() == 1);
  CHECK(s2.intervals[0][0] == doctest::Approx(-2.0));
  CHECK(s2.intervals[0][1] == doctest::Approx(2.0));
  // density positive strictly inside, zero outside
  for (double x : {-1.9, -0.5, 0.0, 1.3, 1.99}) CHECK(sc.density_at(x) > 0.0);
  for (double x : {-2.5, 2.01, 3.0}) CHECK(sc.density_at(x) == 0.0);

  measure mix;
  mix.atoms.push_back({0.0, 0.5});
  ac_component c;
  c.family = ac_family::uniform;
  c.a = 0.0;
  c.b = 1.0;
  c.mass = 0.5;
  mix.ac.push_back(c);
  measure v = validate(std::move(mix));
  support_set s3 = support_components(v);
  CHECK(s3.component_count() == 1);
  REQUIRE(s3.intervals.size() == 1);
  CHECK(s3.intervals[0][0] == doctest::Approx(0.0));
  CHECK(s3.intervals[0][1] == doctest::Approx(1.0));
}

namespace {

double quantile_sup_distance(const measure& a, const measure& b, int grid) {
  // midpoint grid: never lands exactly on a distribution plateau level
  double worst = 0.0;
  for (int i = 1; i < grid; ++i) {
    double s = (i - 0.5) / grid;
    worst = std::max(worst, std::abs(quantile(a, s) - quantile(b, s)));
  }
  return worst;
}

} // namespace

TEST_CASE("jacobi approximation of two atoms") {
  measure m = make_atomic(domain_kind::real_line, {{0.0, 0.5}, {1.0, 0.5}});
  double h = 0.0;
  measure nu = jacobi_approximate(m, 0.05, &h);
  CHECK(h < 0.05);
  CHECK(nu.atoms.empty());
  CHECK(support_components(nu).component_count() == 2);
  CHECK(quantile_sup_distance(m, nu, 10000) < 0.05);
}

TEST_CASE("jacobi approximation of uniform") {
  measure m = make_uniform(0.0, 1.0);
  measure nu = jacobi_approximate(m, 0.1);
  support_set s = support_components(nu);
  CHECK(s.component_count() == 1);
  CHECK(s.min() >= -0.1);
  CHECK(s.max() <= 1.1);
  CHECK(quantile_sup_distance(m, nu, 10000) < 0.1);
}

TEST_CASE("jacobi approximation agrees with F on the grid") {
  measure m = fct::random_compact(77);
  double h = 0.0;
  measure nu = jacobi_approximate(m, 0.05, &h);
  double lo = m.support_min() - 0.5, hi = m.support_max() + 0.5;
  for (double k = std::ceil(lo / h); k * h < hi; k += 1.0)
    CHECK(std::abs(nu.cdf(k * h) - m.cdf(k * h)) < 1e-8);
}

TEST_CASE("jacobi approximation has 3/2-power edges") {
  measure m = fct::bernoulli();
  measure nu = jacobi_approximate(m, 0.1);
  support_set s = support_components(nu);
  REQUIRE(s.intervals.size() == 2);
  double a = s.intervals[0][0];
  double f0 = nu.cdf(a);
  double d1 = nu.cdf(a + 1e-3) - f0;
  double d2 = nu.cdf(a + 8e-3) - f0;
  // distribution-function exponent 3/2: scaling by 8 multiplies by ~22.6
  CHECK(d2 / d1 == doctest::Approx(std::pow(8.0, 1.5)).epsilon(0.25));
}

TEST_CASE("jacobi approximation preserves component counts") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    measure m = fct::random_compact(seed);
    for (double eps : {0.1, 0.01}) {
      measure nu = jacobi_approximate(m, eps);
      CHECK(support_components(nu).component_count() ==
            support_components(m).component_count());
      CHECK(nu.total_mass() == doctest::Approx(1.0).epsilon(1e-9));
      CHECK(quantile_sup_distance(m, nu, 2000) < eps);
    }
  }
}

TEST_CASE("jacobi approximation rejects unbounded support") {
  measure m = make_cauchy(0.0, 1.0);
  CHECK_THROWS_WITH_AS(jacobi_approximate(m, 0.1), doctest::Contains("UnboundedSupport"), error);
}

TEST_CASE("marchenko-pastur masses") {
  measure m = make_marchenko_pastur(0.5);
  CHECK(m.total_mass() == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(m.atoms.empty());
  measure m2 = make_marchenko_pastur(2.0);
  REQUIRE(m2.atoms.size() == 1);
  CHECK(m2.atoms[0].mass == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(m2.cdf(1e9) == doctest::Approx(1.0).epsilon(1e-6));
}
