#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "freeconv/support.hpp"
#include "helpers.hpp"

using namespace freeconv;

namespace {
const double sqrt5 = std::sqrt(5.0);
const double golden_fp = (3.0 + sqrt5) / 2.0; // fixed point for the bernoulli pair at 3
}

TEST_CASE("additive pair criterion on the bernoulli pair") {
  measure b = fct::bernoulli();
  pair_check pc = pair_criterion_additive(b, b, golden_fp, golden_fp);
  CHECK(pc.matches);
  double t2 = golden_fp * golden_fp;
  CHECK(pc.value == doctest::Approx(1.0 / (t2 * t2) - 1.0).epsilon(1e-12));
  CHECK(pc.value < 0.0);

  // the algebraic branch t2 = -1/t1 matches but sits exactly on the boundary
  pair_check pb = pair_criterion_additive(b, b, -0.5, 2.0);
  CHECK(pb.matches);
  CHECK(std::abs(pb.value) < 1e-9);

  measure s = make_semicircle(0.0, 1.0);
  pair_check ps = pair_criterion_additive(s, s, 3.0, 3.0);
  CHECK(ps.matches);
  double fp1 = (1.0 + 3.0 / sqrt5) / 2.0 - 1.0; // F'(3) - 1
  CHECK(ps.value == doctest::Approx(fp1 * fp1 - 1.0).epsilon(1e-10));
}

TEST_CASE("gap point from a matched pair") {
  measure b = fct::bernoulli();
  CHECK(gap_point_from_pair_additive(b, b, golden_fp, golden_fp) ==
        doctest::Approx(3.0).epsilon(1e-10));

  measure s = make_semicircle(0.0, 1.0);
  CHECK(gap_point_from_pair_additive(s, s, 3.0, 3.0) ==
        doctest::Approx(6.0 - (3.0 + sqrt5) / 2.0).epsilon(1e-10));

  CHECK_THROWS_WITH_AS(gap_point_from_pair_additive(b, b, -0.5, 2.0),
                       doctest::Contains("CriterionFailed"), error);
}

TEST_CASE("arcsine support from the bernoulli pair") {
  measure b = fct::bernoulli();
  support_result r = support_additive(b, b);
  CHECK(r.n == 1);
  CHECK(r.bound_satisfied);
  REQUIRE(r.support.intervals.size() == 1);
  CHECK(r.support.intervals[0][0] == doctest::Approx(-2.0).epsilon(1e-8));
  CHECK(r.support.intervals[0][1] == doctest::Approx(2.0).epsilon(1e-8));
  CHECK(component_count_check(r));
}

TEST_CASE("semicircle additivity of supports") {
  measure s = make_semicircle(0.0, 1.0);
  support_result r = support_additive(s, s);
  CHECK(r.n == 1);
  REQUIRE(r.support.intervals.size() == 1);
  const double edge = 2.0 * std::sqrt(2.0);
  CHECK(r.support.intervals[0][0] == doctest::Approx(-edge).epsilon(1e-7));
  CHECK(r.support.intervals[0][1] == doctest::Approx(edge).epsilon(1e-7));
}

TEST_CASE("cauchy factor makes the support unbounded") {
  measure u = make_uniform(0.0, 1.0);
  measure c = make_cauchy(0.0, 1.0);
  support_result r = support_additive(u, c);
  REQUIRE(r.support.intervals.size() == 1);
  CHECK(std::isinf(r.support.intervals[0][0]));
  CHECK(std::isinf(r.support.intervals[0][1]));
}

TEST_CASE("point-mass shift shortcut") {
  measure b = fct::bernoulli();
  measure d2 = make_atomic(domain_kind::real_line, {{2.0, 1.0}});
  support_result r = support_additive(b, d2);
  CHECK(r.n == 2);
  REQUIRE(r.support.isolated_points.size() == 2);
  CHECK(r.support.isolated_points[0] == doctest::Approx(1.0));
  CHECK(r.support.isolated_points[1] == doctest::Approx(3.0));
}

TEST_CASE("round trip through the subordination homeomorphism") {
  measure b = fct::bernoulli();
  measure s = make_semicircle(0.0, 1.0);
  subordination_config scfg;
  for (auto pr : {std::pair<measure, measure>{b, b}, {s, s}}) {
    support_result r = support_additive(pr.first, pr.second);
    for (const auto& g : r.gaps) {
      for (int side = 0; side < 2; ++side) {
        bool unb = side == 0 ? g.lo_unbounded : g.hi_unbounded;
        if (unb) continue;
        double edge = side == 0 ? g.lo : g.hi;
        double probe = side == 0 ? edge + 1e-7 * (1.0 + std::abs(edge))
                                 : edge - 1e-7 * (1.0 + std::abs(edge));
        boundary_value w1 = boundary_extend(
            [&](cdouble z) { return omega_additive(pr.first, pr.second, z, scfg).omega1; },
            probe, scfg);
        boundary_value w2 = boundary_extend(
            [&](cdouble z) { return omega_additive(pr.first, pr.second, z, scfg).omega2; },
            probe, scfg);
        REQUIRE(!w1.infinite);
        REQUIRE(!w2.infinite);
        double t1 = std::real(w1.value), t2 = std::real(w2.value);
        pair_check pc = pair_criterion_additive(pr.first, pr.second, t1, t2);
        CHECK(pc.matches);
        CHECK(pc.value < 1e-6);
        double back = gap_point_from_pair_additive(pr.first, pr.second, t1, t2);
        CHECK(std::abs(back - probe) < 1e-6);
      }
    }
  }
}

TEST_CASE("connected supports convolve to a connected support") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    measure m1 = fct::random_connected(2 * seed);
    measure m2 = fct::random_connected(2 * seed + 1);
    support_result r = support_additive(m1, m2);
    CHECK(r.n == 1);
  }
}

TEST_CASE("component count bound for atomic pairs") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    measure m1 = fct::random_atomic(3 * seed, 3);
    measure m2 = fct::random_atomic(3 * seed + 1, 3);
    support_result r = support_additive(m1, m2);
    CHECK(r.n <= 2 * r.n1 * r.n2 - 1);
    CHECK(component_count_check(r));
  }
}

TEST_CASE("free projections multiply to [0, 1]") {
  measure p = fct::free_projection();
  support_result r = support_mult_halfline(p, p);
  CHECK(r.n == 1);
  REQUIRE(r.support.intervals.size() == 1);
  CHECK(r.support.intervals[0][0] == doctest::Approx(0.0).epsilon(1e-6));
  CHECK(r.support.intervals[0][1] == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("two-atom half-line pair stays connected inside the product box") {
  measure m = fct::two_atoms_13();
  support_result r = support_mult_halfline(m, m);
  CHECK(r.n == 1);
  REQUIRE(r.support.intervals.size() == 1);
  CHECK(r.support.intervals[0][0] > 1.0 + 1e-3);
  CHECK(r.support.intervals[0][1] < 9.0 - 1e-3);
}

TEST_CASE("half-line connectedness for random connected inputs") {
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    measure m1 = fct::random_connected(100 + 2 * seed, true);
    measure m2 = fct::random_connected(101 + 2 * seed, true);
    support_result r = support_mult_halfline(m1, m2);
    CHECK(r.n == 1);
  }
}

TEST_CASE("half-line point-mass dilation") {
  measure m = fct::two_atoms_13();
  measure d2 = make_atomic(domain_kind::half_line, {{2.0, 1.0}});
  support_result r = support_mult_halfline(m, d2);
  REQUIRE(r.support.isolated_points.size() == 2);
  CHECK(r.support.isolated_points[0] == doctest::Approx(2.0));
  CHECK(r.support.isolated_points[1] == doctest::Approx(6.0));
}

TEST_CASE("circle: haar absorbs and two symmetric atoms fill the circle") {
  measure haar = make_haar();
  measure c = fct::circle_two_atoms(0.3);
  support_result rh = support_mult_circle(haar, c);
  CHECK(rh.support.is_full_circle());

  measure pm = fct::circle_pm_one();
  support_result r = support_mult_circle(pm, pm);
  CHECK(r.support.is_full_circle());
  CHECK(r.n == 1);
}

TEST_CASE("circle: small-angle pair leaves a gap around pi") {
  measure c = fct::circle_two_atoms(0.3);
  support_result r = support_mult_circle(c, c);
  CHECK(r.n >= 1);
  REQUIRE(!r.gaps.empty());
  bool covers_pi = false;
  for (const auto& g : r.gaps)
    if (g.lo <= pi && pi <= g.hi) covers_pi = true;
  CHECK(covers_pi);
  // conjugation symmetry of the support
  for (const auto& iv : r.support.intervals) {
    double lo = wrap_angle(iv[0]), hi = wrap_angle(iv[1]);
    CHECK(r.support.distance(wrap_angle(-lo)) < 1e-6);
    CHECK(r.support.distance(wrap_angle(-hi)) < 1e-6);
  }
}

TEST_CASE("circle rotation shortcut") {
  measure c = fct::circle_two_atoms(0.3);
  measure rot = make_atomic(domain_kind::circle, {{1.0, 1.0}});
  support_result r = support_mult_circle(c, rot);
  CHECK(r.n == 2);
  REQUIRE(r.support.isolated_points.size() == 2);
  CHECK(r.support.isolated_points[0] == doctest::Approx(wrap_angle(-0.3 + 1.0)));
  CHECK(r.support.isolated_points[1] == doctest::Approx(wrap_angle(0.3 + 1.0)));
}
