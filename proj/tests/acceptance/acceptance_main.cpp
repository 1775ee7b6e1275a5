// Acceptance suite: runs every acceptance criterion at its stated tolerance
// and prints one pass/fail line per criterion. Exit code is the number of
// failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "freeconv/density.hpp"
#include "freeconv/rmt.hpp"
#include "freeconv/subordination.hpp"
#include "freeconv/support.hpp"
#include "helpers.hpp"

using namespace freeconv;

namespace {

struct criterion_result {
  bool pass = true;
  std::string detail;
  double seconds = 0.0;
};

int g_failures = 0;

void report(int idx, const char* name, const criterion_result& r) {
  std::printf("criterion %2d [%s]: %s (%.1fs)%s%s\n", idx, name, r.pass ? "PASS" : "FAIL",
              r.seconds, r.detail.empty() ? "" : " - ", r.detail.c_str());
  std::fflush(stdout);
  if (!r.pass) ++g_failures;
}

criterion_result timed(const std::function<void(criterion_result&)>& body) {
  criterion_result r;
  auto t0 = std::chrono::steady_clock::now();
  try {
    body(r);
  } catch (const std::exception& e) {
    r.pass = false;
    r.detail += std::string("exception: ") + e.what();
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

void expect(criterion_result& r, bool ok, const std::string& what) {
  if (!ok) {
    r.pass = false;
    if (!r.detail.empty()) r.detail += "; ";
    r.detail += what;
  }
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

// Results reused by criteria 8 and 10.
std::vector<std::pair<measure, measure>> g_pairs_12; // criteria 1-2 inputs
std::vector<support_result> g_results_12;
support_result g_arcsine_support, g_semicircle_support, g_projection_support, g_circle_support;

criterion_result criterion1_connectedness() {
  return timed([](criterion_result& r) {
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
      measure m1 = fct::random_connected(7000 + 2 * seed);
      measure m2 = fct::random_connected(7001 + 2 * seed);
      support_result sr = support_additive(m1, m2);
      expect(r, sr.n == 1, "pair " + std::to_string(seed) + " has n=" + std::to_string(sr.n));
      g_pairs_12.emplace_back(m1, m2);
      g_results_12.push_back(sr);
      if (!r.pass) break;
    }
  });
}

criterion_result criterion2_component_bound() {
  return timed([](criterion_result& r) {
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
      measure m1 = fct::random_atomic(9000 + 2 * seed, 3);
      measure m2 = fct::random_atomic(9001 + 2 * seed, 3);
      support_result sr = support_additive(m1, m2);
      int bound = 2 * sr.n1 * sr.n2 - 1;
      expect(r, sr.n <= bound,
             "pair " + std::to_string(seed) + ": n=" + std::to_string(sr.n) + " > " +
                 std::to_string(bound));
      g_pairs_12.emplace_back(m1, m2);
      g_results_12.push_back(sr);
      if (!r.pass) break;
    }
  });
}

criterion_result criterion3_arcsine() {
  return timed([](criterion_result& r) {
    measure b = fct::bernoulli();
    g_arcsine_support = support_additive(b, b);
    expect(r, g_arcsine_support.n == 1, "component count");
    expect(r, g_arcsine_support.support.intervals.size() == 1, "interval count");
    double lo = g_arcsine_support.support.min(), hi = g_arcsine_support.support.max();
    expect(r, std::abs(lo + 2.0) < 1e-6, "left endpoint error " + fmt(std::abs(lo + 2.0)));
    expect(r, std::abs(hi - 2.0) < 1e-6, "right endpoint error " + fmt(std::abs(hi - 2.0)));

    std::vector<double> grid;
    for (int k = 1; k <= 21; ++k) grid.push_back(-2.0 + 4.0 * k / 22.0);
    density_grid d = density_additive(b, b, grid);
    double worst = 0.0;
    for (size_t i = 0; i < grid.size(); ++i) {
      double expect_v = 1.0 / (pi * std::sqrt(4.0 - grid[i] * grid[i]));
      worst = std::max(worst, std::abs(d.values[i] - expect_v));
    }
    expect(r, worst < 1e-4, "density error " + fmt(worst));
    r.detail = "support [" + fmt(lo) + "," + fmt(hi) + "], max density err " + fmt(worst);
  });
}

criterion_result criterion4_semicircle() {
  return timed([](criterion_result& r) {
    measure s = make_semicircle(0.0, 1.0);
    g_semicircle_support = support_additive(s, s);
    const double edge = 2.0 * std::sqrt(2.0);
    double lo = g_semicircle_support.support.min(), hi = g_semicircle_support.support.max();
    expect(r, g_semicircle_support.n == 1, "component count");
    expect(r, std::abs(lo + edge) < 1e-6, "left endpoint error " + fmt(std::abs(lo + edge)));
    expect(r, std::abs(hi - edge) < 1e-6, "right endpoint error " + fmt(std::abs(hi - edge)));
    density_grid d = density_additive(s, s, {0.0});
    double expect_v = 1.0 / (pi * std::sqrt(2.0));
    expect(r, std::abs(d.values[0] - expect_v) < 1e-4,
           "density error " + fmt(std::abs(d.values[0] - expect_v)));
    r.detail = "edges +-" + fmt(hi) + ", density(0) err " + fmt(std::abs(d.values[0] - expect_v));
  });
}

criterion_result criterion5_cauchy() {
  return timed([](criterion_result& r) {
    measure c = make_cauchy(0.0, 1.0);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
      fct::rng rr(500 + i);
      cdouble z(rr.uniform(-5.0, 5.0), rr.uniform(0.01, 3.0));
      subordination_value sv = omega_additive(c, c, z);
      worst = std::max(worst, std::abs(sv.omega1 - (z + cdouble(0.0, 1.0))));
    }
    expect(r, worst < 1e-12, "omega error " + fmt(worst));
    density_grid d = density_additive(c, c, {0.0});
    double err = std::abs(d.values[0] - 1.0 / (2.0 * pi));
    expect(r, err < 1e-6, "density error " + fmt(err));
    r.detail = "max |omega1-(z+i)| " + fmt(worst) + ", density(0) err " + fmt(err);
  });
}

criterion_result criterion6_projections() {
  return timed([](criterion_result& r) {
    measure p = fct::free_projection();
    g_projection_support = support_mult_halfline(p, p);
    expect(r, g_projection_support.n == 1, "component count");
    double lo = g_projection_support.support.min(), hi = g_projection_support.support.max();
    expect(r, std::abs(lo) < 1e-4, "left endpoint error " + fmt(std::abs(lo)));
    expect(r, std::abs(hi - 1.0) < 1e-4, "right endpoint error " + fmt(std::abs(hi - 1.0)));

    density_grid half = density_mult_halfline(p, p, {0.5});
    double err = std::abs(half.values[0] - 1.0 / pi);
    expect(r, err < 1e-3, "density error " + fmt(err));

    // cosine-clustered grid: the trapezoid mass of the sqrt-edge density
    // has to resolve 0.5 within 1e-3
    std::vector<double> grid;
    const int n = 4001;
    for (int i = 0; i < n; ++i)
      grid.push_back(0.5 - 0.5 * std::cos(pi * i / (n - 1.0)) * (1.0 - 4e-7) + 0.0);
    density_grid d = density_mult_halfline(p, p, grid);
    double unloc = d.unlocated_mass();
    expect(r, std::abs(unloc - 0.5) < 1e-3, "unlocated mass " + fmt(unloc));
    r.detail = "support [" + fmt(lo) + "," + fmt(hi) + "], unlocated " + fmt(unloc);
  });
}

criterion_result criterion7_circle() {
  return timed([](criterion_result& r) {
    measure haar = make_haar();
    measure c = fct::circle_two_atoms(0.9);
    support_result rh = support_mult_circle(haar, c);
    expect(r, rh.support.is_full_circle(), "haar support not the full circle");
    std::vector<double> grid;
    for (int i = 0; i < 32; ++i) grid.push_back(two_pi * i / 32.0);
    density_grid dh = density_mult_circle(haar, c, grid);
    double worst_h = 0.0;
    for (double v : dh.values) worst_h = std::max(worst_h, std::abs(v - 1.0));
    expect(r, worst_h < 1e-6, "haar density error " + fmt(worst_h));

    measure pm = fct::circle_pm_one();
    g_circle_support = support_mult_circle(pm, pm);
    expect(r, g_circle_support.support.is_full_circle(), "two-atom support not the full circle");
    density_grid db = density_mult_circle(pm, pm, grid);
    double worst_b = 0.0;
    for (double v : db.values) worst_b = std::max(worst_b, std::abs(v - 1.0));
    expect(r, worst_b < 1e-3, "two-atom density error " + fmt(worst_b));
    r.detail = "haar err " + fmt(worst_h) + ", two-atom err " + fmt(worst_b);
  });
}

criterion_result criterion8_oracle() {
  return timed([](criterion_result& r) {
    struct job {
      const char* name;
      convolution_kind kind;
      measure m1, m2;
      const support_result* support;
    };
    measure b = fct::bernoulli();
    measure s = make_semicircle(0.0, 1.0);
    measure p = fct::free_projection();
    measure pm = fct::circle_pm_one();
    std::vector<job> jobs = {
        {"arcsine", convolution_kind::additive, b, b, &g_arcsine_support},
        {"semicircle", convolution_kind::additive, s, s, &g_semicircle_support},
        {"projection", convolution_kind::mult_halfline, p, p, &g_projection_support},
        {"circle", convolution_kind::mult_circle, pm, pm, &g_circle_support},
    };
    oracle_config cfg;
    cfg.n = 2000;
    cfg.trials = 20;
    cfg.seed = 12345;
    std::string devs;
    for (const auto& jb : jobs) {
      if (jb.support->support.component_count() == 0) {
        expect(r, false, std::string(jb.name) + ": computed support missing");
        continue;
      }
      empirical_spectrum_result er = empirical_spectrum(jb.kind, jb.m1, jb.m2, cfg);
      double max_dev = 0.0;
      for (double v : er.eigenvalues)
        max_dev = std::max(max_dev, jb.support->support.distance(v));
      expect(r, max_dev < 0.05, std::string(jb.name) + " deviation " + fmt(max_dev));
      for (const auto& iv : jb.support->support.intervals) {
        double len = iv[1] - iv[0];
        if (!std::isfinite(len) || len <= 0.2) continue;
        bool hit = false;
        for (double v : er.eigenvalues) {
          double vv = v;
          if (jb.kind == convolution_kind::mult_circle) {
            double rel = wrap_angle(vv) - wrap_angle(iv[0]);
            if (rel < 0.0) rel += two_pi;
            hit = rel <= len;
          } else {
            hit = vv >= iv[0] && vv <= iv[1];
          }
          if (hit) break;
        }
        expect(r, hit, std::string(jb.name) + ": empty support interval");
      }
      if (!devs.empty()) devs += ", ";
      devs += std::string(jb.name) + " " + fmt(max_dev);
    }
    r.detail = "max deviations: " + devs;
  });
}

criterion_result criterion9_jacobi() {
  return timed([](criterion_result& r) {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      measure m = fct::random_compact(4000 + seed);
      for (double eps : {0.1, 0.01}) {
        measure nu = jacobi_approximate(m, eps);
        int cm = support_components(m).component_count();
        int cn = support_components(nu).component_count();
        expect(r, cm == cn,
               "seed " + std::to_string(seed) + ": components " + std::to_string(cm) + " -> " +
                   std::to_string(cn));
        double worst = 0.0;
        for (int i = 1; i < 2000; ++i) {
          double sq = (i - 0.5) / 2000.0;
          worst = std::max(worst, std::abs(quantile(m, sq) - quantile(nu, sq)));
        }
        expect(r, worst < eps,
               "seed " + std::to_string(seed) + " eps " + fmt(eps) + ": coupling " + fmt(worst));
      }
      if (!r.pass) break;
    }
  });
}

criterion_result criterion10_round_trip() {
  return timed([](criterion_result& r) {
    std::vector<std::pair<measure, measure>> pairs = g_pairs_12;
    std::vector<support_result> results = g_results_12;
    measure b = fct::bernoulli();
    measure s = make_semicircle(0.0, 1.0);
    pairs.emplace_back(b, b);
    results.push_back(g_arcsine_support);
    pairs.emplace_back(s, s);
    results.push_back(g_semicircle_support);

    subordination_config scfg;
    int checked = 0;
    double worst_back = 0.0;
    for (size_t i = 0; i < pairs.size() && r.pass; ++i) {
      const measure& m1 = pairs[i].first;
      const measure& m2 = pairs[i].second;
      if (m1.is_point_mass() || m2.is_point_mass()) continue;
      for (const auto& g : results[i].gaps) {
        for (int side = 0; side < 2; ++side) {
          if (side == 0 ? g.lo_unbounded : g.hi_unbounded) continue;
          double edge = side == 0 ? g.lo : g.hi;
          double probe = edge + (side == 0 ? 1.0 : -1.0) * 1e-7 * (1.0 + std::abs(edge));
          boundary_value w1 = boundary_extend(
              [&](cdouble z) { return omega_additive(m1, m2, z, scfg).omega1; }, probe, scfg);
          boundary_value w2 = boundary_extend(
              [&](cdouble z) { return omega_additive(m1, m2, z, scfg).omega2; }, probe, scfg);
          if (w1.infinite || w2.infinite) {
            expect(r, false, "omega blew up at a gap probe");
            continue;
          }
          double t1 = std::real(w1.value), t2 = std::real(w2.value);
          pair_check pc = pair_criterion_additive(m1, m2, t1, t2);
          expect(r, pc.matches, "G values do not match at a gap probe");
          expect(r, pc.value < 1e-9, "criterion not negative: " + fmt(pc.value));
          double back = t1 + t_minus_f_real(m2, t2);
          worst_back = std::max(worst_back, std::abs(back - probe));
          expect(r, std::abs(back - probe) < 1e-6, "map-back error " + fmt(std::abs(back - probe)));
          ++checked;
        }
      }
    }
    r.detail = std::to_string(checked) + " endpoints, worst map-back " + fmt(worst_back);
  });
}

} // namespace

int main() {
  std::printf("freeconv acceptance suite\n");
  report(1, "connected supports stay connected", criterion1_connectedness());
  report(2, "component bound 2*n1*n2-1", criterion2_component_bound());
  report(3, "arcsine reproduction", criterion3_arcsine());
  report(4, "semicircle additivity", criterion4_semicircle());
  report(5, "cauchy exactness", criterion5_cauchy());
  report(6, "free projections", criterion6_projections());
  report(7, "circle haar absorption", criterion7_circle());
  report(8, "monte carlo oracle agreement", criterion8_oracle());
  report(9, "jacobi approximation coupling", criterion9_jacobi());
  report(10, "homeomorphism round trip", criterion10_round_trip());
  std::printf("%s (%d/10 passed)\n", g_failures == 0 ? "ALL PASS" : "FAILURES", 10 - g_failures);
  return g_failures;
}
