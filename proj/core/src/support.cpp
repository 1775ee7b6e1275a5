#include "freeconv/support.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace freeconv {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();
constexpr double tan_amax = 0.5 * pi * (1.0 - 1e-9);

double edge_offset(double edge) { return 1e-9 * (1.0 + std::abs(edge)); }

// Parametrized branch: s in [0, 1] -> t, increasing, with unbounded sides
// compactified through tan.
struct branch_ctx {
  gap_component comp;
  double eff_lo = 0.0, eff_hi = 0.0; // finite offset endpoints (unused on inf sides)
  double scale = 1.0;
  std::function<double(double)> match;
  double v0 = 0.0, v1 = 0.0; // match at s = 0 and s = 1

  double t_of_s(double s) const {
    if (comp.hi_inf) return eff_lo + scale * std::tan(s * tan_amax);
    if (comp.lo_inf) return eff_hi - scale * std::tan((1.0 - s) * tan_amax);
    return eff_lo + s * (eff_hi - eff_lo);
  }
  bool increasing() const { return v1 > v0; }
  double vmin() const { return std::min(v0, v1); }
  double vmax() const { return std::max(v0, v1); }

  // s with match(t(s)) = v; clamps to [0, 1] when v is outside the range.
  double s_of_value(double v) const {
    if (increasing()) {
      if (v <= v0) return 0.0;
      if (v >= v1) return 1.0;
    } else {
      if (v >= v0) return 0.0;
      if (v <= v1) return 1.0;
    }
    double lo = 0.0, hi = 1.0;
    bool lo_below = (v0 < v);
    for (int it = 0; it < 80; ++it) {
      double mid = 0.5 * (lo + hi);
      if (mid == lo || mid == hi) break;
      if ((match(t_of_s(mid)) < v) == lo_below)
        lo = mid;
      else
        hi = mid;
    }
    return 0.5 * (lo + hi);
  }
};

branch_ctx make_branch(const gap_component& c, std::function<double(double)> match,
                       double scale_hint) {
  branch_ctx b;
  b.comp = c;
  b.match = std::move(match);
  if (!c.lo_inf) b.eff_lo = c.lo + edge_offset(c.lo);
  if (!c.hi_inf) b.eff_hi = c.hi - edge_offset(c.hi);
  if (c.lo_inf || c.hi_inf) b.scale = std::max(1.0, scale_hint);
  if (!c.lo_inf && !c.hi_inf && b.eff_hi < b.eff_lo) {
    double mid = 0.5 * (c.lo + c.hi);
    b.eff_lo = b.eff_hi = mid;
  }
  b.v0 = b.match(b.t_of_s(0.0));
  b.v1 = b.match(b.t_of_s(1.0));
  return b;
}

struct seg_rec {
  double s_a = 0.0, s_b = 0.0;   // criterion-negative run in branch-1 parameter
  bool a_at_domain = false, b_at_domain = false;
  double t1_a = 0.0, t2_a = 0.0; // evaluated at the run ends (mapping points)
  double t1_b = 0.0, t2_b = 0.0;
  double w1_a = 0.0, w2_a = 0.0; // witnesses strictly inside the run
  double w1_b = 0.0, w2_b = 0.0;
};

struct trace_out {
  pair_curve pc;
  std::vector<seg_rec> segs;
  double s_dom_lo = 0.0, s_dom_hi = 1.0;
  bool empty = true;
};

trace_out trace_pair(const branch_ctx& b1, const branch_ctx& b2,
                     const std::function<double(double, double)>& crit,
                     const support_config& cfg) {
  trace_out out;
  out.pc.comp1 = b1.comp;
  out.pc.comp2 = b2.comp;

  double olo = std::max(b1.vmin(), b2.vmin());
  double ohi = std::min(b1.vmax(), b2.vmax());
  if (!(ohi > olo)) return out;

  double sa = b1.s_of_value(b1.increasing() ? olo : ohi);
  double sb = b1.s_of_value(b1.increasing() ? ohi : olo);
  if (sa > sb) std::swap(sa, sb);
  if (!(sb > sa)) return out;
  out.s_dom_lo = sa;
  out.s_dom_hi = sb;
  out.empty = false;

  auto eval = [&](double s, double& t1, double& t2) {
    t1 = b1.t_of_s(s);
    double gamma = b1.match(t1);
    t2 = b2.t_of_s(b2.s_of_value(gamma));
    double res = std::abs(b2.match(t2) - gamma);
    if (res > 1e-6 * (1.0 + std::abs(gamma))) out.pc.matched_ok = false;
    double g;
    try {
      g = crit(t1, t2);
    } catch (const error&) {
      g = 1e9;
    }
    return g;
  };

  const int n = std::max(16, cfg.samples);
  std::vector<double> ss(n), gs(n), t1s(n), t2s(n);
  for (int i = 0; i < n; ++i) {
    double s = sa + (sb - sa) * i / (n - 1.0);
    ss[i] = s;
    gs[i] = eval(s, t1s[i], t2s[i]);
  }
  out.pc.t1 = t1s;
  out.pc.t2 = t2s;
  out.pc.criterion = gs;

  auto inside = [&](double g) { return g < -cfg.boundary_band; };
  auto refine = [&](int i, double& s_boundary, double& s_inside) {
    // bisect the flip of the criterion sign between samples i and i+1
    double lo = ss[i], hi = ss[i + 1];
    bool lo_in = inside(gs[i]);
    for (int it = 0; it < 60; ++it) {
      double mid = 0.5 * (lo + hi);
      if (mid == lo || mid == hi) break;
      double t1, t2;
      if (inside(eval(mid, t1, t2)) == lo_in)
        lo = mid;
      else
        hi = mid;
      double w1 = std::abs(b1.t_of_s(hi) - b1.t_of_s(lo));
      if (w1 < cfg.tol_t * (1.0 + std::abs(b1.t_of_s(lo)))) break;
    }
    s_boundary = 0.5 * (lo + hi);
    s_inside = lo_in ? lo : hi;
  };

  int i = 0;
  while (i < n) {
    if (!inside(gs[i])) {
      ++i;
      continue;
    }
    int j = i;
    while (j + 1 < n && inside(gs[j + 1])) ++j;
    seg_rec seg;
    if (i == 0) {
      seg.s_a = sa;
      seg.a_at_domain = true;
      seg.t1_a = t1s[0];
      seg.t2_a = t2s[0];
      seg.w1_a = t1s[0];
      seg.w2_a = t2s[0];
    } else {
      double sbnd, sin_;
      refine(i - 1, sbnd, sin_);
      seg.s_a = sbnd;
      double t1, t2;
      eval(sbnd, t1, t2);
      seg.t1_a = t1;
      seg.t2_a = t2;
      eval(sin_, t1, t2);
      seg.w1_a = t1;
      seg.w2_a = t2;
    }
    if (j == n - 1) {
      seg.s_b = sb;
      seg.b_at_domain = true;
      seg.t1_b = t1s[n - 1];
      seg.t2_b = t2s[n - 1];
      seg.w1_b = t1s[n - 1];
      seg.w2_b = t2s[n - 1];
    } else {
      double sbnd, sin_;
      refine(j, sbnd, sin_);
      seg.s_b = sbnd;
      double t1, t2;
      eval(sbnd, t1, t2);
      seg.t1_b = t1;
      seg.t2_b = t2;
      eval(sin_, t1, t2);
      seg.w1_b = t1;
      seg.w2_b = t2;
    }
    out.segs.push_back(seg);
    out.pc.d_segments += 1;
    i = j + 1;
  }
  return out;
}

// ---- assembly ----

struct raw_gap {
  double lo = 0.0, hi = 0.0;
  bool lo_unb = false, hi_unb = false;
  double t1_lo = 0.0, t2_lo = 0.0, t1_hi = 0.0, t2_hi = 0.0;
};

void merge_and_assemble(std::vector<raw_gap> gaps, double box_lo, double box_hi,
                        double merge_rel, domain_kind dom, support_result& result) {
  for (auto& g : gaps) {
    if (g.lo_unb) g.lo = -inf;
    if (g.hi_unb) g.hi = inf;
    if (g.lo > g.hi) std::swap(g.lo, g.hi);
  }
  gaps.erase(std::remove_if(gaps.begin(), gaps.end(),
                            [&](const raw_gap& g) {
                              return !(g.hi > g.lo) || g.hi <= box_lo || g.lo >= box_hi;
                            }),
             gaps.end());
  std::sort(gaps.begin(), gaps.end(),
            [](const raw_gap& a, const raw_gap& b) { return a.lo < b.lo; });

  std::vector<raw_gap> merged;
  for (const auto& g : gaps) {
    double tol = merge_rel * (1.0 + std::min(std::abs(g.lo), std::abs(g.hi)));
    if (!merged.empty() && g.lo <= merged.back().hi + tol) {
      if (g.hi > merged.back().hi) {
        merged.back().hi = g.hi;
        merged.back().hi_unb = g.hi_unb;
        merged.back().t1_hi = g.t1_hi;
        merged.back().t2_hi = g.t2_hi;
      }
    } else {
      merged.push_back(g);
    }
  }

  for (const auto& g : merged) {
    gap_info gi;
    gi.lo_unbounded = g.lo <= box_lo;
    gi.hi_unbounded = g.hi >= box_hi;
    gi.lo = gi.lo_unbounded ? -inf : g.lo;
    gi.hi = gi.hi_unbounded ? inf : g.hi;
    gi.t1_lo = g.t1_lo;
    gi.t2_lo = g.t2_lo;
    gi.t1_hi = g.t1_hi;
    gi.t2_hi = g.t2_hi;
    result.gaps.push_back(gi);
  }

  support_set s;
  s.domain = dom;
  double cur = box_lo;
  auto scale_at = [](double x) { return 1.0 + (std::isfinite(x) ? std::abs(x) : 0.0); };
  const double iso_rel = 1e-7;
  for (const auto& g : merged) {
    double gl = std::max(g.lo, box_lo), gh = std::min(g.hi, box_hi);
    if (gl > cur + 1e-12 * scale_at(cur)) {
      if (gl - cur < iso_rel * scale_at(cur))
        s.isolated_points.push_back(0.5 * (cur + gl));
      else
        s.intervals.push_back({cur, gl});
    }
    cur = std::max(cur, gh);
  }
  if (box_hi > cur + 1e-12 * scale_at(cur)) {
    if (std::isfinite(box_hi) && box_hi - cur < iso_rel * scale_at(cur))
      s.isolated_points.push_back(0.5 * (cur + box_hi));
    else
      s.intervals.push_back({cur, box_hi});
  }
  result.support = s;
  result.n = s.component_count();
}

std::vector<std::array<double, 2>> component_hulls(const support_set& s) {
  std::vector<std::array<double, 2>> hulls(s.intervals);
  for (double p : s.isolated_points) hulls.push_back({p, p});
  std::sort(hulls.begin(), hulls.end());
  return hulls;
}

// ---- additive pipeline ----

std::vector<gap_component> additive_branches(const measure& m, int parent) {
  std::vector<gap_component> out;
  if (!m.compact()) return out; // cauchy: support is the whole line
  auto hulls = component_hulls(m.support());
  if (hulls.empty()) return out;

  std::vector<double> zeros = g_zeros_on_gaps(m);
  std::vector<std::array<double, 2>> raw;
  std::vector<std::array<bool, 2>> unb;
  raw.push_back({0.0, hulls.front()[0]});
  unb.push_back({true, false});
  for (size_t i = 0; i + 1 < hulls.size(); ++i) {
    raw.push_back({hulls[i][1], hulls[i + 1][0]});
    unb.push_back({false, false});
  }
  raw.push_back({hulls.back()[1], 0.0});
  unb.push_back({false, true});

  for (size_t i = 0; i < raw.size(); ++i) {
    std::vector<double> cuts;
    for (double z : zeros)
      if (!unb[i][0] && !unb[i][1] && z > raw[i][0] && z < raw[i][1]) cuts.push_back(z);
    std::sort(cuts.begin(), cuts.end());
    std::vector<double> pts{raw[i][0]};
    for (double z : cuts) pts.push_back(z);
    pts.push_back(raw[i][1]);
    for (size_t k = 0; k + 1 < pts.size(); ++k) {
      gap_component c;
      c.parent = parent;
      c.lo = pts[k];
      c.hi = pts[k + 1];
      c.lo_inf = (k == 0) && unb[i][0];
      c.hi_inf = (k + 2 == pts.size() + 0) && unb[i][1];
      if (!c.lo_inf && !c.hi_inf && c.hi - c.lo < 4.0 * edge_offset(c.lo)) continue;
      out.push_back(c);
    }
  }
  return out;
}

void finish_counts(support_result& r, const measure& m1, const measure& m2) {
  r.n1 = m1.support().component_count();
  r.n2 = m2.support().component_count();
  if (r.kind == convolution_kind::additive)
    r.bound_satisfied = r.n <= 2 * r.n1 * r.n2 - 1;
  else
    r.bound_satisfied = true;
}

support_result shifted_support(const measure& base, double c, convolution_kind kind) {
  support_result r;
  r.kind = kind;
  support_set s = base.support();
  for (auto& iv : s.intervals) {
    iv[0] += c;
    iv[1] += c;
  }
  for (auto& p : s.isolated_points) p += c;
  r.support = s;
  r.n = s.component_count();
  r.notes.push_back("point-mass input: support translated");
  return r;
}

support_result scaled_support(const measure& base, double c, convolution_kind kind) {
  support_result r;
  r.kind = kind;
  support_set s = base.support();
  for (auto& iv : s.intervals) {
    iv[0] *= c;
    iv[1] *= c;
    if (iv[0] > iv[1]) std::swap(iv[0], iv[1]);
  }
  for (auto& p : s.isolated_points) p *= c;
  std::sort(s.intervals.begin(), s.intervals.end());
  std::sort(s.isolated_points.begin(), s.isolated_points.end());
  r.support = s;
  r.n = s.component_count();
  r.notes.push_back("point-mass input: support dilated");
  return r;
}

} // namespace

pair_check pair_criterion_additive(const measure& m1, const measure& m2, double t1, double t2) {
  pair_check out;
  double g1v = cauchy_g_real(m1, t1);
  double g2v = cauchy_g_real(m2, t2);
  if (std::abs(g1v) < 1e-13 || std::abs(g2v) < 1e-13)
    fail(errc::pole_of_f, "G vanishes at the proposed pair");
  out.matches = std::abs(g1v - g2v) < 1e-9 * (1.0 + std::abs(g1v));
  out.value = f_prime_minus_one_real(m1, t1) * f_prime_minus_one_real(m2, t2) - 1.0;
  return out;
}

double gap_point_from_pair_additive(const measure& m1, const measure& m2, double t1, double t2) {
  pair_check pc = pair_criterion_additive(m1, m2, t1, t2);
  if (!pc.matches || pc.value >= 0.0)
    fail(errc::criterion_failed, "pair does not satisfy the subordination criterion");
  // t1 + t2 - F1(t1), evaluated as t1 + (t2 - F2(t2)) which is insensitive
  // to the solver slop in t2.
  return t1 + t_minus_f_real(m2, t2);
}

support_result support_additive(const measure& m1, const measure& m2,
                                const support_config& cfg) {
  support_result r;
  r.kind = convolution_kind::additive;

  if (m1.is_point_mass() && m2.is_point_mass()) {
    r.support.domain = domain_kind::real_line;
    r.support.isolated_points.push_back(m1.atoms[0].position + m2.atoms[0].position);
    r.n = 1;
    finish_counts(r, m1, m2);
    return r;
  }
  if (m1.is_point_mass()) {
    r = shifted_support(m2, m1.atoms[0].position, convolution_kind::additive);
    finish_counts(r, m1, m2);
    return r;
  }
  if (m2.is_point_mass()) {
    r = shifted_support(m1, m2.atoms[0].position, convolution_kind::additive);
    finish_counts(r, m1, m2);
    return r;
  }

  auto br1 = additive_branches(m1, 1);
  auto br2 = additive_branches(m2, 2);

  auto match1 = [&m1](double t) { return cauchy_g_real(m1, t); };
  auto match2 = [&m2](double t) { return cauchy_g_real(m2, t); };
  auto crit = [&](double t1, double t2) {
    return f_prime_minus_one_real(m1, t1) * f_prime_minus_one_real(m2, t2) - 1.0;
  };

  double span1 = m1.compact() ? std::max(std::abs(m1.support_min()), std::abs(m1.support_max()))
                              : 1.0;
  double span2 = m2.compact() ? std::max(std::abs(m2.support_min()), std::abs(m2.support_max()))
                              : 1.0;

  std::vector<raw_gap> gaps;

  // Sign classes: F = 1/G keeps the sign of G on each branch.
  auto sign_of = [](const branch_ctx& b) {
    double v = std::abs(b.v0) > std::abs(b.v1) ? b.v0 : b.v1;
    return v > 0.0 ? 1 : -1;
  };

  std::vector<branch_ctx> ctx1, ctx2;
  for (auto& c : br1) ctx1.push_back(make_branch(c, match1, span1));
  for (auto& c : br2) ctx2.push_back(make_branch(c, match2, span2));
  for (auto& b : ctx1) b.comp.sign_class = sign_of(b);
  for (auto& b : ctx2) b.comp.sign_class = sign_of(b);

  for (auto& b1 : ctx1) {
    for (auto& b2 : ctx2) {
      if (b1.comp.sign_class != b2.comp.sign_class) continue;
      trace_out tr = trace_pair(b1, b2, crit, cfg);
      if (!tr.empty) {
        r.curves.push_back(tr.pc);
        if (!tr.pc.matched_ok) r.all_converged = false;
      }
      // The inverse map t1 + t2 - F(t); the F-side is evaluated on the
      // larger argument, where t - F(t) is the stable quantity.
      auto map_pair = [&](double t1, double t2) {
        if (std::abs(t2) >= std::abs(t1)) return t1 + t_minus_f_real(m2, t2);
        return t2 + t_minus_f_real(m1, t1);
      };
      for (const auto& seg : tr.segs) {
        raw_gap g;
        double ta = map_pair(seg.t1_a, seg.t2_a);
        double tb = map_pair(seg.t1_b, seg.t2_b);
        g.lo = std::min(ta, tb);
        g.hi = std::max(ta, tb);
        if (ta <= tb) {
          g.t1_lo = seg.w1_a;
          g.t2_lo = seg.w2_a;
          g.t1_hi = seg.w1_b;
          g.t2_hi = seg.w2_b;
        } else {
          g.t1_lo = seg.w1_b;
          g.t2_lo = seg.w2_b;
          g.t1_hi = seg.w1_a;
          g.t2_hi = seg.w2_a;
        }
        gaps.push_back(g);
      }
    }
  }

  double box_lo = m1.support_min() + m2.support_min();
  double box_hi = m1.support_max() + m2.support_max();
  merge_and_assemble(std::move(gaps), box_lo, box_hi, cfg.merge_rel, domain_kind::real_line, r);
  finish_counts(r, m1, m2);
  return r;
}

// ---- half-line pipeline ----

namespace {

// Pieces of {t > 0 : 1/t outside supp(m)}, split where psi crosses 0 or -1.
// sign_class: 1 psi > 0, 2 psi < -1, 3 psi in (-1, 0).
std::vector<gap_component> halfline_branches(const measure& m, int parent) {
  std::vector<gap_component> out;
  auto hulls = component_hulls(m.support());
  if (hulls.empty()) return out;

  std::vector<std::array<double, 2>> tgaps; // in the t variable
  std::vector<std::array<bool, 2>> unb;
  bool unbounded = !std::isfinite(hulls.back()[1]);
  if (!unbounded) {
    tgaps.push_back({0.0, 1.0 / hulls.back()[1]});
    unb.push_back({false, false});
  }
  for (size_t i = hulls.size(); i-- > 1;) {
    double a = hulls[i - 1][1], b = hulls[i][0]; // s-gap (a, b)
    if (!(b > a)) continue;
    if (a <= 0.0) continue;
    tgaps.push_back({1.0 / b, 1.0 / a});
    unb.push_back({false, false});
  }
  if (hulls.front()[0] > 0.0) {
    tgaps.push_back({1.0 / hulls.front()[0], 0.0});
    unb.push_back({false, true}); // t-piece (1/min, +inf)
  }

  auto psi_at = [&m](double t) { return psi_real(m, t); };

  for (size_t i = 0; i < tgaps.size(); ++i) {
    gap_component base;
    base.parent = parent;
    base.lo = tgaps[i][0];
    base.hi = tgaps[i][1];
    base.lo_inf = unb[i][0];
    base.hi_inf = unb[i][1];

    double t_lo = base.lo + edge_offset(base.lo);
    double t_hi = base.hi_inf ? base.lo + std::max(1.0, base.lo) * std::tan(tan_amax)
                              : base.hi - edge_offset(base.hi);
    if (!base.hi_inf && t_hi <= t_lo) continue;
    double p_lo = psi_at(t_lo), p_hi = psi_at(t_hi);

    std::vector<double> cuts;
    for (double level : {-1.0, 0.0}) {
      if (p_lo < level && p_hi > level) {
        double c = bisect_monotone(psi_at, t_lo, t_hi, level, 1e-14 * (1.0 + std::abs(t_lo)));
        cuts.push_back(c);
      }
    }
    std::sort(cuts.begin(), cuts.end());
    std::vector<double> pts{base.lo};
    for (double c : cuts) pts.push_back(c);
    pts.push_back(base.hi);
    for (size_t k = 0; k + 1 < pts.size(); ++k) {
      gap_component c = base;
      c.lo = pts[k];
      c.hi = pts[k + 1];
      c.lo_inf = base.lo_inf && k == 0;
      c.hi_inf = base.hi_inf && k + 2 == pts.size();
      if (!c.hi_inf && c.hi - c.lo < 4.0 * edge_offset(c.lo)) continue;
      double tm = c.hi_inf ? (c.lo + edge_offset(c.lo)) * 2.0 + 1.0 : 0.5 * (c.lo + c.hi);
      double pm = psi_at(tm);
      c.sign_class = pm > 0.0 ? 1 : (pm < -1.0 ? 2 : 3);
      out.push_back(c);
    }
  }
  return out;
}

} // namespace

support_result support_mult_halfline(const measure& m1, const measure& m2,
                                     const support_config& cfg) {
  support_result r;
  r.kind = convolution_kind::mult_halfline;

  auto point_mass_shortcut = [&](const measure& pm, const measure& other) {
    double c = pm.atoms[0].position;
    if (c == 0.0) {
      support_result rr;
      rr.kind = convolution_kind::mult_halfline;
      rr.support.domain = domain_kind::half_line;
      rr.support.isolated_points.push_back(0.0);
      rr.n = 1;
      rr.notes.push_back("delta_0 input absorbs the product");
      return rr;
    }
    return scaled_support(other, c, convolution_kind::mult_halfline);
  };
  if (m1.is_point_mass()) {
    r = point_mass_shortcut(m1, m2);
    finish_counts(r, m1, m2);
    return r;
  }
  if (m2.is_point_mass()) {
    r = point_mass_shortcut(m2, m1);
    finish_counts(r, m1, m2);
    return r;
  }

  auto br1 = halfline_branches(m1, 1);
  auto br2 = halfline_branches(m2, 2);

  auto match1 = [&m1](double t) { return psi_real(m1, t); };
  auto match2 = [&m2](double t) { return psi_real(m2, t); };
  auto crit = [&](double t1, double t2) {
    // psi + 1 = (1/t) G(1/t) evaluated directly: no cancellation near the
    // eta pole, where psi itself crosses -1.
    double psi = psi_real(m1, t1);
    double psip1 = cauchy_g_real(m1, 1.0 / t1) / t1;
    double den = psi * psip1;
    double v1 = variance_v(m1, t1);
    double v2 = variance_v(m2, t2);
    if (den == 0.0) return 1e9;
    return (v1 / den) * (v2 / den) - 1.0;
  };

  std::vector<branch_ctx> ctx1, ctx2;
  for (auto& c : br1) ctx1.push_back(make_branch(c, match1, std::max(1.0, c.lo)));
  for (auto& c : br2) ctx2.push_back(make_branch(c, match2, std::max(1.0, c.lo)));

  std::vector<raw_gap> gaps;
  for (auto& b1 : ctx1) {
    for (auto& b2 : ctx2) {
      if (b1.comp.sign_class != b2.comp.sign_class) continue;
      trace_out tr = trace_pair(b1, b2, crit, cfg);
      if (!tr.empty) {
        r.curves.push_back(tr.pc);
        if (!tr.pc.matched_ok) r.all_converged = false;
      }
      // Map to the t variable of mu via t = t1 t2 / eta, written as
      // t1 * G2(1/t2) / psi2(t2) which stays stable at the compactified
      // range ends; then pass to the spectral variable s = 1/t.
      auto map_t = [&](double t1, double t2) {
        return t1 * cauchy_g_real(m2, 1.0 / t2) / psi_real(m2, t2);
      };
      for (const auto& seg : tr.segs) {
        double ta = map_t(seg.t1_a, seg.t2_a);
        double tb = map_t(seg.t1_b, seg.t2_b);
        if (!(ta > 0.0) || !(tb > 0.0)) continue; // class (-1,0): never realized
        double s_a = 1.0 / ta;
        double s_b = 1.0 / tb;
        raw_gap g;
        g.lo = std::min(s_a, s_b);
        g.hi = std::max(s_a, s_b);
        if (s_a <= s_b) {
          g.t1_lo = seg.w1_a;
          g.t2_lo = seg.w2_a;
          g.t1_hi = seg.w1_b;
          g.t2_hi = seg.w2_b;
        } else {
          g.t1_lo = seg.w1_b;
          g.t2_lo = seg.w2_b;
          g.t1_hi = seg.w1_a;
          g.t2_hi = seg.w2_a;
        }
        gaps.push_back(g);
      }
    }
  }

  double box_lo = m1.support_min() * m2.support_min();
  double box_hi = m1.support_max() * m2.support_max();
  if (std::isnan(box_hi)) box_hi = inf; // 0 * inf
  merge_and_assemble(std::move(gaps), box_lo, box_hi, cfg.merge_rel, domain_kind::half_line, r);
  finish_counts(r, m1, m2);
  return r;
}

// ---- circle pipeline ----

namespace {

std::vector<std::array<double, 2>> circle_gap_arcs(const support_set& s) {
  std::vector<std::array<double, 2>> covered;
  if (s.is_full_circle()) return {};
  for (const auto& iv : s.intervals) covered.push_back(iv);
  for (double p : s.isolated_points) covered.push_back({p, p});
  if (covered.empty()) return {{0.0, two_pi}};
  std::sort(covered.begin(), covered.end());
  std::vector<std::array<double, 2>> gaps;
  for (size_t i = 0; i < covered.size(); ++i) {
    double end = covered[i][1];
    double next = (i + 1 < covered.size()) ? covered[i + 1][0] : covered[0][0] + two_pi;
    if (next - end > 1e-12) gaps.push_back({end, next});
  }
  return gaps;
}

// arg(eta) in (0, 2*pi); eta = 1 cannot occur on an arc where psi is finite.
double phi_of(const measure& m, double theta) {
  cdouble m1, m2;
  moments_m1_m2(m, std::polar(1.0, theta), m1, m2);
  cdouble psi = m1 - 1.0;
  cdouble eta = psi / m1;
  double a = std::arg(eta);
  if (a <= 0.0) a += two_pi;
  return a;
}

} // namespace

support_result support_mult_circle(const measure& m1, const measure& m2,
                                   const support_config& cfg) {
  support_result r;
  r.kind = convolution_kind::mult_circle;
  r.support.domain = domain_kind::circle;

  auto full_circle = [&](const char* why) {
    r.support.intervals = {{0.0, two_pi}};
    r.n = 1;
    r.notes.push_back(why);
    finish_counts(r, m1, m2);
    return r;
  };

  if (m1.is_haar() || m2.is_haar()) return full_circle("haar factor absorbs the product");

  auto rotate_shortcut = [&](const measure& pm, const measure& other) {
    double c = pm.atoms[0].position;
    support_result rr;
    rr.kind = convolution_kind::mult_circle;
    support_set s = other.support();
    for (auto& iv : s.intervals) {
      double start = wrap_angle(iv[0] + c);
      iv = {start, start + (iv[1] - iv[0])};
    }
    for (auto& p : s.isolated_points) p = wrap_angle(p + c);
    std::sort(s.intervals.begin(), s.intervals.end());
    std::sort(s.isolated_points.begin(), s.isolated_points.end());
    rr.support = s;
    rr.n = s.component_count();
    rr.notes.push_back("point-mass input: support rotated");
    return rr;
  };
  if (m1.is_point_mass()) {
    r = rotate_shortcut(m1, m2);
    finish_counts(r, m1, m2);
    return r;
  }
  if (m2.is_point_mass()) {
    r = rotate_shortcut(m2, m1);
    finish_counts(r, m1, m2);
    return r;
  }

  // Gap arcs in the t variable are the reflections of the spectral gaps.
  auto t_arcs = [&](const measure& m, int parent) {
    std::vector<gap_component> out;
    for (const auto& g : circle_gap_arcs(m.support())) {
      gap_component c;
      c.parent = parent;
      c.lo = -g[1];
      c.hi = -g[0];
      out.push_back(c);
    }
    return out;
  };

  auto br1 = t_arcs(m1, 1);
  auto br2 = t_arcs(m2, 2);

  auto match1 = [&m1](double th) { return phi_of(m1, th); };
  auto match2 = [&m2](double th) { return phi_of(m2, th); };
  auto crit = [&](double th1, double th2) {
    cdouble mm1, mm2;
    moments_m1_m2(m1, std::polar(1.0, th1), mm1, mm2);
    cdouble psi = mm1 - 1.0;
    double den = std::abs(psi * (psi + 1.0));
    if (den == 0.0) return 1e9;
    double v1 = variance_v(m1, th1);
    double v2 = variance_v(m2, th2);
    return v1 * v2 / (den * den) - 1.0;
  };

  std::vector<branch_ctx> ctx1, ctx2;
  for (auto& c : br1) ctx1.push_back(make_branch(c, match1, 1.0));
  for (auto& c : br2) ctx2.push_back(make_branch(c, match2, 1.0));

  // The boundary trace of Im psi is monotone (eta is orientation
  // preserving); flag any arc where sampling disagrees.
  auto check_monotone = [&](branch_ctx& b) {
    double prev = b.match(b.t_of_s(0.0));
    for (int i = 1; i <= 16; ++i) {
      double v = b.match(b.t_of_s(i / 16.0));
      if (v < prev - 1e-9) return false;
      prev = v;
    }
    return true;
  };

  std::vector<raw_gap> gaps; // in angle of the spectral variable
  std::vector<double> arc_angles_lo, arc_angles_hi;
  for (auto& b1 : ctx1) {
    if (!check_monotone(b1)) {
      r.notes.push_back("non-monotone psi trace on an arc of measure 1");
      r.all_converged = false;
    }
    for (auto& b2 : ctx2) {
      trace_out tr = trace_pair(b1, b2, crit, cfg);
      if (!tr.empty) {
        r.curves.push_back(tr.pc);
        r.d_per_e.push_back(tr.pc.d_segments);
        if (!tr.pc.matched_ok) r.all_converged = false;
      }
      auto angle_of = [&](double th1, double th2) {
        return th1 + th2 - phi_of(m1, th1); // arg of t = t1 t2 / eta_1(t1)
      };
      for (const auto& seg : tr.segs) {
        double ta = angle_of(seg.t1_a, seg.t2_a);
        double tb = angle_of(seg.t1_b, seg.t2_b);
        // Spectral gap arc is the reflection; order endpoints as an arc.
        double lo = -std::max(ta, tb), hi = -std::min(ta, tb);
        if (hi - lo >= two_pi - 1e-9) {
          lo = 0.0;
          hi = two_pi;
        }
        raw_gap g;
        g.lo = lo;
        g.hi = hi;
        g.t1_lo = seg.w1_a;
        g.t2_lo = seg.w2_a;
        g.t1_hi = seg.w1_b;
        g.t2_hi = seg.w2_b;
        gaps.push_back(g);
      }
    }
  }

  // Merge arcs mod 2*pi and take the complement.
  std::vector<std::array<double, 2>> arcs;
  for (auto& g : gaps) {
    double start = wrap_angle(g.lo);
    arcs.push_back({start, start + (g.hi - g.lo)});
    gap_info gi;
    gi.lo = start;
    gi.hi = start + (g.hi - g.lo);
    gi.t1_lo = g.t1_lo;
    gi.t2_lo = g.t2_lo;
    gi.t1_hi = g.t1_hi;
    gi.t2_hi = g.t2_hi;
    r.gaps.push_back(gi);
  }
  if (arcs.empty()) return full_circle("no criterion-negative arcs");

  std::sort(arcs.begin(), arcs.end());
  std::vector<std::array<double, 2>> merged;
  for (auto& a : arcs) {
    if (!merged.empty() && a[0] <= merged.back()[1] + 1e-9)
      merged.back()[1] = std::max(merged.back()[1], a[1]);
    else
      merged.push_back(a);
  }
  if (merged.size() > 1 && merged.back()[1] >= merged.front()[0] + two_pi - 1e-9) {
    merged.front()[0] = merged.back()[0] - two_pi;
    merged.pop_back();
  }
  double total = 0.0;
  for (auto& a : merged) total += a[1] - a[0];
  if (total >= two_pi - 1e-9) {
    r.notes.push_back("computed gaps cover the circle; clamping to empty support");
    r.support.intervals.clear();
    r.n = 0;
    finish_counts(r, m1, m2);
    return r;
  }
  support_set s;
  s.domain = domain_kind::circle;
  for (size_t i = 0; i < merged.size(); ++i) {
    double end = merged[i][1];
    double next = (i + 1 < merged.size()) ? merged[i + 1][0] : merged[0][0] + two_pi;
    if (next - end > 1e-9) {
      double start = wrap_angle(end);
      double len = next - end;
      if (len < 1e-7)
        s.isolated_points.push_back(wrap_angle(start + 0.5 * len));
      else
        s.intervals.push_back({start, start + len});
    }
  }
  std::sort(s.intervals.begin(), s.intervals.end());
  r.support = s;
  r.n = s.component_count();
  finish_counts(r, m1, m2);
  return r;
}

bool component_count_check(const support_result& r) {
  if (r.kind == convolution_kind::additive) return r.n <= 2 * r.n1 * r.n2 - 1;
  return true; // circle bound is diagnostic only; half-line: no finite bound claimed
}

} // namespace freeconv
