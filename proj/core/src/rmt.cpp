#include "freeconv/rmt.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <future>
#include <thread>

#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <cblas.h>
#include <lapacke.h>

extern "C" void openblas_set_num_threads(int) __attribute__((weak));

namespace freeconv {

namespace {

std::uint64_t trial_seed(std::uint64_t seed, int trial) {
  std::uint64_t s = seed + 0x9e3779b97f4a7c15ull * (static_cast<std::uint64_t>(trial) + 1);
  return splitmix64(s);
}

void fill_gaussian(cmatrix& g, std::uint64_t seed) {
  gaussian_stream stream(seed);
  for (auto& z : g.a) z = stream.next_complex();
}

void check_lapack(int info, const char* what) {
  if (info != 0) fail(errc::non_hermitian_fallout, std::string(what) + " failed");
}

// QR factor in place; returns tau. Columns of Q get the phase correction
// conj(R_kk/|R_kk|) so that Q is Haar rather than QR-gauge-fixed.
std::vector<cdouble> qr_in_place(cmatrix& g, std::vector<cdouble>& phases) {
  std::vector<cdouble> tau(g.cols);
  check_lapack(LAPACKE_zgeqrf(LAPACK_COL_MAJOR, g.rows, g.cols, g.a.data(), g.rows, tau.data()),
               "zgeqrf");
  phases.resize(g.cols);
  for (int k = 0; k < g.cols; ++k) {
    cdouble r = g.at(k, k);
    phases[k] = std::abs(r) > 0.0 ? std::conj(r / std::abs(r)) : cdouble(1.0, 0.0);
  }
  return tau;
}

// First `cols` columns of the Haar unitary defined by the factorization.
cmatrix q_columns(cmatrix& qr, const std::vector<cdouble>& tau,
                  const std::vector<cdouble>& phases, int cols) {
  int n = qr.rows;
  cmatrix c(n, cols);
  for (int j = 0; j < cols; ++j) c.at(j, j) = 1.0;
  check_lapack(LAPACKE_zunmqr(LAPACK_COL_MAJOR, 'L', 'N', n, cols, n, qr.a.data(), n, tau.data(),
                              c.a.data(), n),
               "zunmqr");
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < n; ++i) c.at(i, j) *= phases[j];
  return c;
}

cmatrix full_q(cmatrix& qr, const std::vector<cdouble>& tau, const std::vector<cdouble>& phases) {
  int n = qr.rows;
  cmatrix u = qr;
  check_lapack(LAPACKE_zungqr(LAPACK_COL_MAJOR, n, n, n, u.a.data(), n, tau.data()), "zungqr");
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) u.at(i, j) *= phases[j];
  return u;
}

void spot_check_unitary(const cmatrix& u, int cols) {
  int n = u.rows;
  int probes = std::min(3, cols);
  for (int j = 0; j < probes; ++j) {
    cdouble d = 0.0;
    for (int i = 0; i < n; ++i) d += std::conj(u.at(i, j)) * u.at(i, j);
    if (std::abs(d - 1.0) > 1e-10) fail(errc::non_hermitian_fallout, "column norm drift");
    if (cols > 1) {
      int k = (j + 1) % probes;
      if (k != j) {
        cdouble c = 0.0;
        for (int i = 0; i < n; ++i) c += std::conj(u.at(i, j)) * u.at(i, k);
        if (std::abs(c) > 1e-10) fail(errc::non_hermitian_fallout, "column orthogonality drift");
      }
    }
  }
}

std::vector<double> hermitian_eigenvalues(cmatrix& h) {
  std::vector<double> w(h.rows);
  check_lapack(
      LAPACKE_zheevd(LAPACK_COL_MAJOR, 'N', 'U', h.rows, h.a.data(), h.rows, w.data()), "zheevd");
  return w;
}

std::vector<double> singular_values(cmatrix& x) {
  std::vector<double> s(std::min(x.rows, x.cols));
  check_lapack(LAPACKE_zgesdd(LAPACK_COL_MAJOR, 'N', x.rows, x.cols, x.a.data(), x.rows, s.data(),
                              nullptr, 1, nullptr, 1),
               "zgesdd");
  return s;
}

struct two_valued {
  bool yes = false;
  double lo = 0.0, hi = 0.0; // the two diagonal values (lo = smallest)
  int lo_count = 0;
};

two_valued detect_two_valued(const std::vector<double>& d) {
  two_valued t;
  t.lo = d.front();
  t.hi = d.back();
  if (t.lo == t.hi) return t; // constant: handled by the commuting shortcut
  for (double v : d) {
    if (v == t.lo)
      t.lo_count++;
    else if (v != t.hi)
      return t;
  }
  t.yes = true;
  return t;
}

// Spectrum of an operator in the algebra generated by a coordinate
// projection P (rank rp) and a Haar-rotated projection Q (rank rq),
// assembled from the principal angles: 2x2 rotation blocks for singular
// values in (0,1) plus the four corner eigenspaces.
template <typename BlockFn, typename CornerFn>
void two_projection_spectrum(int n, int rp, int rq, const std::vector<double>& sigma,
                             BlockFn block, CornerFn corner, std::vector<cdouble>& out) {
  int m = std::min(rp, rq);
  int forced_overlap = std::max(0, rp + rq - n);
  for (int k = 0; k < m; ++k) {
    if (k < forced_overlap) {
      out.push_back(corner(true, true));
    } else {
      double c2 = std::min(1.0, sigma[k] * sigma[k]);
      auto pr = block(c2);
      out.push_back(pr.first);
      out.push_back(pr.second);
    }
  }
  for (int k = 0; k < rp - m; ++k) out.push_back(corner(true, false));
  for (int k = 0; k < rq - m; ++k) out.push_back(corner(false, true));
  int rest = n - rp - rq + forced_overlap;
  for (int k = 0; k < rest; ++k) out.push_back(corner(false, false));
}

struct trial_ctx {
  convolution_kind kind;
  const std::vector<double>* d1;
  const std::vector<double>* d2;
  int n;
  std::uint64_t seed;
};

std::vector<double> run_trial(const trial_ctx& tc) {
  const int n = tc.n;
  const std::vector<double>& d1 = *tc.d1;
  const std::vector<double>& d2 = *tc.d2;

  // Commuting shortcut: a constant diagonal never needs the unitary.
  auto constant = [](const std::vector<double>& d) { return d.front() == d.back(); };
  if (tc.kind == convolution_kind::additive && (constant(d1) || constant(d2))) {
    const std::vector<double>& base = constant(d2) ? d1 : d2;
    double c = constant(d2) ? d2.front() : d1.front();
    std::vector<double> ev(base);
    for (double& v : ev) v += c;
    return ev;
  }
  if (tc.kind == convolution_kind::mult_halfline && (constant(d1) || constant(d2))) {
    const std::vector<double>& base = constant(d2) ? d1 : d2;
    double c = constant(d2) ? d2.front() : d1.front();
    std::vector<double> ev(base);
    for (double& v : ev) v *= c;
    return ev;
  }
  if (tc.kind == convolution_kind::mult_circle && (constant(d1) || constant(d2))) {
    const std::vector<double>& base = constant(d2) ? d1 : d2;
    double c = constant(d2) ? d2.front() : d1.front();
    std::vector<double> ev(base);
    for (double& v : ev) v = wrap_angle(v + c);
    std::sort(ev.begin(), ev.end());
    return ev;
  }

  cmatrix g(n, n);
  fill_gaussian(g, tc.seed);
  std::vector<cdouble> phases;
  std::vector<cdouble> tau = qr_in_place(g, phases);

  two_valued t1 = detect_two_valued(d1);
  two_valued t2 = detect_two_valued(d2);

  std::vector<double> ev;
  ev.reserve(n);

  if (t1.yes && t2.yes) {
    // Both diagonals are two-valued: the model lives in the algebra of two
    // projections and the spectrum follows from the principal angles of a
    // corner block of U.
    int rp, rq;
    const two_valued *tp, *tq;
    if (tc.kind == convolution_kind::mult_halfline) {
      tp = &t2;
      tq = &t1;
    } else {
      tp = &t1;
      tq = &t2;
    }
    rp = tp->lo_count;
    rq = tq->lo_count;
    cmatrix y = q_columns(g, tau, phases, rq);
    spot_check_unitary(y, rq);
    cmatrix x(rp, rq);
    for (int j = 0; j < rq; ++j)
      for (int i = 0; i < rp; ++i) x.at(i, j) = y.at(i, j);
    std::vector<double> sigma = singular_values(x);

    std::vector<cdouble> vals;
    vals.reserve(n);
    if (tc.kind == convolution_kind::additive) {
      double sh = t1.hi + t2.hi, al = t1.lo - t1.hi, be = t2.lo - t2.hi;
      two_projection_spectrum(
          n, rp, rq, sigma,
          [&](double c2) {
            double s2 = 1.0 - c2;
            double disc = std::sqrt(std::max(0.0, (al + be) * (al + be) - 4.0 * al * be * s2));
            return std::pair<cdouble, cdouble>(sh + 0.5 * (al + be + disc),
                                               sh + 0.5 * (al + be - disc));
          },
          [&](bool p, bool q) { return cdouble(sh + (p ? al : 0.0) + (q ? be : 0.0), 0.0); },
          vals);
      for (cdouble v : vals) ev.push_back(std::real(v));
    } else if (tc.kind == convolution_kind::mult_halfline) {
      double a2 = tp->lo, b2 = tp->hi, a1 = tq->lo, b1 = tq->hi;
      two_projection_spectrum(
          n, rp, rq, sigma,
          [&](double c2) {
            double s2 = 1.0 - c2;
            double tr = a2 * (a1 * c2 + b1 * s2) + b2 * (a1 * s2 + b1 * c2);
            double det = a1 * b1 * a2 * b2;
            double disc = std::sqrt(std::max(0.0, tr * tr - 4.0 * det));
            return std::pair<cdouble, cdouble>(0.5 * (tr + disc), 0.5 * (tr - disc));
          },
          [&](bool p, bool q) { return cdouble((p ? a2 : b2) * (q ? a1 : b1), 0.0); },
          vals);
      for (cdouble v : vals) ev.push_back(std::real(v));
    } else {
      cdouble al1 = std::polar(1.0, t1.lo), be1 = std::polar(1.0, t1.hi);
      cdouble al2 = std::polar(1.0, t2.lo), be2 = std::polar(1.0, t2.hi);
      two_projection_spectrum(
          n, rp, rq, sigma,
          [&](double c2) {
            double s2 = 1.0 - c2;
            cdouble tr = al1 * (al2 * c2 + be2 * s2) + be1 * (al2 * s2 + be2 * c2);
            cdouble det = al1 * be1 * al2 * be2;
            cdouble disc = std::sqrt(tr * tr - 4.0 * det);
            cdouble u = 0.5 * (tr + disc), v = 0.5 * (tr - disc);
            u /= std::abs(u);
            v /= std::abs(v);
            return std::pair<cdouble, cdouble>(u, v);
          },
          [&](bool p, bool q) { return (p ? al1 : be1) * (q ? al2 : be2); },
          vals);
      for (cdouble v : vals) ev.push_back(wrap_angle(std::arg(v)));
    }

    // Trace consistency against the partial columns.
    std::vector<double> qi(n, 0.0);
    for (int j = 0; j < rq; ++j)
      for (int i = 0; i < n; ++i) qi[i] += std::norm(y.at(i, j));
    if (tc.kind == convolution_kind::additive) {
      double tr_exact = 0.0, tr_sum = 0.0;
      for (int i = 0; i < n; ++i) tr_exact += d1[i] + d2[i];
      for (double v : ev) tr_sum += v;
      double scale = std::abs(t1.hi) + std::abs(t2.hi) + std::abs(t1.lo) + std::abs(t2.lo) + 1.0;
      if (std::abs(tr_exact - tr_sum) > 1e-7 * n * scale)
        fail(errc::non_hermitian_fallout, "trace mismatch in the projection reduction");
    } else if (tc.kind == convolution_kind::mult_halfline) {
      double tr_model = 0.0, tr_sum = 0.0;
      double b1 = tq->hi, al1 = tq->lo - tq->hi;
      for (int i = 0; i < n; ++i) tr_model += d2[i] * (b1 + al1 * qi[i]);
      for (double v : ev) tr_sum += v;
      double scale = (std::abs(t1.hi) + 1.0) * (std::abs(t2.hi) + 1.0);
      if (std::abs(tr_model - tr_sum) > 1e-7 * n * scale)
        fail(errc::non_hermitian_fallout, "trace mismatch in the projection reduction");
    } else {
      cdouble tr_model = 0.0, tr_sum = 0.0;
      cdouble b2c = std::polar(1.0, t2.hi);
      cdouble al2c = std::polar(1.0, t2.lo) - b2c;
      for (int i = 0; i < n; ++i)
        tr_model += std::polar(1.0, d1[i]) * (b2c + al2c * qi[i]);
      for (double v : ev) tr_sum += std::polar(1.0, v);
      if (std::abs(tr_model - tr_sum) > 1e-7 * n)
        fail(errc::non_hermitian_fallout, "trace mismatch in the projection reduction");
    }

    std::sort(ev.begin(), ev.end());
    return ev;
  }

  // General dense path.
  cmatrix u = full_q(g, tau, phases);
  spot_check_unitary(u, n);

  if (tc.kind == convolution_kind::additive) {
    // H = D1 + U D2 U^H = D1 + dmin I + Y Y^H with Y = U sqrt(D2 - dmin).
    double dmin = *std::min_element(d2.begin(), d2.end());
    cmatrix y = u;
    for (int j = 0; j < n; ++j) {
      double s = std::sqrt(std::max(0.0, d2[j] - dmin));
      for (int i = 0; i < n; ++i) y.at(i, j) *= s;
    }
    cmatrix h(n, n);
    cblas_zherk(CblasColMajor, CblasUpper, CblasNoTrans, n, n, 1.0, y.a.data(), n, 0.0,
                h.a.data(), n);
    for (int i = 0; i < n; ++i) h.at(i, i) += d1[i] + dmin;
    std::vector<double> w = hermitian_eigenvalues(h);
    double tr_exact = 0.0, tr_sum = 0.0;
    for (int i = 0; i < n; ++i) tr_exact += d1[i] + d2[i];
    for (double v : w) tr_sum += v;
    double scale = 1.0 + std::abs(d1.front()) + std::abs(d1.back()) + std::abs(d2.front()) +
                   std::abs(d2.back());
    if (std::abs(tr_exact - tr_sum) > 1e-7 * n * scale)
      fail(errc::non_hermitian_fallout, "trace mismatch in the dense path");
    return w;
  }

  if (tc.kind == convolution_kind::mult_halfline) {
    // B = Z Z^H with Z = D2^{1/2} U D1^{1/2}.
    cmatrix z = u;
    for (int j = 0; j < n; ++j) {
      double cj = std::sqrt(std::max(0.0, d1[j]));
      for (int i = 0; i < n; ++i) z.at(i, j) *= cj * std::sqrt(std::max(0.0, d2[i]));
    }
    cmatrix b(n, n);
    cblas_zherk(CblasColMajor, CblasUpper, CblasNoTrans, n, n, 1.0, z.a.data(), n, 0.0,
                b.a.data(), n);
    std::vector<double> w = hermitian_eigenvalues(b);
    return w;
  }

  // mult_circle: M = D1 V D2 V^H, unitary; eigenangles through the Cayley
  // transform of a derotated copy.
  cmatrix w = u;
  for (int j = 0; j < n; ++j) {
    cdouble ph = std::polar(1.0, d2[j]);
    for (int i = 0; i < n; ++i) w.at(i, j) *= ph;
  }
  cmatrix mmat(n, n);
  cdouble one(1.0, 0.0), zero(0.0, 0.0);
  cblas_zgemm(CblasColMajor, CblasNoTrans, CblasConjTrans, n, n, n, &one, w.a.data(), n,
              u.a.data(), n, &zero, mmat.a.data(), n);
  for (int j = 0; j < n; ++j) {
    // left-multiply by D1
    for (int i = 0; i < n; ++i) mmat.at(i, j) *= std::polar(1.0, d1[i]);
  }
  double alpha = wrap_angle(2.39996322972865332 * (1.0 + static_cast<double>(tc.seed % 1024)));
  cdouble derot = std::polar(1.0, -alpha);
  cmatrix lhs(n, n), rhs(n, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      cdouble mij = derot * mmat.at(i, j);
      lhs.at(i, j) = (i == j ? one : zero) - mij;
      rhs.at(i, j) = (i == j ? one : zero) + mij;
    }
  std::vector<lapack_int> piv(n);
  check_lapack(LAPACKE_zgesv(LAPACK_COL_MAJOR, n, n, lhs.a.data(), n, piv.data(), rhs.a.data(), n),
               "zgesv");
  // X = (I - M')^{-1}(I + M') is skew-Hermitian for unitary M'; K = iX is
  // Hermitian with eigenvalues -cot(theta'/2).
  cmatrix k(n, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      k.at(i, j) = cdouble(0.0, 0.5) * (rhs.at(i, j) - std::conj(rhs.at(j, i)));
  std::vector<double> kw = hermitian_eigenvalues(k);
  std::vector<double> angles(n);
  for (int i = 0; i < n; ++i) angles[i] = wrap_angle(2.0 * std::atan2(1.0, -kw[i]) + alpha);
  std::sort(angles.begin(), angles.end());
  // trace check: sum of eigenvalues vs trace of M
  cdouble tr_model = 0.0, tr_sum = 0.0;
  for (int i = 0; i < n; ++i) tr_model += mmat.at(i, i);
  for (double a : angles) tr_sum += std::polar(1.0, a);
  if (std::abs(tr_model - tr_sum) > 1e-6 * n)
    fail(errc::non_hermitian_fallout, "trace mismatch in the Cayley path");
  return angles;
}

} // namespace

cmatrix sample_haar_unitary(int n, std::uint64_t seed) {
  if (n < 1) fail(errc::domain_violation, "matrix size must be >= 1");
  cmatrix g(n, n);
  fill_gaussian(g, seed);
  std::vector<cdouble> phases;
  std::vector<cdouble> tau = qr_in_place(g, phases);
  return full_q(g, tau, phases);
}

empirical_spectrum_result empirical_spectrum(convolution_kind kind, const measure& m1,
                                             const measure& m2, const oracle_config& cfg) {
  if (cfg.n < 2 || cfg.trials < 1) fail(errc::domain_violation, "need n >= 2 and trials >= 1");
  const bool circ = kind == convolution_kind::mult_circle;
  if (circ && (m1.domain != domain_kind::circle || m2.domain != domain_kind::circle))
    fail(errc::domain_violation, "circle oracle needs circle measures");
  if (kind == convolution_kind::mult_halfline)
    for (const measure* m : {&m1, &m2})
      if (m->support_min() < -1e-12)
        fail(errc::domain_violation, "half-line oracle needs nonnegative measures");

  const int n = cfg.n;
  std::vector<double> d1(n), d2(n);
  for (int i = 0; i < n; ++i) {
    double s = (i + 0.5) / n;
    d1[i] = circ ? circle_quantile(m1, s) : quantile(m1, s);
    d2[i] = circ ? circle_quantile(m2, s) : quantile(m2, s);
  }

  if (openblas_set_num_threads) openblas_set_num_threads(1);

  int workers = std::min<int>(cfg.trials, std::max(1u, std::thread::hardware_concurrency()));
  std::vector<std::future<std::vector<double>>> futs;
  futs.reserve(cfg.trials);
  for (int t = 0; t < cfg.trials; ++t) {
    trial_ctx tc{kind, &d1, &d2, n, trial_seed(cfg.seed, t)};
    if (workers > 1)
      futs.push_back(std::async(std::launch::async, run_trial, tc));
    else
      futs.push_back(std::async(std::launch::deferred, run_trial, tc));
    if (workers > 1 && static_cast<int>(futs.size()) >= workers && t + 1 < cfg.trials) {
      // Keep at most `workers` trials in flight.
      futs[futs.size() - static_cast<size_t>(workers)].wait();
    }
  }

  empirical_spectrum_result out;
  out.eigenvalues.reserve(static_cast<size_t>(n) * cfg.trials);
  out.per_trial.reserve(cfg.trials);
  for (auto& f : futs) {
    out.per_trial.push_back(f.get());
    const auto& ev = out.per_trial.back();
    out.eigenvalues.insert(out.eigenvalues.end(), ev.begin(), ev.end());
  }
  std::sort(out.eigenvalues.begin(), out.eigenvalues.end());

  // Estimated support: split the pooled sample at gaps above the threshold.
  support_set s;
  s.domain = circ ? domain_kind::circle : (kind == convolution_kind::mult_halfline
                                               ? domain_kind::half_line
                                               : domain_kind::real_line);
  const auto& ev = out.eigenvalues;
  size_t start = 0;
  for (size_t i = 1; i <= ev.size(); ++i) {
    bool cut = i == ev.size() || ev[i] - ev[i - 1] > cfg.gap_threshold;
    if (cut) {
      if (ev[i - 1] - ev[start] < 1e-12)
        s.isolated_points.push_back(ev[start]);
      else
        s.intervals.push_back({ev[start], ev[i - 1]});
      start = i;
    }
  }
  if (circ && s.intervals.size() + s.isolated_points.size() > 1) {
    // Wrap merge: no gap across 0 if first and last are close mod 2*pi.
    double first = ev.front(), last = ev.back();
    if (first + two_pi - last <= cfg.gap_threshold && !s.intervals.empty()) {
      auto& a = s.intervals;
      if (a.size() > 1 && std::abs(a.front()[0] - first) < 1e-12 &&
          std::abs(a.back()[1] - last) < 1e-12) {
        a.front()[0] = a.back()[0] - two_pi;
        a.pop_back();
        double start0 = wrap_angle(a.front()[0]);
        double len = a.front()[1] - (a.front()[0]);
        a.front() = {start0, start0 + len};
        std::sort(a.begin(), a.end());
      }
    }
  }
  out.estimated_support = s;

  // Histogram over the sample range.
  const int bins = 64;
  double lo = ev.front(), hi = ev.back();
  if (hi <= lo) hi = lo + 1.0;
  out.hist_edges.resize(bins + 1);
  out.hist_counts.assign(bins, 0);
  for (int b = 0; b <= bins; ++b) out.hist_edges[b] = lo + (hi - lo) * b / bins;
  for (double v : ev) {
    int b = std::min<int>(bins - 1, static_cast<int>((v - lo) / (hi - lo) * bins));
    out.hist_counts[std::max(0, b)]++;
  }
  return out;
}

} // namespace freeconv
