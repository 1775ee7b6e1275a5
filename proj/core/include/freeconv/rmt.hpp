#ifndef FREECONV_RMT_HPP
#define FREECONV_RMT_HPP

#include <cstdint>

#include "freeconv/measure.hpp"

namespace freeconv {

struct oracle_config {
  int n = 2000;
  int trials = 20;
  std::uint64_t seed = 1;
  double gap_threshold = 0.05;
};

/// Column-major complex matrix, sized for LAPACK calls.
struct cmatrix {
  int rows = 0, cols = 0;
  std::vector<cdouble> a;
  cmatrix() = default;
  cmatrix(int r, int c) : rows(r), cols(c), a(static_cast<size_t>(r) * c) {}
  cdouble& at(int i, int j) { return a[i + static_cast<size_t>(j) * rows]; }
  const cdouble& at(int i, int j) const { return a[i + static_cast<size_t>(j) * rows]; }
};

/// Haar-distributed unitary: QR of an i.i.d. standard complex Gaussian
/// matrix with the R-diagonal phase correction. Deterministic in the seed.
cmatrix sample_haar_unitary(int n, std::uint64_t seed);

struct empirical_spectrum_result {
  std::vector<double> eigenvalues; // pooled and sorted; angles on the circle
  std::vector<std::vector<double>> per_trial;
  support_set estimated_support;   // split at gaps wider than gap_threshold
  std::vector<double> hist_edges;
  std::vector<int> hist_counts;
};

/// Pooled spectra of quantile-diagonal matrix models conjugated by
/// independent Haar unitaries:
///   additive        D1 + U D2 U*
///   mult_halfline   D2^{1/2} U D1 U* D2^{1/2}
///   mult_circle     D1 V D2 V* (unitary diagonals; eigenvalue angles)
/// Trials run concurrently on per-trial RNG streams derived from
/// (seed, trial); the pooled result does not depend on scheduling.
empirical_spectrum_result empirical_spectrum(convolution_kind kind, const measure& m1,
                                             const measure& m2, const oracle_config& cfg);

} // namespace freeconv

#endif
