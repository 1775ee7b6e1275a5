#ifndef FREECONV_SUPPORT_HPP
#define FREECONV_SUPPORT_HPP

#include <string>

#include "freeconv/measure.hpp"
#include "freeconv/subordination.hpp"
#include "freeconv/transforms.hpp"

namespace freeconv {

struct support_config {
  int samples = 512;            // initial samples per pair curve
  double tol_t = 1e-9;          // bisection width for criterion sign changes
  double boundary_band = 1e-10; // |criterion| below this counts as boundary
  double merge_rel = 1e-7;      // relative tolerance when merging gap images
  subordination_config sub;     // used by callers for round trips
};

/// Maximal interval of the complement of a support on which the matching
/// transform (F, or psi on the multiplicative branches) is finite, monotone
/// and of one sign class.
struct gap_component {
  double lo = 0.0, hi = 0.0;
  bool lo_inf = false, hi_inf = false;
  int parent = 0;     // 1 or 2
  int sign_class = 0; // additive: sign of F; half-line: psi class; circle: 0
  double match_lo = 0.0, match_hi = 0.0; // transform values at the offset ends
};

/// One solution curve of match_1(t1) = match_2(t2) over a component pair,
/// with the pair criterion tabulated along it.
struct pair_curve {
  gap_component comp1, comp2;
  std::vector<double> t1, t2, criterion;
  int d_segments = 0; // criterion-negative sub-segments found
  bool matched_ok = true;
  bool trace_monotone = true; // circle: Im psi monotone along the arc
};

struct gap_info {
  double lo = 0.0, hi = 0.0; // gap of supp(mu); angles on the circle
  bool lo_unbounded = false, hi_unbounded = false;
  // Witness subordination pairs at the two ends of the generating segment.
  double t1_lo = 0.0, t2_lo = 0.0, t1_hi = 0.0, t2_hi = 0.0;
};

struct support_result {
  convolution_kind kind = convolution_kind::additive;
  support_set support;
  std::vector<gap_info> gaps;
  std::vector<pair_curve> curves;
  int n = 0, n1 = 0, n2 = 0;
  bool bound_satisfied = true;
  bool all_converged = true;
  std::vector<int> d_per_e;          // circle: D-segments per E-component
  std::vector<std::string> notes;
};

struct pair_check {
  bool matches = false;
  double value = 0.0;
};

/// Additive pair criterion at real points off the supports:
/// matches iff G_1(t1) = G_2(t2) (relative 1e-9), value =
/// (F_1'(t1) - 1)(F_2'(t2) - 1) - 1; negative value means the pair
/// witnesses a point of the complement of supp(mu).
pair_check pair_criterion_additive(const measure& m1, const measure& m2, double t1, double t2);

/// Inverse of the subordination homeomorphism: t = t1 + t2 - F_1(t1).
double gap_point_from_pair_additive(const measure& m1, const measure& m2, double t1, double t2);

support_result support_additive(const measure& m1, const measure& m2,
                                const support_config& cfg = {});
support_result support_mult_halfline(const measure& m1, const measure& m2,
                                     const support_config& cfg = {});
support_result support_mult_circle(const measure& m1, const measure& m2,
                                   const support_config& cfg = {});

/// Component-count bound n <= 2 n1 n2 - 1 for the additive convolution;
/// always true (diagnostic only) on the circle.
bool component_count_check(const support_result& r);

} // namespace freeconv

#endif
