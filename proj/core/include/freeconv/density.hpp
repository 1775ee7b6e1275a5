#ifndef FREECONV_DENSITY_HPP
#define FREECONV_DENSITY_HPP

#include "freeconv/measure.hpp"
#include "freeconv/subordination.hpp"

namespace freeconv {

enum class density_flag : char { ok = 0, edge = 1, not_converged = 2 };

struct density_grid {
  domain_kind domain = domain_kind::real_line;
  std::vector<double> points;
  std::vector<double> values;   // >= 0 (small negatives clipped)
  std::vector<double> eps_used; // smallest eps entering each value
  std::vector<density_flag> flags;

  /// Trapezoid mass against the grid (normalized Haar on the circle);
  /// 1 - integral is the "unlocated mass" diagnostic (atoms are never
  /// located by the inversion).
  double integral() const;
  double unlocated_mass() const { return 1.0 - integral(); }
};

/// Density of m1 boxplus m2 on a real grid via Stieltjes inversion of
/// G = 1/F1(omega1), Richardson-extrapolated in the two smallest eps of
/// the schedule.
density_grid density_additive(const measure& m1, const measure& m2,
                              const std::vector<double>& grid,
                              const subordination_config& cfg = {});

/// Density of m1 boxtimes m2 on (0, inf) via psi(1/w) + 1 = w G(w).
density_grid density_mult_halfline(const measure& m1, const measure& m2,
                                   const std::vector<double>& grid,
                                   const subordination_config& cfg = {});

/// Density w.r.t. normalized arclength on the circle: radial limit of
/// Re(1 + 2 psi(r e^{-i theta})).
density_grid density_mult_circle(const measure& m1, const measure& m2,
                                 const std::vector<double>& grid,
                                 const subordination_config& cfg = {});

} // namespace freeconv

#endif
