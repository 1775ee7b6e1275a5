#ifndef FREECONV_MEASURE_HPP
#define FREECONV_MEASURE_HPP

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "freeconv/errors.hpp"
#include "freeconv/numerics.hpp"

namespace freeconv {

enum class domain_kind { real_line, half_line, circle };

enum class convolution_kind { additive, mult_halfline, mult_circle };

struct atom {
  double position = 0.0; // angle in radians on the circle
  double mass = 0.0;
};

enum class ac_family {
  semicircle,      // center, variance
  arcsine,         // interval [a, b]
  marchenko_pastur,// shape lambda; ac part only, unit mass = min(1, 1/lambda)
  cauchy,          // location, scale; only as a full measure on the real line
  uniform,         // constant density on [a, b]
  jacobi,          // normalizer * (t-a)^alpha * (b-t)^beta on [a, b]
  table,           // piecewise-linear density through (nodes, weights)
};

const char* ac_family_name(ac_family f);

struct ac_component {
  ac_family family = ac_family::uniform;
  double a = 0.0, b = 1.0; // support interval (angles on the circle)
  double mass = 1.0;       // integral of the density over [a, b]

  double center = 0.0, variance = 1.0;          // semicircle
  double lambda = 1.0;                          // marchenko_pastur
  double location = 0.0, scale = 1.0;           // cauchy
  double alpha = 0.0, beta = 0.0, normalizer = 1.0; // jacobi
  std::vector<double> nodes, weights;           // table

  // Filled by validate(): discretization used by generic transforms.
  std::vector<double> quad_x, quad_w;
  // Filled by validate() for families without a closed-form CDF.
  std::vector<double> cdf_x, cdf_y;

  double density_at(double t) const;
  double cdf_local(double t) const; // mass of [a, t]
  bool has_closed_form_g() const;
};

/// Minimal closed cover of a support: disjoint sorted intervals plus
/// isolated points. Interval endpoints may be +-infinity; on the circle
/// intervals are arcs (start, end) with end in (start, start + 2*pi].
struct support_set {
  domain_kind domain = domain_kind::real_line;
  std::vector<std::array<double, 2>> intervals;
  std::vector<double> isolated_points;

  int component_count() const {
    return static_cast<int>(intervals.size() + isolated_points.size());
  }
  double distance(double x) const; // 0 if covered (angle metric on the circle)
  double min() const;
  double max() const;
  bool is_full_circle() const;
};

class measure {
public:
  domain_kind domain = domain_kind::real_line;
  std::vector<atom> atoms;
  std::vector<ac_component> ac;

  bool validated() const { return validated_; }
  int quad_nodes() const { return quad_nodes_; }

  bool is_point_mass() const;
  bool is_two_atom() const; // exactly two atoms, no ac part
  bool is_haar() const;     // uniform mass-1 density over the whole circle
  bool compact() const;     // no cauchy component

  double total_mass() const;
  double cdf(double t) const; // mu((-inf, t]); mu(arc [0, t]) on the circle
  double mean() const;
  double variance() const;
  double density_at(double t) const;

  const support_set& support() const { return support_; }
  double support_min() const { return support_.min(); }
  double support_max() const { return support_.max(); }

private:
  friend measure validate(measure m, int quad_nodes);
  bool validated_ = false;
  int quad_nodes_ = 200;
  support_set support_;
};

/// Checks invariants, normalizes total mass (if within 1e-6 of 1), sorts
/// atoms, and attaches quadrature/CDF caches. Every other operation
/// requires a validated measure.
measure validate(measure m, int quad_nodes = 200);

/// Right-continuous generalized inverse of the distribution function,
/// x(s) = inf{t : F(t) > s}. Real-line and half-line measures only.
double quantile(const measure& m, double s);

/// Internal analogue of quantile over angles in [0, 2*pi); used by the
/// Monte Carlo oracle for circle measures.
double circle_quantile(const measure& m, double s);

support_set support_components(const measure& m);

/// Absolutely continuous approximation in the sense of the quantile
/// coupling: same component count, components widened to closed intervals,
/// sqrt-edge densities (3/2-power distribution function at the edges),
/// distribution functions equal on a grid of step h < eps, and quantile
/// sup-distance below eps. Optionally reports the grid step used.
measure jacobi_approximate(const measure& m, double eps, double* grid_step_out = nullptr);

// Convenience builders used across tests and tools.
measure make_atomic(domain_kind d, std::vector<atom> atoms);
measure make_semicircle(double center, double variance);
measure make_arcsine(double a, double b);
measure make_cauchy(double location, double scale);
measure make_uniform(double a, double b, double mass = 1.0);
measure make_marchenko_pastur(double lambda);
measure make_haar();

} // namespace freeconv

#endif
