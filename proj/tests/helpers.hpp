#ifndef FREECONV_TEST_HELPERS_HPP
#define FREECONV_TEST_HELPERS_HPP

#include <cstdint>
#include <vector>

#include "freeconv/measure.hpp"
#include "freeconv/numerics.hpp"

namespace fct {

using namespace freeconv;

inline measure bernoulli() {
  return make_atomic(domain_kind::real_line, {{-1.0, 0.5}, {1.0, 0.5}});
}

inline measure two_atoms_13() {
  return make_atomic(domain_kind::half_line, {{1.0, 0.5}, {3.0, 0.5}});
}

inline measure free_projection() {
  return make_atomic(domain_kind::half_line, {{0.0, 0.5}, {1.0, 0.5}});
}

inline measure circle_two_atoms(double theta) {
  return make_atomic(domain_kind::circle, {{wrap_angle(theta), 0.5}, {wrap_angle(-theta), 0.5}});
}

inline measure circle_pm_one() {
  return make_atomic(domain_kind::circle, {{0.0, 0.5}, {pi, 0.5}});
}

struct rng {
  std::uint64_t state;
  explicit rng(std::uint64_t seed) : state(seed) {}
  double uniform(double lo, double hi) {
    return lo + (hi - lo) * (splitmix64(state) >> 11) * 0x1.0p-53;
  }
  int uniform_int(int lo, int hi) { // inclusive
    return lo + static_cast<int>(splitmix64(state) % static_cast<std::uint64_t>(hi - lo + 1));
  }
};

/// One ac block, optionally with embedded atoms: connected support.
inline measure random_connected(std::uint64_t seed, bool halfline = false) {
  rng r(seed);
  double lo = halfline ? r.uniform(0.2, 2.0) : r.uniform(-2.5, 1.0);
  double width = r.uniform(0.6, 2.5);
  int kind = r.uniform_int(0, 2);
  int n_atoms = r.uniform_int(0, 2);
  double atom_mass_total = n_atoms > 0 ? r.uniform(0.1, 0.4) : 0.0;

  measure m;
  m.domain = halfline ? domain_kind::half_line : domain_kind::real_line;
  ac_component c;
  if (kind == 0) {
    c.family = ac_family::uniform;
    c.a = lo;
    c.b = lo + width;
  } else if (kind == 1) {
    c.family = ac_family::jacobi; // semicircle-shaped bump
    c.a = lo;
    c.b = lo + width;
    c.alpha = 0.5;
    c.beta = 0.5;
    c.normalizer = 8.0 * (1.0 - atom_mass_total) / (pi * width * width);
  } else {
    c.family = ac_family::table;
    double mid = lo + 0.5 * width;
    c.nodes = {lo, lo + 0.25 * width, mid, lo + 0.8 * width, lo + width};
    c.weights = {0.2, 1.0, r.uniform(0.3, 1.5), 1.0, 0.1};
  }
  c.mass = 1.0 - atom_mass_total;
  m.ac.push_back(c);
  for (int i = 0; i < n_atoms; ++i) {
    atom at;
    at.position = lo + width * r.uniform(0.15 + 0.3 * i, 0.3 + 0.3 * i);
    at.mass = atom_mass_total / n_atoms;
    m.atoms.push_back(at);
  }
  // Normalize whatever the table block integrated to.
  double total = 0.0;
  for (auto& a : m.atoms) total += a.mass;
  measure probe = m;
  probe.atoms.clear();
  // validate() rescales within 1e-6 only; rescale the block mass here.
  if (kind == 2) {
    double block = 0.0;
    for (size_t i = 0; i + 1 < c.nodes.size(); ++i)
      block += 0.5 * (c.weights[i] + c.weights[i + 1]) * (c.nodes[i + 1] - c.nodes[i]);
    for (auto& w : m.ac[0].weights) w *= (1.0 - total) / block;
  }
  return validate(std::move(m));
}

/// 1..max_atoms atoms with well separated positions.
inline measure random_atomic(std::uint64_t seed, int max_atoms = 3, bool halfline = false) {
  rng r(seed);
  int k = r.uniform_int(1, max_atoms);
  std::vector<atom> atoms;
  double pos = halfline ? r.uniform(0.3, 1.0) : r.uniform(-3.0, -1.0);
  double mass_left = 1.0;
  for (int i = 0; i < k; ++i) {
    atom at;
    at.position = pos;
    at.mass = (i == k - 1) ? mass_left : mass_left * r.uniform(0.25, 0.6);
    mass_left -= (i == k - 1) ? 0.0 : at.mass;
    atoms.push_back(at);
    pos += r.uniform(0.5, 1.8);
  }
  return make_atomic(halfline ? domain_kind::half_line : domain_kind::real_line, atoms);
}

/// Compact measure with 1..3 well separated components (atoms or blocks).
inline measure random_compact(std::uint64_t seed) {
  rng r(seed);
  int comps = r.uniform_int(1, 3);
  measure m;
  m.domain = domain_kind::real_line;
  double pos = r.uniform(-3.0, -2.0);
  std::vector<double> masses(comps);
  double left = 1.0;
  for (int i = 0; i < comps; ++i) {
    masses[i] = (i == comps - 1) ? left : left * r.uniform(0.3, 0.6);
    left -= (i == comps - 1) ? 0.0 : masses[i];
  }
  for (int i = 0; i < comps; ++i) {
    if (r.uniform_int(0, 1) == 0) {
      m.atoms.push_back({pos, masses[i]});
      pos += r.uniform(0.8, 1.6);
    } else {
      double w = r.uniform(0.4, 1.2);
      ac_component c;
      c.family = ac_family::uniform;
      c.a = pos;
      c.b = pos + w;
      c.mass = masses[i];
      m.ac.push_back(c);
      pos += w + r.uniform(0.8, 1.6);
    }
  }
  return validate(std::move(m));
}

inline cdouble random_upper(std::uint64_t seed) {
  rng r(seed);
  return {r.uniform(-3.0, 3.0), r.uniform(0.05, 2.0)};
}

} // namespace fct

#endif
