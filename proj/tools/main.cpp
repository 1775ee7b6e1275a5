#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "freeconv/density.hpp"
#include "freeconv/measure_io.hpp"
#include "freeconv/rmt.hpp"
#include "freeconv/subordination.hpp"
#include "freeconv/support.hpp"

using namespace freeconv;

namespace {

struct common_opts {
  double tol = 1e-12;
  double eps0 = 1e-2;
  double eps_ratio = 0.5;
  int max_iter = 100000;
  int quad_nodes = 200;
  std::string out;
  std::string format = "csv";
};

void add_common(CLI::App* cmd, common_opts& o) {
  cmd->add_option("--tol", o.tol, "fixed-point and residual tolerance");
  cmd->add_option("--eps0", o.eps0, "first boundary-extension epsilon");
  cmd->add_option("--eps-ratio", o.eps_ratio, "epsilon schedule ratio");
  cmd->add_option("--max-iter", o.max_iter, "iteration cap");
  cmd->add_option("--quad-nodes", o.quad_nodes, "Gauss-Legendre nodes per ac component");
  cmd->add_option("--out", o.out, "output file (stdout if omitted)");
  cmd->add_option("--format", o.format, "output format: csv or json")
      ->check(CLI::IsMember({"csv", "json"}));
}

subordination_config sub_config(const common_opts& o) {
  subordination_config cfg;
  cfg.tol = o.tol;
  cfg.eps0 = o.eps0;
  cfg.eps_ratio = o.eps_ratio;
  cfg.max_iter = o.max_iter;
  return cfg;
}

convolution_kind parse_kind(const std::string& k) {
  if (k == "add") return convolution_kind::additive;
  if (k == "mult-r") return convolution_kind::mult_halfline;
  if (k == "mult-t") return convolution_kind::mult_circle;
  fail(errc::parse_error, "kind must be add, mult-r or mult-t");
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) fail(errc::parse_error, "cannot write " + path);
  out << text;
}

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

std::string format_interval_endpoint(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

const char* flag_name(density_flag f) {
  switch (f) {
    case density_flag::ok: return "ok";
    case density_flag::edge: return "edge";
    case density_flag::not_converged: return "fail";
  }
  return "?";
}

int run_support(convolution_kind kind, const measure& m1, const measure& m2,
                const common_opts& o) {
  support_config cfg;
  cfg.sub = sub_config(o);
  support_result r = kind == convolution_kind::additive
                         ? support_additive(m1, m2, cfg)
                         : (kind == convolution_kind::mult_halfline
                                ? support_mult_halfline(m1, m2, cfg)
                                : support_mult_circle(m1, m2, cfg));
  std::ostringstream txt;
  for (const auto& iv : r.support.intervals)
    txt << "[" << format_interval_endpoint(iv[0]) << ", " << format_interval_endpoint(iv[1])
        << "]\n";
  for (double p : r.support.isolated_points) txt << "{" << format_interval_endpoint(p) << "}\n";
  txt << "components: " << r.n << "\n";
  txt << "n1: " << r.n1 << " n2: " << r.n2 << "\n";
  if (kind == convolution_kind::additive)
    txt << "bound: " << (r.bound_satisfied ? "satisfied" : "violated") << " (n=" << r.n
        << " vs 2*n1*n2-1=" << 2 * r.n1 * r.n2 - 1 << ")\n";
  if (kind == convolution_kind::mult_circle && !r.d_per_e.empty()) {
    txt << "d_per_e:";
    for (int d : r.d_per_e) txt << " " << d;
    txt << "\n";
  }
  for (const auto& note : r.notes) txt << "note: " << note << "\n";
  std::cout << txt.str();
  if (!o.out.empty()) {
    if (o.format == "json") {
      write_text(o.out, support_to_json(r) + "\n");
    } else {
      std::ostringstream csv;
      csv << "lo,hi\n";
      for (const auto& iv : r.support.intervals)
        csv << format_number(iv[0]) << "," << format_number(iv[1]) << "\n";
      for (double p : r.support.isolated_points)
        csv << format_number(p) << "," << format_number(p) << "\n";
      write_text(o.out, csv.str());
    }
  }
  return r.all_converged ? 0 : 2;
}

int run_density(convolution_kind kind, const measure& m1, const measure& m2,
                const std::vector<double>& grid, const common_opts& o) {
  subordination_config cfg = sub_config(o);
  density_grid d = kind == convolution_kind::additive
                       ? density_additive(m1, m2, grid, cfg)
                       : (kind == convolution_kind::mult_halfline
                              ? density_mult_halfline(m1, m2, grid, cfg)
                              : density_mult_circle(m1, m2, grid, cfg));
  std::ostringstream csv;
  csv << "x,density,eps_used,flag\n";
  for (size_t i = 0; i < d.points.size(); ++i)
    csv << format_number(d.points[i]) << "," << format_number(d.values[i]) << ","
        << format_number(d.eps_used[i]) << "," << flag_name(d.flags[i]) << "\n";
  write_text(o.out, csv.str());
  std::cerr << "unlocated_mass: " << format_number(d.unlocated_mass()) << "\n";
  bool failed = false;
  for (density_flag f : d.flags) failed |= f == density_flag::not_converged;
  return failed ? 2 : 0;
}

int run_omega(convolution_kind kind, const measure& m1, const measure& m2,
              const std::vector<cdouble>& points, const common_opts& o) {
  subordination_config cfg = sub_config(o);
  std::ostringstream csv;
  csv << "re,im,omega1_re,omega1_im,omega2_re,omega2_im,residual,iterations,converged\n";
  bool failed = false;
  for (cdouble z : points) {
    subordination_value sv;
    if (kind == convolution_kind::additive) {
      if (std::imag(z) > 0.0) {
        sv = omega_additive(m1, m2, z, cfg);
      } else {
        boundary_value b1 = boundary_extend(
            [&](cdouble w) { return omega_additive(m1, m2, w, cfg).omega1; }, std::real(z), cfg);
        boundary_value b2 = boundary_extend(
            [&](cdouble w) { return omega_additive(m1, m2, w, cfg).omega2; }, std::real(z), cfg);
        sv.omega1 = b1.value;
        sv.omega2 = b2.value;
        sv.converged = !b1.infinite && !b2.infinite;
        f_value f1 = recip_f(m1, sv.omega1);
        f_value f2 = recip_f(m2, sv.omega2);
        sv.f_value = f1.value;
        sv.residual = (f1.infinite || f2.infinite) ? 0.0 : std::abs(f1.value - f2.value);
      }
    } else if (kind == convolution_kind::mult_halfline) {
      sv = omega_mult_halfline(m1, m2, z, cfg);
    } else {
      sv = omega_mult_circle(m1, m2, z, cfg);
    }
    failed |= !sv.converged;
    csv << format_number(std::real(z)) << "," << format_number(std::imag(z)) << ","
        << format_number(std::real(sv.omega1)) << "," << format_number(std::imag(sv.omega1))
        << "," << format_number(std::real(sv.omega2)) << ","
        << format_number(std::imag(sv.omega2)) << "," << format_number(sv.residual) << ","
        << sv.iterations << "," << (sv.converged ? 1 : 0) << "\n";
  }
  write_text(o.out, csv.str());
  return failed ? 2 : 0;
}

int run_oracle(convolution_kind kind, const measure& m1, const measure& m2,
               const oracle_config& ocfg, const std::string& support_path,
               const common_opts& o) {
  empirical_spectrum_result r = empirical_spectrum(kind, m1, m2, ocfg);
  std::ostringstream txt;
  txt << "eigenvalues: " << r.eigenvalues.size() << "\n";
  txt << "range: [" << format_number(r.eigenvalues.front()) << ", "
      << format_number(r.eigenvalues.back()) << "]\n";
  txt << "estimated_components: " << r.estimated_support.component_count() << "\n";
  if (!support_path.empty()) {
    loaded_support ref = load_support_file(support_path);
    double max_dev = 0.0;
    for (double v : r.eigenvalues) max_dev = std::max(max_dev, ref.support.distance(v));
    bool all_hit = true;
    for (const auto& iv : ref.support.intervals) {
      double len = iv[1] - iv[0];
      if (!std::isfinite(len) || len <= 0.2) continue;
      bool hit = false;
      for (double v : r.eigenvalues)
        if (v >= iv[0] - 1e-12 && v <= iv[1] + 1e-12) {
          hit = true;
          break;
        }
      all_hit &= hit;
    }
    txt << "max_deviation: " << format_number(max_dev) << "\n";
    txt << "intervals_hit: " << (all_hit ? "yes" : "no") << "\n";
  }
  std::cout << txt.str();
  if (!o.out.empty()) {
    std::ostringstream csv;
    csv << "trial,index,value\n";
    for (size_t t = 0; t < r.per_trial.size(); ++t)
      for (size_t i = 0; i < r.per_trial[t].size(); ++i)
        csv << t << "," << i << "," << format_number(r.per_trial[t][i]) << "\n";
    write_text(o.out, csv.str());
  }
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"free convolution support, density and subordination toolkit"};
  app.require_subcommand(1);

  std::string kind_str = "add";
  std::vector<std::string> measure_paths;
  common_opts opts;

  // support
  auto* sup = app.add_subcommand("support", "support of the convolution");
  sup->add_option("kind", kind_str)->required();
  sup->add_option("measures", measure_paths)->expected(2);
  common_opts sup_opts;
  add_common(sup, sup_opts);

  // density
  auto* den = app.add_subcommand("density", "density on a grid");
  std::string den_kind = "add";
  std::vector<std::string> den_paths;
  std::vector<double> grid_spec;
  std::vector<double> point_list;
  den->add_option("kind", den_kind)->required();
  den->add_option("measures", den_paths)->expected(2);
  den->add_option("--grid", grid_spec, "lo hi count")->expected(3);
  den->add_option("--points", point_list, "explicit grid points");
  common_opts den_opts;
  add_common(den, den_opts);

  // omega
  auto* omg = app.add_subcommand("omega", "subordination functions at points");
  std::string omg_kind = "add";
  std::vector<std::string> omg_paths;
  std::vector<double> omg_points; // flat re,im pairs
  omg->add_option("kind", omg_kind)->required();
  omg->add_option("measures", omg_paths)->expected(2);
  omg->add_option("--points", omg_points, "flat list re1 im1 re2 im2 ...");
  common_opts omg_opts;
  add_common(omg, omg_opts);

  // oracle
  auto* orc = app.add_subcommand("oracle", "random-matrix Monte Carlo oracle");
  std::string orc_kind = "add";
  std::vector<std::string> orc_paths;
  std::string support_path;
  oracle_config ocfg;
  long long seed_opt = 1;
  orc->add_option("kind", orc_kind)->required();
  orc->add_option("measures", orc_paths)->expected(2);
  orc->add_option("--N", ocfg.n, "matrix size");
  orc->add_option("--trials", ocfg.trials, "number of Haar draws");
  orc->add_option("--seed", seed_opt, "RNG seed");
  orc->add_option("--gap-threshold", ocfg.gap_threshold, "support gap threshold");
  orc->add_option("--support", support_path, "computed support JSON to compare against");
  common_opts orc_opts;
  add_common(orc, orc_opts);

  // approx
  auto* apx = app.add_subcommand("approx", "Jacobi-type approximation of a measure");
  std::string apx_path;
  double apx_eps = 0.05;
  apx->add_option("measure", apx_path)->required();
  apx->add_option("--eps", apx_eps, "quantile coupling tolerance");
  common_opts apx_opts;
  add_common(apx, apx_opts);

  CLI11_PARSE(app, argc, argv);

  try {
    if (sup->parsed()) {
      measure m1 = load_measure_file(measure_paths.at(0), sup_opts.quad_nodes);
      measure m2 = load_measure_file(measure_paths.at(1), sup_opts.quad_nodes);
      return run_support(parse_kind(kind_str), m1, m2, sup_opts);
    }
    if (den->parsed()) {
      measure m1 = load_measure_file(den_paths.at(0), den_opts.quad_nodes);
      measure m2 = load_measure_file(den_paths.at(1), den_opts.quad_nodes);
      std::vector<double> grid = point_list;
      if (!grid_spec.empty()) {
        int count = static_cast<int>(grid_spec.at(2));
        if (count < 2) fail(errc::parse_error, "grid count must be >= 2");
        for (int i = 0; i < count; ++i)
          grid.push_back(grid_spec[0] + (grid_spec[1] - grid_spec[0]) * i / (count - 1.0));
      }
      if (grid.empty()) fail(errc::parse_error, "density needs --grid or --points");
      return run_density(parse_kind(den_kind), m1, m2, grid, den_opts);
    }
    if (omg->parsed()) {
      measure m1 = load_measure_file(omg_paths.at(0), omg_opts.quad_nodes);
      measure m2 = load_measure_file(omg_paths.at(1), omg_opts.quad_nodes);
      if (omg_points.empty() || omg_points.size() % 2 != 0)
        fail(errc::parse_error, "omega needs --points with re,im pairs");
      std::vector<cdouble> pts;
      for (size_t i = 0; i < omg_points.size(); i += 2)
        pts.emplace_back(omg_points[i], omg_points[i + 1]);
      return run_omega(parse_kind(omg_kind), m1, m2, pts, omg_opts);
    }
    if (orc->parsed()) {
      measure m1 = load_measure_file(orc_paths.at(0), orc_opts.quad_nodes);
      measure m2 = load_measure_file(orc_paths.at(1), orc_opts.quad_nodes);
      ocfg.seed = static_cast<std::uint64_t>(seed_opt);
      return run_oracle(parse_kind(orc_kind), m1, m2, ocfg, support_path, orc_opts);
    }
    if (apx->parsed()) {
      measure m = load_measure_file(apx_path, apx_opts.quad_nodes);
      double h = 0.0;
      measure nu = jacobi_approximate(m, apx_eps, &h);
      write_text(apx_opts.out, measure_to_json(nu) + "\n");
      std::cerr << "grid_step: " << format_number(h) << "\n";
      return 0;
    }
  } catch (const error& e) {
    std::cerr << "error: " << e.what() << "\n";
    errc c = e.code();
    bool numerical = c == errc::not_converged || c == errc::no_limit;
    return numerical ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
