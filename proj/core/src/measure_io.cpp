#include "freeconv/measure_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace freeconv {

using nlohmann::json;

namespace {

json finite_or_string(double v) {
  if (std::isinf(v)) return v > 0 ? json("inf") : json("-inf");
  return json(v);
}

double number_or_inf(const json& j) {
  if (j.is_string()) {
    std::string s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    fail(errc::parse_error, "expected a number or \"inf\"/\"-inf\"");
  }
  return j.get<double>();
}

} // namespace

measure parse_measure_json(const std::string& text, int quad_nodes) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    fail(errc::parse_error, e.what());
  }
  measure m;
  try {
    std::string dom = j.at("domain").get<std::string>();
    if (dom == "real")
      m.domain = domain_kind::real_line;
    else if (dom == "halfline")
      m.domain = domain_kind::half_line;
    else if (dom == "circle")
      m.domain = domain_kind::circle;
    else
      fail(errc::parse_error, "unknown domain \"" + dom + "\"");

    if (j.contains("atoms"))
      for (const auto& ja : j["atoms"]) {
        atom at;
        at.position = ja.at("x").get<double>();
        at.mass = ja.at("m").get<double>();
        m.atoms.push_back(at);
      }
    if (j.contains("ac"))
      for (const auto& jc : j["ac"]) {
        ac_component c;
        std::string fam = jc.at("family").get<std::string>();
        if (fam == "semicircle") {
          c.family = ac_family::semicircle;
          c.center = jc.at("center").get<double>();
          c.variance = jc.at("variance").get<double>();
        } else if (fam == "arcsine") {
          c.family = ac_family::arcsine;
          c.a = jc.at("a").get<double>();
          c.b = jc.at("b").get<double>();
        } else if (fam == "marchenko_pastur") {
          c.family = ac_family::marchenko_pastur;
          c.lambda = jc.at("lambda").get<double>();
          c.mass = std::min(1.0, 1.0 / c.lambda);
        } else if (fam == "cauchy") {
          c.family = ac_family::cauchy;
          c.location = jc.at("location").get<double>();
          c.scale = jc.at("scale").get<double>();
        } else if (fam == "uniform") {
          c.family = ac_family::uniform;
          c.a = jc.at("a").get<double>();
          c.b = jc.at("b").get<double>();
        } else if (fam == "jacobi") {
          c.family = ac_family::jacobi;
          c.a = jc.at("a").get<double>();
          c.b = jc.at("b").get<double>();
          c.alpha = jc.at("alpha").get<double>();
          c.beta = jc.at("beta").get<double>();
          c.normalizer = jc.at("normalizer").get<double>();
        } else if (fam == "table") {
          c.family = ac_family::table;
          c.nodes = jc.at("nodes").get<std::vector<double>>();
          c.weights = jc.at("weights").get<std::vector<double>>();
        } else {
          fail(errc::parse_error, "unknown ac family \"" + fam + "\"");
        }
        if (jc.contains("mass")) c.mass = jc["mass"].get<double>();
        m.ac.push_back(c);
      }
  } catch (const json::exception& e) {
    fail(errc::parse_error, e.what());
  }
  return validate(std::move(m), quad_nodes);
}

measure load_measure_file(const std::string& path, int quad_nodes) {
  std::ifstream in(path);
  if (!in) fail(errc::parse_error, "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_measure_json(ss.str(), quad_nodes);
}

std::string measure_to_json(const measure& m) {
  json j;
  j["domain"] = m.domain == domain_kind::real_line
                    ? "real"
                    : (m.domain == domain_kind::half_line ? "halfline" : "circle");
  j["atoms"] = json::array();
  for (const auto& at : m.atoms) j["atoms"].push_back({{"x", at.position}, {"m", at.mass}});
  j["ac"] = json::array();
  for (const auto& c : m.ac) {
    json jc;
    jc["family"] = ac_family_name(c.family);
    switch (c.family) {
      case ac_family::semicircle:
        jc["center"] = c.center;
        jc["variance"] = c.variance;
        break;
      case ac_family::arcsine:
      case ac_family::uniform:
        jc["a"] = c.a;
        jc["b"] = c.b;
        break;
      case ac_family::marchenko_pastur:
        jc["lambda"] = c.lambda;
        break;
      case ac_family::cauchy:
        jc["location"] = c.location;
        jc["scale"] = c.scale;
        break;
      case ac_family::jacobi:
        jc["a"] = c.a;
        jc["b"] = c.b;
        jc["alpha"] = c.alpha;
        jc["beta"] = c.beta;
        jc["normalizer"] = c.normalizer;
        break;
      case ac_family::table:
        jc["a"] = c.a;
        jc["b"] = c.b;
        jc["nodes"] = c.nodes;
        jc["weights"] = c.weights;
        break;
    }
    jc["mass"] = c.mass;
    j["ac"].push_back(jc);
  }
  return j.dump(2);
}

std::string support_to_json(const support_result& r) {
  json j;
  j["kind"] = r.kind == convolution_kind::additive
                  ? "add"
                  : (r.kind == convolution_kind::mult_halfline ? "mult-r" : "mult-t");
  j["components"] = r.n;
  j["n1"] = r.n1;
  j["n2"] = r.n2;
  j["bound_satisfied"] = r.bound_satisfied;
  j["converged"] = r.all_converged;
  j["intervals"] = json::array();
  for (const auto& iv : r.support.intervals)
    j["intervals"].push_back({finite_or_string(iv[0]), finite_or_string(iv[1])});
  j["isolated_points"] = r.support.isolated_points;
  j["gaps"] = json::array();
  for (const auto& g : r.gaps) {
    json jg;
    jg["lo"] = finite_or_string(g.lo);
    jg["hi"] = finite_or_string(g.hi);
    jg["omega1_lo"] = g.t1_lo;
    jg["omega2_lo"] = g.t2_lo;
    jg["omega1_hi"] = g.t1_hi;
    jg["omega2_hi"] = g.t2_hi;
    j["gaps"].push_back(jg);
  }
  if (!r.d_per_e.empty()) j["d_per_e"] = r.d_per_e;
  if (!r.notes.empty()) j["notes"] = r.notes;
  return j.dump(2);
}

loaded_support parse_support_json(const std::string& text) {
  loaded_support out;
  json j;
  try {
    j = json::parse(text);
    std::string kind = j.value("kind", "add");
    out.support.domain = kind == "mult-t"
                             ? domain_kind::circle
                             : (kind == "mult-r" ? domain_kind::half_line : domain_kind::real_line);
    for (const auto& iv : j.at("intervals"))
      out.support.intervals.push_back({number_or_inf(iv.at(0)), number_or_inf(iv.at(1))});
    for (const auto& p : j.value("isolated_points", std::vector<double>{}))
      out.support.isolated_points.push_back(p);
    out.components = j.value("components", out.support.component_count());
  } catch (const json::exception& e) {
    fail(errc::parse_error, e.what());
  }
  return out;
}

loaded_support load_support_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(errc::parse_error, "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_support_json(ss.str());
}

} // namespace freeconv
