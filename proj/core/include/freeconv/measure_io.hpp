#ifndef FREECONV_MEASURE_IO_HPP
#define FREECONV_MEASURE_IO_HPP

#include <string>

#include "freeconv/measure.hpp"
#include "freeconv/support.hpp"

namespace freeconv {

/// Measure spec format:
/// {"domain":"real"|"halfline"|"circle",
///  "atoms":[{"x":...,"m":...}],
///  "ac":[{"family":"semicircle","center":0,"variance":1},
///        {"family":"table","a":...,"b":...,"nodes":[...],"weights":[...]}]}
/// Families: semicircle(center,variance), arcsine(a,b),
/// marchenko_pastur(lambda), cauchy(location,scale), uniform(a,b),
/// jacobi(a,b,alpha,beta,normalizer), table(a,b,nodes,weights); every
/// family accepts an optional "mass".
measure parse_measure_json(const std::string& text, int quad_nodes = 200);
measure load_measure_file(const std::string& path, int quad_nodes = 200);
std::string measure_to_json(const measure& m);

std::string support_to_json(const support_result& r);

struct loaded_support {
  support_set support;
  int components = 0;
};
loaded_support parse_support_json(const std::string& text);
loaded_support load_support_file(const std::string& path);

} // namespace freeconv

#endif
