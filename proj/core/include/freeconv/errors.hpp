#ifndef FREECONV_ERRORS_HPP
#define FREECONV_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace freeconv {

enum class errc {
  negative_mass,
  mass_not_one,
  domain_violation,
  unbounded_support,
  infinitely_many_components,
  eval_on_support,
  pole_of_f,
  psi_is_minus_one,
  eta_zero,
  branch_undetermined,
  point_mass_input,
  degenerate_input,
  not_converged,
  no_limit,
  criterion_failed,
  non_hermitian_fallout,
  parse_error,
};

const char* errc_name(errc c);

/// All recoverable failures surface as this exception; `code()` identifies
/// the condition so callers can branch without string matching.
class error : public std::runtime_error {
public:
  error(errc c, const std::string& what)
      : std::runtime_error(std::string(errc_name(c)) + ": " + what), code_(c) {}
  errc code() const { return code_; }

private:
  errc code_;
};

[[noreturn]] inline void fail(errc c, const std::string& what) { throw error(c, what); }

} // namespace freeconv

#endif
