#pragma once

#include <stdexcept>
#include <string>

namespace bandfit {

enum class ErrorKind {
  degenerate_input,
  size,
  domain,
  singular,
  non_periodic,
  non_closed,
  ill_conditioned,
  config,
  parse,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::degenerate_input: return "degenerate input";
    case ErrorKind::size: return "size";
    case ErrorKind::domain: return "domain";
    case ErrorKind::singular: return "singular";
    case ErrorKind::non_periodic: return "non-periodic integrand";
    case ErrorKind::non_closed: return "non-closed curve";
    case ErrorKind::ill_conditioned: return "ill-conditioned";
    case ErrorKind::config: return "config";
    case ErrorKind::parse: return "parse";
  }
  return "unknown";
}

/// Every failure raised by the library carries a kind so callers (and the
/// CLI exit-code mapping) can branch without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + " error: " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace bandfit
