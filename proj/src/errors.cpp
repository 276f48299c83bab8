#include "slabdecay/errors.hpp"

namespace slabdecay {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::interpolation_unavailable: return "interpolation-unavailable";
    case ErrorKind::degenerate_exponent: return "degenerate-exponent";
    case ErrorKind::hypothesis_not_met: return "hypothesis-not-met";
    case ErrorKind::no_root_in_bracket: return "no-root-in-bracket";
    case ErrorKind::degenerate_parameter: return "degenerate-parameter";
    case ErrorKind::continuation_failed: return "continuation-failed";
    case ErrorKind::not_a_root: return "not-a-root";
    case ErrorKind::singular_system: return "singular-system";
    case ErrorKind::parameter: return "parameter";
    case ErrorKind::fit_domain: return "fit-domain";
    case ErrorKind::config: return "config";
  }
  return "unknown";
}

Error::Error(ErrorKind kind, const std::string& what)
    : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

}  // namespace slabdecay
