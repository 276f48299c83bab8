#pragma once

#include <stdexcept>
#include <string>

namespace slabdecay {

enum class ErrorKind {
  interpolation_unavailable,
  degenerate_exponent,
  hypothesis_not_met,
  no_root_in_bracket,
  degenerate_parameter,
  continuation_failed,
  not_a_root,
  singular_system,
  parameter,
  fit_domain,
  config,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& what);

  ErrorKind kind() const { return kind_; }

private:
  ErrorKind kind_;
};

}  // namespace slabdecay
