#pragma once

#include <stdexcept>
#include <string>

namespace memheat {

/// Invalid user input: bad parameters, malformed documents, violated invariants.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Argument outside the mathematical domain of a function (e.g. ln_j below its threshold).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// The requested construction or check does not apply to the given exponents/coefficients.
class NotApplicable : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace memheat
