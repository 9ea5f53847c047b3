#ifndef DGSIM_ERRORS_HPP
#define DGSIM_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace dgsim {

/// Invalid generator, sweep, or stain-basis configuration.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A caller passed arguments outside an operation's domain.
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A linear-algebra routine could not produce a trustworthy answer.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace dgsim

#endif  // DGSIM_ERRORS_HPP
