#ifndef LOADER_RL_ERRORS_HPP_
#define LOADER_RL_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace loader_rl {

// Malformed or version-mismatched files (checkpoints, traces, metrics, configs).
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A file could not be opened, created, or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Operation called in a state that forbids it, e.g. stepping a finished episode.
class IllegalStateError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// NaN/Inf showed up where a finite number was required.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Config validation failure; `line` is 0 when the problem is not tied to a line.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(const std::string& message, int line = 0)
      : std::invalid_argument(message), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

}  // namespace loader_rl

#endif  // LOADER_RL_ERRORS_HPP_
