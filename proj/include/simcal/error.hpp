#ifndef SIMCAL_ERROR_HPP
#define SIMCAL_ERROR_HPP

#include <stdexcept>
#include <string>

namespace simcal {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller broke an operation's precondition (mismatched grids, dt <= 0, ...).
class ContractError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration: DE settings, manifest content, missing object pose.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Unknown backend or duplicate registration.
class RegistryError : public Error {
 public:
  using Error::Error;
};

/// Input that cannot be interpolated (e.g. one sample stretched over a grid).
class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

/// Malformed data file. `line()` is the 1-based line number in the file
/// (the header is line 1), or 0 when the problem is not tied to a row.
class ParseError : public Error {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& what)
      : Error(source + (line ? ":" + std::to_string(line) : std::string()) + ": " + what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace simcal

#endif  // SIMCAL_ERROR_HPP
