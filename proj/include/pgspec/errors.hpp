#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pgspec {

// Malformed input text. Carries the 1-based line number when known.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Graph or file structure violates an invariant (dangling edge, mixed block size, ...).
class StructuralError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Operation needs a connected graph.
class DisconnectedGraph : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Zero or negative eigenvalue where a strictly positive spectrum is required.
class SingularSpectrum : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Dense route refused because the matrix would exceed the configured size.
class SizeLimitExceeded : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace pgspec
