#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace bnnpipe {

// Malformed text input (model file, IR file, packets file, hex strings).
class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& what, std::size_t line = 0)
      : std::runtime_error(line ? what + " at line " + std::to_string(line) : what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// A value that is well-formed but violates a domain invariant.
class InvariantError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The model or program does not fit the target chip profile.
class CapacityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A program failed validate_program and cannot be executed.
class InvalidProgramError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace bnnpipe
