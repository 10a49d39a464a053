#pragma once

#include <stdexcept>
#include <string>

namespace footsim {

// Error taxonomy mirrors the CLI exit codes: bad input files or malformed
// configuration (2), domain errors such as an unknown team (3), and internal
// invariant violations (4).

class InputError : public std::runtime_error {
 public:
  explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

class DomainError : public std::runtime_error {
 public:
  explicit DomainError(const std::string& what) : std::runtime_error(what) {}
};

class InternalError : public std::logic_error {
 public:
  explicit InternalError(const std::string& what) : std::logic_error(what) {}
};

}  // namespace footsim
