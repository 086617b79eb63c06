// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pex {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument outside the domain of an operation (psi <= 0, theta > 1/2, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// An exhaustive enumeration would exceed its configured size limit.
class CapExceeded : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class EmptyTraining : public Error {
 public:
  using Error::Error;
};

}  // namespace pex
