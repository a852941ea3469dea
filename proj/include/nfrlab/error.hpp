#pragma once

#include <stdexcept>
#include <string>

namespace nfrlab {

// Exit-code mapping used by the command-line runner:
//   InvariantError -> 1, ConfigError -> 2, CapError -> 3.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class CapError : public Error {
 public:
  CapError(const std::string& what, double size)
      : Error(what), size_(size) {}
  double size() const { return size_; }

 private:
  double size_;
};

class ContractError : public Error {
 public:
  using Error::Error;
};

class InvariantError : public Error {
 public:
  using Error::Error;
};

}  // namespace nfrlab
