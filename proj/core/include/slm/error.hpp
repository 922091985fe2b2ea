#pragma once

#include <stdexcept>
#include <string>

namespace slm {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the operation's domain (unknown model index, d = 0, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// The design X_Z of a structure has a singular Gram matrix.
class CollinearStructure : public Error {
 public:
  using Error::Error;
};

/// Enumeration would exceed the caller's cap. `count` is the exact decimal count.
class CapExceeded : public Error {
 public:
  CapExceeded(const std::string& what, std::string count)
      : Error(what), count_(std::move(count)) {}
  const std::string& count() const noexcept { return count_; }

 private:
  std::string count_;
};

/// Every model index has an empty set of identifiable structures.
class NoValidModels : public Error {
 public:
  using Error::Error;
};

/// Malformed or inconsistent configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace slm
