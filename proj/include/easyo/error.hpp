#pragma once

#include <stdexcept>
#include <string>

namespace easyo {

// Base for all library errors; the C API maps each subclass to a status code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class TopologyError : public Error {
 public:
  using Error::Error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

// Energy- or data-availability breach while applying queue dynamics.
class AvailabilityError : public Error {
 public:
  using Error::Error;
};

// State invariant broken (e.g. E_n > theta_n).
class StateError : public Error {
 public:
  using Error::Error;
};

class InternalError : public Error {
 public:
  using Error::Error;
};

}  // namespace easyo
